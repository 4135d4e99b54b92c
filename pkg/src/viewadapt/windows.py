"""Observation-window extraction from timestamped per-frame features.

For an event starting at t_s the observation window is the interval
[t_s - tau_interval - tau_obs, t_s - tau_interval]; a fixed number of target
times is spread uniformly across it (endpoints included) and each target time is
resolved to the nearest available frame, ties going to the earlier frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EngineConfig
from .errors import InvalidInput, WindowOutOfRange


@dataclass
class TimedFrameSequence:
    """Per-frame features aligned to strictly ascending timestamps (seconds)."""

    timestamps: np.ndarray
    features: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.float64)
        feats = np.asarray(self.features, dtype=np.float64)
        if ts.ndim != 1 or ts.size == 0:
            raise InvalidInput("timestamps must be a nonempty 1-d vector")
        if not np.all(np.isfinite(ts)):
            raise InvalidInput("timestamps must be finite")
        if np.any(np.diff(ts) <= 0.0):
            raise InvalidInput("timestamps must be strictly ascending")
        if feats.ndim != 2 or feats.shape[0] != ts.size:
            raise InvalidInput("features must be a 2-d block aligned with timestamps")
        self.timestamps = ts
        self.features = feats

    def __len__(self) -> int:
        return self.timestamps.size


def window_target_times(event_start: float, config: EngineConfig) -> np.ndarray:
    """Uniform (endpoint-inclusive) target times across the observation window; a
    single-frame window uses the interval start."""
    start = event_start - config.tau_interval_s - config.tau_obs_s
    end = event_start - config.tau_interval_s
    n = config.frames_per_window
    if n == 1:
        return np.array([start])
    return np.linspace(start, end, n)


def window_frame_indices(timestamps, event_start: float, config: EngineConfig) -> list[int]:
    ts = np.asarray(timestamps, dtype=np.float64)
    targets = window_target_times(event_start, config)
    if targets[0] < ts[0]:
        raise WindowOutOfRange(
            f"window starts at {targets[0]:g}s but frames begin at {ts[0]:g}s"
        )
    indices = []
    for t in targets:
        pos = int(np.searchsorted(ts, t, side="left"))
        if pos == 0:
            indices.append(0)
        elif pos == ts.size:
            indices.append(ts.size - 1)
        else:
            # tie between the two neighbors resolves to the earlier frame
            before, after = ts[pos - 1], ts[pos]
            indices.append(pos - 1 if t - before <= after - t else pos)
    return indices


def extract_window(seq: TimedFrameSequence, event_start: float, config: EngineConfig) -> np.ndarray:
    """The frames_per_window feature rows observed before the event."""
    idx = window_frame_indices(seq.timestamps, event_start, config)
    return seq.features[idx].copy()
