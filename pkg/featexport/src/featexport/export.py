"""Turn videos plus event annotations into engine-ready feature containers.

For every annotated event we look at the observation window that ends
`interval_seconds` before the event starts and spans `observation_seconds`,
sample `frames_per_window` evenly spaced target times inside it, snap each to
the nearest decoded frame (ties to the earlier frame, ends clamped), encode
those frames, and emit one record: the frame features, the last sampled
frame's feature as the visual clue, the embedded description text as the
textual clue, and the event's class ids as labels.

Events whose window starts before the video does are skipped and counted;
unreadable videos are skipped whole with the reason logged. Items are
independent of each other (parallelize per video if it ever matters); the
container itself has a single append-only writer.
"""

from __future__ import annotations

import bisect
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .container import ContainerWriter, VIEW_TAGS
from .encoders import get_encoder

log = logging.getLogger("featexport")


class JobError(ValueError):
    """Bad job file, annotation, or encoder identifier."""


@dataclass(frozen=True)
class Event:
    start: float        # event onset, seconds
    end: float
    classes: tuple[int, ...]
    description: str


@dataclass(frozen=True)
class VideoItem:
    path: str
    view: str           # "ego" | "exo"
    events: tuple[Event, ...]


@dataclass(frozen=True)
class ExportJob:
    encoder: str
    output: str
    class_count: int
    observation_seconds: float
    interval_seconds: float
    frames_per_window: int
    items: tuple[VideoItem, ...]


@dataclass
class ExportResult:
    records_written: int = 0
    events_skipped: int = 0     # observation window starts before the video
    items_skipped: int = 0      # unreadable media
    skip_reasons: list[str] = field(default_factory=list)


# ---------------------------------------------------------------- job loading

def _parse_event(obj, class_count, where) -> Event:
    try:
        start = float(obj["start"])
        end = float(obj["end"])
        classes = tuple(int(c) for c in obj["classes"])
        description = str(obj.get("description", ""))
    except (KeyError, TypeError, ValueError) as exc:
        raise JobError(f"bad event in {where}: {exc}") from None
    if end < start:
        raise JobError(f"bad event in {where}: end {end} precedes start {start}")
    if not classes:
        raise JobError(f"bad event in {where}: no class ids")
    for c in classes:
        if not 0 <= c < class_count:
            raise JobError(f"bad event in {where}: class id {c} outside vocabulary of {class_count}")
    return Event(start=start, end=end, classes=classes, description=description)


def load_job(path) -> ExportJob:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise JobError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(obj, dict):
        raise JobError(f"{path}: job file must hold a JSON object")

    try:
        classes = obj["classes"]
        class_count = len(classes) if isinstance(classes, list) else int(classes)
        window = obj["window"]
        job = ExportJob(
            encoder=str(obj["encoder"]),
            output=str(path.parent / obj["output"]),
            class_count=class_count,
            observation_seconds=float(window["observation_seconds"]),
            interval_seconds=float(window["interval_seconds"]),
            frames_per_window=int(window["frames"]),
            items=(),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise JobError(f"{path}: missing or malformed field ({exc})") from None
    if job.class_count < 1:
        raise JobError(f"{path}: class vocabulary is empty")
    if job.frames_per_window < 1 or job.observation_seconds <= 0 or job.interval_seconds < 0:
        raise JobError(f"{path}: bad window parameters")

    items = []
    for i, entry in enumerate(obj.get("videos", [])):
        where = f"{path} videos[{i}]"
        try:
            video_path = str(path.parent / entry["path"])
            view = str(entry["view"])
        except (KeyError, TypeError) as exc:
            raise JobError(f"bad item in {where}: {exc}") from None
        if view not in VIEW_TAGS:
            raise JobError(f"bad item in {where}: view must be one of {sorted(VIEW_TAGS)}")
        if "annotations" in entry:
            ann_path = path.parent / entry["annotations"]
            try:
                raw_events = json.loads(ann_path.read_text(encoding="utf-8"))
            except FileNotFoundError:
                raise JobError(f"{where}: annotation file {ann_path} not found") from None
            except json.JSONDecodeError as exc:
                raise JobError(f"{where}: {ann_path} is not valid JSON ({exc})") from None
            where = str(ann_path)
        else:
            raw_events = entry.get("events", [])
        if not isinstance(raw_events, list):
            raise JobError(f"{where}: events must be a JSON list")
        events = tuple(_parse_event(e, job.class_count, where) for e in raw_events)
        items.append(VideoItem(path=video_path, view=view, events=events))
    return ExportJob(**{**job.__dict__, "items": tuple(items)})


# ------------------------------------------------------------------ windowing
# Same policy as viewadapt's window extraction, implemented independently so
# the parity tests compare two codebases rather than one function with itself.

def window_times(start, observation_seconds, interval_seconds, count):
    lo = start - interval_seconds - observation_seconds
    hi = start - interval_seconds
    if count == 1:
        return np.array([lo])
    return np.linspace(lo, hi, count)


def nearest_indices(timestamps, targets) -> list[int]:
    out = []
    last = len(timestamps) - 1
    for t in targets:
        j = bisect.bisect_left(timestamps, t)
        if j == 0:
            out.append(0)
        elif j > last:
            out.append(last)
        else:
            before, after = timestamps[j - 1], timestamps[j]
            out.append(j - 1 if t - before <= after - t else j)
    return out


# --------------------------------------------------------------------- export

def _read_video(path):
    """Decode a whole clip. Returns (frames, timestamps) or (None, reason)."""
    cap = cv2.VideoCapture(path)
    if not cap.isOpened():
        return None, f"could not open {path}"
    fps = cap.get(cv2.CAP_PROP_FPS)
    frames = []
    while True:
        ok, frame = cap.read()
        if not ok:
            break
        frames.append(frame)
    cap.release()
    if not frames:
        return None, f"no decodable frames in {path}"
    if fps <= 0:
        return None, f"no frame rate metadata in {path}"
    return frames, [i / fps for i in range(len(frames))]


def export(job: ExportJob) -> ExportResult:
    encoder = get_encoder(job.encoder)
    result = ExportResult()
    with ContainerWriter(job.output, encoder.dim, job.frames_per_window) as writer:
        for item in job.items:
            frames, timestamps = _read_video(item.path)
            if frames is None:
                reason = timestamps
                log.warning("skipping item: %s", reason)
                result.items_skipped += 1
                result.skip_reasons.append(reason)
                continue
            stem = Path(item.path).stem
            encoded: dict[int, np.ndarray] = {}  # each frame encoded at most once
            for j, event in enumerate(item.events):
                times = window_times(event.start, job.observation_seconds,
                                     job.interval_seconds, job.frames_per_window)
                if times[0] < timestamps[0]:
                    log.info("skipping %s event %d: window starts %.3fs before the video",
                             stem, j, timestamps[0] - times[0])
                    result.events_skipped += 1
                    continue
                indices = nearest_indices(timestamps, times)
                for i in indices:
                    if i not in encoded:
                        encoded[i] = encoder.encode_frame(frames[i])
                feats = np.stack([encoded[i] for i in indices])
                writer.add(
                    sample_id=f"{stem}/{j:03d}",
                    view=item.view,
                    frame_features=feats,
                    visual_clue=feats[-1],
                    textual_clue=encoder.encode_text(event.description),
                    labels=event.classes,
                )
                result.records_written += 1
    log.info("wrote %d records to %s (%d events skipped, %d items skipped)",
             result.records_written, job.output, result.events_skipped, result.items_skipped)
    return result
