"""Pluggable frame/text encoders, selected by string identifier.

Only the toy encoder ships here: a deterministic random projection of
downscaled grayscale pixels (and of hashed description tokens on the text
side). It stands in for a real vision-language model so export pipelines run
end to end without weights; anything exposing `dim`, `encode_frame`, and
`encode_text` can be registered alongside it.

Identifiers look like "toy-64" — the suffix is the output dimension. Outputs
are L2-normalized float32, following the usual embedding convention.
"""

from __future__ import annotations

import hashlib

import cv2
import numpy as np

_PATCH = 16  # frames are grayscaled and shrunk to _PATCH x _PATCH before projecting


def _seed_from(text: str) -> int:
    # hashlib, not hash(): Python string hashing is salted per process.
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "little")


def _normalized(z: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(z)
    return (z / norm if norm > 0 else z).astype(np.float32)


class ToyEncoder:
    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("encoder dim must be positive")
        self.dim = dim
        rng = np.random.default_rng(_seed_from(f"toy-image-{dim}"))
        self._projection = rng.standard_normal((_PATCH * _PATCH, dim)) / _PATCH

    def encode_frame(self, frame: np.ndarray) -> np.ndarray:
        gray = cv2.cvtColor(frame, cv2.COLOR_BGR2GRAY) if frame.ndim == 3 else frame
        small = cv2.resize(gray, (_PATCH, _PATCH), interpolation=cv2.INTER_AREA)
        pixels = small.astype(np.float64).ravel() / 255.0
        return _normalized(pixels @ self._projection)

    def encode_text(self, text: str) -> np.ndarray:
        z = np.zeros(self.dim)
        for token in text.lower().split():
            rng = np.random.default_rng(_seed_from(f"toy-token-{self.dim}-{token}"))
            z += rng.standard_normal(self.dim)
        return _normalized(z)


def get_encoder(identifier: str):
    kind, _, suffix = identifier.partition("-")
    if kind == "toy" and suffix:
        try:
            return ToyEncoder(int(suffix))
        except ValueError:
            pass
    raise ValueError(f"unknown encoder identifier {identifier!r} (expected e.g. 'toy-64')")
