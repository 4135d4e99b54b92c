"""Writer for the `.eefc` container that the viewadapt engine reads.

Deliberately independent of viewadapt's own serialization code: the byte
layout is encoded here from scratch, so a file produced by this module proves
the format contract rather than round-tripping through one shared
implementation.

Layout, little-endian throughout:
    header  magic "EEFC" | version u32 | feature dim u32 | frames u32 | count u64
    record  id length u16 | UTF-8 id | view u8 (0 ego, 1 exo) |
            frames*dim float32 | dim float32 visual clue | dim float32 textual
            clue | label count u16 | label ids u16 each
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"EEFC"
VERSION = 1
VIEW_TAGS = {"ego": 0, "exo": 1}

_COUNT_OFFSET = 16  # magic(4) + version(4) + dim(4) + frames(4)


class ContainerWriter:
    """Append-only writer. One writer per file; the record count in the header
    is patched on close, so the file is only valid after close()."""

    def __init__(self, path, dim: int, frames: int):
        if dim < 1 or frames < 1:
            raise ValueError("container needs a positive feature dim and frame count")
        self.dim = int(dim)
        self.frames = int(frames)
        self.count = 0
        self._fh = open(path, "wb")
        self._fh.write(struct.pack("<4sIIIQ", MAGIC, VERSION, self.dim, self.frames, 0))

    def add(self, sample_id: str, view: str, frame_features, visual_clue, textual_clue,
            labels=()) -> None:
        if view not in VIEW_TAGS:
            raise ValueError(f"view must be one of {sorted(VIEW_TAGS)}, got {view!r}")
        feats = np.ascontiguousarray(frame_features, dtype="<f4")
        visual = np.ascontiguousarray(visual_clue, dtype="<f4")
        textual = np.ascontiguousarray(textual_clue, dtype="<f4")
        if feats.shape != (self.frames, self.dim):
            raise ValueError(f"frame block must be {(self.frames, self.dim)}, got {feats.shape}")
        if visual.shape != (self.dim,) or textual.shape != (self.dim,):
            raise ValueError("clue vectors must match the declared feature dim")
        for arr in (feats, visual, textual):
            if not np.all(np.isfinite(arr)):
                raise ValueError("features must be finite")
        id_bytes = sample_id.encode("utf-8")
        if not 0 < len(id_bytes) <= 0xFFFF:
            raise ValueError("sample id must be 1..65535 UTF-8 bytes")
        labels = [int(x) for x in labels]
        if len(set(labels)) != len(labels) or any(not 0 <= x <= 0xFFFF for x in labels):
            raise ValueError("labels must be distinct unsigned 16-bit ids")

        fh = self._fh
        fh.write(struct.pack("<H", len(id_bytes)))
        fh.write(id_bytes)
        fh.write(struct.pack("<B", VIEW_TAGS[view]))
        fh.write(feats.tobytes())
        fh.write(visual.tobytes())
        fh.write(textual.tobytes())
        fh.write(struct.pack("<H", len(labels)))
        if labels:
            fh.write(struct.pack(f"<{len(labels)}H", *labels))
        self.count += 1

    def close(self) -> None:
        if self._fh is None:
            return
        self._fh.seek(_COUNT_OFFSET)
        self._fh.write(struct.pack("<Q", self.count))
        self._fh.close()
        self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
