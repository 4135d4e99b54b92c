"""Feature-file container: a little-endian binary format plus a JSON-lines mirror.

Layout (all little-endian):
  header: magic "EEFC", version u32, feature dim u32, frames-per-record u32, record count u64
  record: id length u16, UTF-8 id bytes, view tag u8, frames*dim float32 frame block,
          dim float32 visual clue, dim float32 textual clue, label count u16, label ids u16 each

Records store float32 so a write/read cycle is bit-exact. View tag 2 marks parameter
records, which lets model checkpoints reuse the same file format.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from .errors import FormatError, InvalidInput

MAGIC = b"EEFC"
FORMAT_VERSION = 1


class View(IntEnum):
    EGO = 0
    EXO = 1
    PARAM = 2


_VIEW_NAMES = {View.EGO: "ego", View.EXO: "exo", View.PARAM: "param"}
_VIEW_BY_NAME = {name: view for view, name in _VIEW_NAMES.items()}


@dataclass
class FeatureRecord:
    """One windowed sample: per-frame features, the two clue vectors, and labels
    when the record belongs to a labeled split."""

    sample_id: str
    view: View
    frame_features: np.ndarray  # (frames, dim) float32
    visual_clue: np.ndarray     # (dim,) float32
    textual_clue: np.ndarray    # (dim,) float32
    labels: tuple[int, ...] | None = None

    def __post_init__(self):
        if not isinstance(self.sample_id, str) or len(self.sample_id.encode("utf-8")) > 0xFFFF:
            raise InvalidInput("sample_id must be a string of at most 65535 UTF-8 bytes")
        self.view = View(self.view)
        frames = np.asarray(self.frame_features, dtype=np.float32)
        if frames.ndim != 2 or frames.shape[0] == 0 or frames.shape[1] == 0:
            raise InvalidInput("frame_features must be a nonempty 2-d block")
        visual = np.asarray(self.visual_clue, dtype=np.float32)
        textual = np.asarray(self.textual_clue, dtype=np.float32)
        if visual.shape != (frames.shape[1],) or textual.shape != (frames.shape[1],):
            raise InvalidInput("clue vectors must match the frame feature dimension")
        for name, arr in (("frame_features", frames), ("visual_clue", visual), ("textual_clue", textual)):
            if not np.all(np.isfinite(arr)):
                raise InvalidInput(f"{name} must be finite")
        self.frame_features = frames
        self.visual_clue = visual
        self.textual_clue = textual
        if self.labels is not None:
            labels = tuple(int(x) for x in self.labels)
            if len(labels) == 0:
                self.labels = None
            else:
                if len(set(labels)) != len(labels):
                    raise InvalidInput("labels must be distinct")
                if any(x < 0 or x > 0xFFFF for x in labels):
                    raise InvalidInput("label ids must fit in an unsigned 16-bit integer")
                self.labels = labels

    @property
    def dim(self) -> int:
        return self.frame_features.shape[1]

    @property
    def frames(self) -> int:
        return self.frame_features.shape[0]


def write_records(path, records: Sequence[FeatureRecord]) -> None:
    records = list(records)
    if records:
        dim = records[0].dim
        frames = records[0].frames
        for rec in records:
            if rec.dim != dim or rec.frames != frames:
                raise InvalidInput("all records in a container must share frame count and dimension")
    else:
        dim = frames = 0
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIIIQ", MAGIC, FORMAT_VERSION, dim, frames, len(records)))
        for rec in records:
            id_bytes = rec.sample_id.encode("utf-8")
            fh.write(struct.pack("<H", len(id_bytes)))
            fh.write(id_bytes)
            fh.write(struct.pack("<B", int(rec.view)))
            fh.write(np.ascontiguousarray(rec.frame_features, dtype="<f4").tobytes())
            fh.write(np.ascontiguousarray(rec.visual_clue, dtype="<f4").tobytes())
            fh.write(np.ascontiguousarray(rec.textual_clue, dtype="<f4").tobytes())
            labels = rec.labels or ()
            fh.write(struct.pack("<H", len(labels)))
            if labels:
                fh.write(struct.pack(f"<{len(labels)}H", *labels))


class _Cursor:
    """Byte-offset-tracking reader so malformed files fail with a precise position."""

    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, n: int, what: str) -> bytes:
        if self.offset + n > len(self.data):
            raise FormatError(f"truncated file while reading {what}", offset=self.offset)
        chunk = self.data[self.offset : self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def read_records(path) -> list[FeatureRecord]:
    with open(path, "rb") as fh:
        data = fh.read()
    cur = _Cursor(data)
    if cur.take(4, "magic") != MAGIC:
        raise FormatError("bad magic", offset=0)
    (version,) = cur.unpack("<I", "format version")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}", offset=4)
    dim, frames, count = (*cur.unpack("<I", "feature dim"), *cur.unpack("<I", "frame count"), *cur.unpack("<Q", "record count"))
    records: list[FeatureRecord] = []
    for _ in range(count):
        (id_len,) = cur.unpack("<H", "id length")
        id_offset = cur.offset
        id_bytes = cur.take(id_len, "sample id")
        try:
            sample_id = id_bytes.decode("utf-8")
        except UnicodeDecodeError:
            raise FormatError("sample id is not valid UTF-8", offset=id_offset) from None
        view_offset = cur.offset
        (view_tag,) = cur.unpack("<B", "view tag")
        if view_tag not in (0, 1, 2):
            raise FormatError(f"unknown view tag {view_tag}", offset=view_offset)
        block_offset = cur.offset
        frame_block = np.frombuffer(cur.take(4 * frames * dim, "frame block"), dtype="<f4").reshape(frames, dim)
        visual = np.frombuffer(cur.take(4 * dim, "visual clue"), dtype="<f4")
        textual = np.frombuffer(cur.take(4 * dim, "textual clue"), dtype="<f4")
        for arr in (frame_block, visual, textual):
            if not np.all(np.isfinite(arr)):
                raise FormatError("non-finite feature value", offset=block_offset)
        (label_count,) = cur.unpack("<H", "label count")
        labels: tuple[int, ...] | None = None
        if label_count:
            labels = cur.unpack(f"<{label_count}H", "label ids")
        records.append(
            FeatureRecord(
                sample_id=sample_id,
                view=View(view_tag),
                frame_features=frame_block.copy(),
                visual_clue=visual.copy(),
                textual_clue=textual.copy(),
                labels=labels,
            )
        )
    if cur.offset != len(data):
        raise FormatError("trailing data after the declared record count", offset=cur.offset)
    return records


# --- JSON-lines mirror (human-readable, exact through float32 widening) ---

def write_records_jsonl(path, records: Iterable[FeatureRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj = {
                "sample_id": rec.sample_id,
                "view": _VIEW_NAMES[rec.view],
                "frame_features": [[float(x) for x in row] for row in rec.frame_features],
                "visual_clue": [float(x) for x in rec.visual_clue],
                "textual_clue": [float(x) for x in rec.textual_clue],
                "labels": list(rec.labels) if rec.labels is not None else None,
            }
            fh.write(json.dumps(obj, separators=(",", ":")))
            fh.write("\n")


def read_records_jsonl(path) -> list[FeatureRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                records.append(
                    FeatureRecord(
                        sample_id=obj["sample_id"],
                        view=_VIEW_BY_NAME[obj["view"]],
                        frame_features=np.array(obj["frame_features"], dtype=np.float32),
                        visual_clue=np.array(obj["visual_clue"], dtype=np.float32),
                        textual_clue=np.array(obj["textual_clue"], dtype=np.float32),
                        labels=tuple(obj["labels"]) if obj.get("labels") else None,
                    )
                )
            except (KeyError, ValueError, TypeError, InvalidInput) as exc:
                raise FormatError(f"bad record on line {line_no}: {exc}", offset=line_no) from None
    return records


# --- Parameter checkpoints reusing the record layout (view tag 2) ---

def write_params(path, params: dict[str, np.ndarray]) -> None:
    """Store named matrices/vectors as parameter records.

    All parameter blocks are zero-padded to a common (max rows, max cols) shape so
    they fit one container header; the true shape rides along in the record id as
    "name:rows x cols". Vectors are stored as single-row matrices.
    """
    if not params:
        raise InvalidInput("no parameters to write")
    mats = {}
    for name, value in params.items():
        arr = np.asarray(value, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2:
            raise InvalidInput(f"parameter {name!r} must be 1-d or 2-d")
        if ":" in name:
            raise InvalidInput("parameter names must not contain ':'")
        mats[name] = arr
    frames = max(a.shape[0] for a in mats.values())
    dim = max(a.shape[1] for a in mats.values())
    records = []
    for name in sorted(mats):
        arr = mats[name]
        block = np.zeros((frames, dim), dtype=np.float32)
        block[: arr.shape[0], : arr.shape[1]] = arr
        records.append(
            FeatureRecord(
                sample_id=f"{name}:{arr.shape[0]}x{arr.shape[1]}",
                view=View.PARAM,
                frame_features=block,
                visual_clue=np.zeros(dim, dtype=np.float32),
                textual_clue=np.zeros(dim, dtype=np.float32),
            )
        )
    write_records(path, records)


def read_params(path) -> dict[str, np.ndarray]:
    """Inverse of write_params; returns float64 arrays (vectors stay single-row)."""
    params: dict[str, np.ndarray] = {}
    for rec in read_records(path):
        if rec.view != View.PARAM:
            raise FormatError(f"record {rec.sample_id!r} is not a parameter record", offset=0)
        name, _, shape = rec.sample_id.rpartition(":")
        try:
            rows, cols = (int(x) for x in shape.split("x"))
        except ValueError:
            raise FormatError(f"malformed parameter id {rec.sample_id!r}", offset=0) from None
        if not name or rows < 1 or cols < 1 or rows > rec.frames or cols > rec.dim:
            raise FormatError(f"malformed parameter id {rec.sample_id!r}", offset=0)
        params[name] = rec.frame_features[:rows, :cols].astype(np.float64)
    return params
