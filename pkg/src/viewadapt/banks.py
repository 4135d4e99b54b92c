"""Multi-label pseudo-labeling, entropy-bounded memory banks, and prototype classifier.

Each incoming sample is tagged with its top-K classes and stored in the matching
per-class banks. A bank keeps at most `capacity` entries, always the lowest-entropy
ones seen so far; ties at the capacity boundary favor the incumbent. Prototypes are
confidence-weighted means of a bank's stored representations.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import EngineConfig, entropy, safe_cosine, topk_indices
from .errors import InvalidInput

_WEIGHT_SHIFT_DELTA = 1e-8


@dataclass
class DataTuple:
    """One adapted sample: representation, its top-K pseudo labels with raw-logit
    confidences, and the prediction entropy."""

    representation: np.ndarray
    pseudo_labels: tuple[int, ...]
    confidences: np.ndarray
    entropy: float


@dataclass
class BankEntry:
    representation: np.ndarray
    confidence: float
    entropy: float
    arrival: int

    @property
    def sort_key(self) -> tuple[float, int]:
        return (self.entropy, self.arrival)


class MemoryBank:
    """Bounded per-class store retaining the lowest-entropy exemplars.

    Entries are kept in ascending (entropy, arrival) order; arrival indices are
    unique, so ordering is total and ties at the boundary keep the earlier entry.
    """

    def __init__(self, class_id: int, capacity: int):
        if capacity < 1:
            raise InvalidInput("bank capacity must be >= 1")
        self.class_id = class_id
        self.capacity = capacity
        self.entries: list[BankEntry] = []

    def __len__(self) -> int:
        return len(self.entries)

    def offer(self, representation: np.ndarray, confidence: float, ent: float, arrival: int) -> bool:
        """Insert if the bank has room or the candidate beats the worst stored entry."""
        entry = BankEntry(representation, float(confidence), float(ent), arrival)
        if len(self.entries) < self.capacity:
            bisect.insort(self.entries, entry, key=lambda e: e.sort_key)
            return True
        worst = self.entries[-1]
        # strict inequality: an equal-entropy candidate arrived later and loses
        if entry.entropy < worst.entropy:
            self.entries.pop()
            bisect.insort(self.entries, entry, key=lambda e: e.sort_key)
            return True
        return False


class BankSet:
    """The per-class bank collection plus the stream-order arrival counter."""

    def __init__(self, class_count: int, capacity: int):
        self.banks = [MemoryBank(i, capacity) for i in range(class_count)]
        self.next_arrival = 0

    def __iter__(self):
        return iter(self.banks)

    def __getitem__(self, class_id: int) -> MemoryBank:
        return self.banks[class_id]

    def __len__(self) -> int:
        return len(self.banks)

    @classmethod
    def for_config(cls, config: EngineConfig) -> "BankSet":
        return cls(config.class_count, config.bank_capacity)

    def sizes(self) -> list[int]:
        return [len(b) for b in self.banks]


def assign_pseudo_labels(representation, logits, k: int) -> DataTuple:
    """Build the data tuple for one sample: top-k classes as pseudo labels, the raw
    logit values at those classes as confidences, and the softmax entropy."""
    z = np.asarray(logits, dtype=np.float64)
    labels = tuple(topk_indices(z, k))
    rep = np.asarray(representation, dtype=np.float64)
    return DataTuple(
        representation=rep,
        pseudo_labels=labels,
        confidences=z[list(labels)].copy(),
        entropy=entropy(z),
    )


def update_banks(banks: BankSet, batch: Sequence[DataTuple]) -> BankSet:
    """Apply a batch of tuples to the banks in stream order.

    Each tuple contributes one (representation, confidence, entropy) candidate to
    the bank of every one of its pseudo labels.
    """
    for tup in batch:
        arrival = banks.next_arrival
        banks.next_arrival += 1
        for label, conf in zip(tup.pseudo_labels, tup.confidences):
            banks[label].offer(tup.representation, conf, tup.entropy, arrival)
    return banks


def confidence_weights(confidences: np.ndarray) -> np.ndarray:
    """Normalize confidences into convex weights.

    Strictly positive confidences are L1-normalized directly. Otherwise they are
    shifted so the minimum maps to a small positive value before normalizing, which
    also yields exactly uniform weights when all confidences are equal.
    """
    conf = np.asarray(confidences, dtype=np.float64)
    if conf.ndim != 1 or conf.size == 0:
        raise InvalidInput("confidences must be a nonempty 1-d vector")
    if np.all(conf > 0.0):
        return conf / conf.sum()
    shifted = conf - conf.min() + _WEIGHT_SHIFT_DELTA
    return shifted / shifted.sum()


@dataclass
class PrototypeClassifier:
    """Per-class prototype matrix; rows of never-populated classes stay zero."""

    prototypes: np.ndarray  # (class_count, rep_dim)
    populated: np.ndarray   # (class_count,) bool

    @property
    def class_count(self) -> int:
        return self.prototypes.shape[0]


def compute_prototypes(banks: BankSet, rep_dim: int | None = None) -> PrototypeClassifier:
    """Confidence-weighted prototype per nonempty bank; empty banks give zero rows."""
    if rep_dim is None:
        rep_dim = next(
            (b.entries[0].representation.shape[0] for b in banks if b.entries), 0
        )
    protos = np.zeros((len(banks), rep_dim))
    populated = np.zeros(len(banks), dtype=bool)
    for bank in banks:
        if not bank.entries:
            continue
        reps = np.stack([e.representation for e in bank.entries])
        conf = np.array([e.confidence for e in bank.entries])
        w = confidence_weights(conf)
        protos[bank.class_id] = w @ reps
        populated[bank.class_id] = True
    return PrototypeClassifier(prototypes=protos, populated=populated)


def prototype_logits(classifier: PrototypeClassifier, representation) -> np.ndarray:
    """Cosine similarity of the representation against each populated prototype;
    unpopulated classes score the neutral value 0."""
    rep = np.asarray(representation, dtype=np.float64)
    out = np.zeros(classifier.class_count)
    for i in range(classifier.class_count):
        if classifier.populated[i]:
            out[i] = safe_cosine(classifier.prototypes[i], rep)
    return out


def export_bank_snapshot(banks: Iterable[MemoryBank], path) -> int:
    """Write one JSON line per stored entry for offline inspection. Returns the count."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for bank in banks:
            for e in bank.entries:
                fh.write(
                    json.dumps(
                        {
                            "class_id": bank.class_id,
                            "entropy": e.entropy,
                            "confidence": e.confidence,
                            "representation": [float(x) for x in e.representation],
                        }
                    )
                )
                fh.write("\n")
                n += 1
    return n
