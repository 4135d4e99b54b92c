"""Class-mean Top-K recall and deterministic run reports.

Macro averaging over the classes that actually appear in the ground truth; a class
never observed contributes nothing to the mean. Reports use fixed float formatting
and carry no timestamps, so identical runs emit identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import topk_indices
from .errors import EmptyEvaluation, InvalidInput


@dataclass
class EvalAccumulator:
    class_count: int
    top_k: int
    per_class_hits: np.ndarray = field(init=False)
    per_class_totals: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.class_count < 1 or self.top_k < 1:
            raise InvalidInput("class_count and top_k must be positive")
        self.per_class_hits = np.zeros(self.class_count, dtype=np.int64)
        self.per_class_totals = np.zeros(self.class_count, dtype=np.int64)


def record(acc: EvalAccumulator, predicted, truth) -> EvalAccumulator:
    """Count each ground-truth class once; it hits iff it ranks in the top K."""
    labels = tuple(int(c) for c in truth)
    if not labels:
        raise InvalidInput("ground truth must be nonempty")
    if any(c < 0 or c >= acc.class_count for c in labels):
        raise InvalidInput("ground-truth class out of range")
    k = min(acc.top_k, acc.class_count)
    top = set(int(i) for i in topk_indices(predicted, k))
    for c in labels:
        acc.per_class_totals[c] += 1
        if c in top:
            acc.per_class_hits[c] += 1
    return acc


def class_mean_recall(acc: EvalAccumulator) -> float:
    observed = acc.per_class_totals > 0
    if not np.any(observed):
        raise EmptyEvaluation("no ground-truth classes were observed")
    per_class = acc.per_class_hits[observed] / acc.per_class_totals[observed]
    return float(100.0 * per_class.mean())


def merge(a: EvalAccumulator, b: EvalAccumulator) -> EvalAccumulator:
    if a.class_count != b.class_count or a.top_k != b.top_k:
        raise InvalidInput("accumulators must share class_count and top_k")
    out = EvalAccumulator(a.class_count, a.top_k)
    out.per_class_hits = a.per_class_hits + b.per_class_hits
    out.per_class_totals = a.per_class_totals + b.per_class_totals
    return out


def text_report(acc: EvalAccumulator, setting: str, label_space: str = "actions") -> str:
    """Human-readable summary plus the per-class breakdown."""
    lines = [
        f"setting={setting} label_space={label_space} top_k={acc.top_k}",
        f"events={int(acc.per_class_totals.sum())} classes_observed={int(np.sum(acc.per_class_totals > 0))}",
        f"class_mean_recall={class_mean_recall(acc):.4f}",
        "per-class:",
    ]
    for c in range(acc.class_count):
        total = int(acc.per_class_totals[c])
        if total == 0:
            continue
        hits = int(acc.per_class_hits[c])
        lines.append(f"  class={c} hits={hits} total={total} recall={100.0 * hits / total:.4f}")
    return "\n".join(lines) + "\n"


CSV_HEADER = "row_type,setting,label_space,top_k,class,hits,totals,recall"


def csv_rows(acc: EvalAccumulator, setting: str, label_space: str = "actions") -> list[str]:
    """Summary row followed by per-class rows (observed classes only)."""
    rows = [
        f"summary,{setting},{label_space},{acc.top_k},,,,{class_mean_recall(acc):.4f}"
    ]
    for c in range(acc.class_count):
        total = int(acc.per_class_totals[c])
        if total == 0:
            continue
        hits = int(acc.per_class_hits[c])
        rows.append(
            f"class,{setting},{label_space},{acc.top_k},{c},{hits},{total},{100.0 * hits / total:.4f}"
        )
    return rows


def csv_report(acc: EvalAccumulator, setting: str, label_space: str = "actions") -> str:
    return "\n".join([CSV_HEADER, *csv_rows(acc, setting, label_space)]) + "\n"
