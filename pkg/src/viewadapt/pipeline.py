"""End-to-end streaming adaptation: consume a target stream batch-by-batch, grow
the memory banks, refresh prototypes, take one consistency step per batch, and
fuse the branch logits for evaluation.

Batch boundary semantics: the prototype classifier used for a batch's predictions
is computed after that batch's bank update, and the consistency step precedes the
batch's clue logits. Disabling the prototype branch falls back to the frozen
head's logits (the no-adaptation baseline); disabled clue branches contribute
zero logits. With every branch disabled the run reduces to forward + evaluate and
mutates nothing.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .banks import (
    BankSet,
    assign_pseudo_labels,
    compute_prototypes,
    prototype_logits,
    update_banks,
)
from .clues import ClassFeatureTable, ClueFeatures, adapt_step, clue_logits, fuse_logits
from .container import FeatureRecord
from .core import EngineConfig
from .errors import ConfigError
from .head import AnticipationHead, forward
from .metrics import EvalAccumulator, class_mean_recall, csv_report, record, text_report


@dataclass(frozen=True)
class Toggles:
    """Which branches participate; consistency needs both clue branches."""

    use_prototypes: bool = True
    use_visual_clue: bool = True
    use_textual_clue: bool = True
    use_consistency: bool = True
    multi_label: bool = True

    def __post_init__(self):
        if self.use_consistency and not (self.use_visual_clue and self.use_textual_clue):
            raise ConfigError("use_consistency requires both clue branches enabled")

    @property
    def needs_table(self) -> bool:
        return self.use_visual_clue or self.use_textual_clue


NO_ADAPTATION = Toggles(
    use_prototypes=False,
    use_visual_clue=False,
    use_textual_clue=False,
    use_consistency=False,
    multi_label=True,
)


@dataclass
class RunResult:
    setting: str
    accumulator: EvalAccumulator
    recall: float
    report_text: str
    report_csv: str
    banks: BankSet
    table: ClassFeatureTable | None
    batch_losses: list[float] = field(default_factory=list)


def _batches(records: Sequence[FeatureRecord], size: int):
    for start in range(0, len(records), size):
        yield records[start : start + size]


def adapt_stream(
    head: AnticipationHead,
    table: ClassFeatureTable | None,
    records: Sequence[FeatureRecord],
    eval_labels: Mapping[str, Sequence[int]] | None,
    config: EngineConfig,
    toggles: Toggles = Toggles(),
    top_k: int = 5,
    setting: str = "full",
    label_space: str = "actions",
) -> RunResult:
    """Run the whole target stream in arrival order and evaluate the fused logits.

    The head is never mutated; the table is copied, so the caller's initial table
    survives for reuse across sweep runs.
    """
    if head.class_count != config.class_count:
        raise ConfigError("head class count does not match the configuration")
    if records and records[0].dim != head.input_dim:
        raise ConfigError("record feature dimension does not match the head")
    if toggles.needs_table:
        if table is None:
            raise ConfigError("clue branches need a class feature table")
        if table.class_count != config.class_count:
            raise ConfigError("table class count does not match the configuration")
        if records and table.dim != records[0].dim:
            raise ConfigError("table dimension does not match the record features")
        table = table.copy()
    else:
        table = None

    effective_k = config.k_labels if toggles.multi_label else 1
    banks = BankSet.for_config(config)
    acc = EvalAccumulator(class_count=config.class_count, top_k=top_k)
    batch_losses: list[float] = []
    zeros = np.zeros(config.class_count)

    for batch in _batches(records, config.batch_size):
        forwarded = [forward(head, rec.frame_features.astype(np.float64)) for rec in batch]

        classifier = None
        if toggles.use_prototypes:
            tuples = [
                assign_pseudo_labels(rep, logits, effective_k) for rep, logits in forwarded
            ]
            update_banks(banks, tuples)
            classifier = compute_prototypes(banks, rep_dim=head.internal_dim)

        if toggles.use_consistency:
            clue_batch = [
                ClueFeatures(
                    visual=rec.visual_clue.astype(np.float64),
                    textual=rec.textual_clue.astype(np.float64),
                )
                for rec in batch
            ]
            table, loss = adapt_step(table, clue_batch, config)
            batch_losses.append(loss)

        for rec, (rep, head_logits) in zip(batch, forwarded):
            lp = prototype_logits(classifier, rep) if toggles.use_prototypes else head_logits
            lv = (
                clue_logits(rec.visual_clue.astype(np.float64), table, config.mu1)
                if toggles.use_visual_clue
                else zeros
            )
            lt = (
                clue_logits(rec.textual_clue.astype(np.float64), table, config.mu2)
                if toggles.use_textual_clue
                else zeros
            )
            fused = fuse_logits(lp, lv, lt, config.alpha)
            truth = None
            if eval_labels is not None and rec.sample_id in eval_labels:
                truth = eval_labels[rec.sample_id]
            elif rec.labels is not None:
                truth = rec.labels
            if truth:
                record(acc, fused, truth)

    recall = class_mean_recall(acc)
    return RunResult(
        setting=setting,
        accumulator=acc,
        recall=recall,
        report_text=text_report(acc, setting, label_space),
        report_csv=csv_report(acc, setting, label_space),
        banks=banks,
        table=table,
        batch_losses=batch_losses,
    )


SWEEP_AXES = ("k", "bank_capacity", "alpha", "mu1", "mu2", "fraction")

_AXIS_FIELDS = {
    "k": ("k_labels", int),
    "bank_capacity": ("bank_capacity", int),
    "alpha": ("alpha", float),
    "mu1": ("mu1", float),
    "mu2": ("mu2", float),
}


def sweep_stream(
    head: AnticipationHead,
    table: ClassFeatureTable | None,
    records: Sequence[FeatureRecord],
    eval_labels: Mapping[str, Sequence[int]] | None,
    config: EngineConfig,
    axis: str,
    values: Sequence[float],
    toggles: Toggles = Toggles(),
    top_k: int = 5,
    label_space: str = "actions",
) -> list[tuple[float, RunResult]]:
    """One adapt run per axis value against the shared initial state."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose one of {', '.join(SWEEP_AXES)}")
    if not values:
        raise ConfigError("sweep needs at least one axis value")
    results = []
    for value in values:
        run_config = config
        run_records = records
        if axis == "fraction":
            frac = float(value)
            if not 0.0 < frac <= 1.0:
                raise ConfigError("fraction values must lie in (0, 1]")
            run_records = records[: math.ceil(frac * len(records))]
        else:
            name, cast = _AXIS_FIELDS[axis]
            run_config = dataclasses.replace(config, **{name: cast(value)})
        result = adapt_stream(
            head,
            table,
            run_records,
            eval_labels,
            run_config,
            toggles=toggles,
            top_k=top_k,
            setting=f"{axis}={value:g}",
            label_space=label_space,
        )
        results.append((float(value), result))
    return results


def sweep_table(results: Sequence[tuple[float, RunResult]], axis: str) -> str:
    """Collated one-row-per-run summary, byte-stable."""
    lines = ["axis,value,setting,top_k,recall"]
    for value, result in results:
        lines.append(
            f"{axis},{value:g},{result.setting},{result.accumulator.top_k},{result.recall:.4f}"
        )
    return "\n".join(lines) + "\n"
