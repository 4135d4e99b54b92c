"""viewadapt: streaming test-time adaptation of a frozen action-anticipation head
to a feature stream recorded from a different camera view.

The engine consumes precomputed per-frame features. It grows entropy-bounded
per-class memory banks from multi-label pseudo labels, classifies with
confidence-weighted prototypes, and nudges a learnable class-feature table toward
agreement between each sample's visual and textual clues.
"""

from .banks import (
    BankSet,
    DataTuple,
    MemoryBank,
    PrototypeClassifier,
    assign_pseudo_labels,
    compute_prototypes,
    confidence_weights,
    export_bank_snapshot,
    prototype_logits,
    update_banks,
)
from .clues import (
    ClassFeatureTable,
    ClueFeatures,
    adapt_step,
    clue_logits,
    consistency_gradient,
    consistency_loss,
    fuse_logits,
)
from .container import (
    FeatureRecord,
    View,
    read_params,
    read_records,
    read_records_jsonl,
    write_params,
    write_records,
    write_records_jsonl,
)
from .core import (
    EngineConfig,
    cosine_similarity,
    entropy,
    safe_cosine,
    softmax,
    symmetric_kl,
    topk_indices,
)
from .errors import (
    ConfigError,
    DegenerateVector,
    EmptyEvaluation,
    FormatError,
    InvalidInput,
    ViewAdaptError,
    WindowOutOfRange,
)
from .head import AnticipationHead, bce_loss, forward, mean_frame_feature, train_source
from .metrics import EvalAccumulator, class_mean_recall, csv_report, merge, record, text_report
from .pipeline import NO_ADAPTATION, RunResult, Toggles, adapt_stream, sweep_stream, sweep_table
from .synthetic import SyntheticSpec, class_directions, generate_synthetic, view_rotation
from .windows import TimedFrameSequence, extract_window, window_frame_indices

__version__ = "0.1.0"

__all__ = [
    "AnticipationHead",
    "BankSet",
    "ClassFeatureTable",
    "ClueFeatures",
    "ConfigError",
    "DataTuple",
    "DegenerateVector",
    "EmptyEvaluation",
    "EngineConfig",
    "EvalAccumulator",
    "FeatureRecord",
    "FormatError",
    "InvalidInput",
    "MemoryBank",
    "NO_ADAPTATION",
    "PrototypeClassifier",
    "RunResult",
    "SyntheticSpec",
    "TimedFrameSequence",
    "Toggles",
    "View",
    "ViewAdaptError",
    "WindowOutOfRange",
    "adapt_step",
    "adapt_stream",
    "assign_pseudo_labels",
    "bce_loss",
    "class_directions",
    "class_mean_recall",
    "clue_logits",
    "compute_prototypes",
    "confidence_weights",
    "consistency_gradient",
    "consistency_loss",
    "cosine_similarity",
    "csv_report",
    "entropy",
    "export_bank_snapshot",
    "extract_window",
    "forward",
    "fuse_logits",
    "generate_synthetic",
    "mean_frame_feature",
    "merge",
    "prototype_logits",
    "read_params",
    "read_records",
    "read_records_jsonl",
    "record",
    "safe_cosine",
    "softmax",
    "sweep_stream",
    "sweep_table",
    "symmetric_kl",
    "text_report",
    "topk_indices",
    "train_source",
    "update_banks",
    "view_rotation",
    "window_frame_indices",
    "write_params",
    "write_records",
    "write_records_jsonl",
]
