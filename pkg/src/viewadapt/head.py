"""Anticipation head: mean-pool frame features, project, classify.

The head is the only trained component. It is fit on the labeled source view with
multi-label BCE and kept frozen during adaptation; downstream modules consume only
its representation and logit outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInput


def validate_labels(labels: Iterable[int], class_count: int) -> tuple[int, ...]:
    """Normalize a label set to a sorted tuple of distinct in-range class indices."""
    out = tuple(sorted(set(int(c) for c in labels)))
    if not out:
        raise InvalidInput("label set must be nonempty")
    if out[0] < 0 or out[-1] >= class_count:
        raise InvalidInput(f"label ids must lie in [0, {class_count}), got {out}")
    return out


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softplus(z: np.ndarray) -> np.ndarray:
    # log(1 + e^z) without overflow for large |z|
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


@dataclass
class AnticipationHead:
    """Two-layer linear head: frame mean -> internal representation -> class logits."""

    proj_weights: np.ndarray  # (input_dim, internal_dim)
    proj_bias: np.ndarray     # (internal_dim,)
    cls_weights: np.ndarray   # (internal_dim, class_count)
    cls_bias: np.ndarray      # (class_count,)

    def __post_init__(self) -> None:
        self.proj_weights = np.asarray(self.proj_weights, dtype=np.float64)
        self.proj_bias = np.asarray(self.proj_bias, dtype=np.float64)
        self.cls_weights = np.asarray(self.cls_weights, dtype=np.float64)
        self.cls_bias = np.asarray(self.cls_bias, dtype=np.float64)
        if self.proj_weights.ndim != 2 or self.cls_weights.ndim != 2:
            raise InvalidInput("weight matrices must be 2-d")
        if self.proj_bias.shape != (self.proj_weights.shape[1],):
            raise InvalidInput("proj_bias shape does not match proj_weights")
        if self.cls_weights.shape[0] != self.proj_weights.shape[1]:
            raise InvalidInput("cls_weights rows must equal the internal dimension")
        if self.cls_bias.shape != (self.cls_weights.shape[1],):
            raise InvalidInput("cls_bias shape does not match cls_weights")
        for p in (self.proj_weights, self.proj_bias, self.cls_weights, self.cls_bias):
            if not np.all(np.isfinite(p)):
                raise InvalidInput("head parameters must be finite")

    @property
    def input_dim(self) -> int:
        return self.proj_weights.shape[0]

    @property
    def internal_dim(self) -> int:
        return self.proj_weights.shape[1]

    @property
    def class_count(self) -> int:
        return self.cls_weights.shape[1]

    @classmethod
    def zeros(cls, input_dim: int, internal_dim: int, class_count: int) -> "AnticipationHead":
        return cls(
            np.zeros((input_dim, internal_dim)),
            np.zeros(internal_dim),
            np.zeros((internal_dim, class_count)),
            np.zeros(class_count),
        )

    @classmethod
    def random_init(
        cls, input_dim: int, internal_dim: int, class_count: int, seed: int, scale: float = 0.1
    ) -> "AnticipationHead":
        rng = np.random.default_rng(seed)
        return cls(
            scale * rng.standard_normal((input_dim, internal_dim)),
            np.zeros(internal_dim),
            scale * rng.standard_normal((internal_dim, class_count)),
            np.zeros(class_count),
        )

    def params(self) -> dict[str, np.ndarray]:
        return {
            "proj_weights": self.proj_weights,
            "proj_bias": self.proj_bias,
            "cls_weights": self.cls_weights,
            "cls_bias": self.cls_bias,
        }


def mean_frame_feature(frame_features) -> np.ndarray:
    """Mean over a nonempty, uniform-dimension stack of frame feature vectors."""
    arr = np.asarray(frame_features, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidInput("frame features must be a nonempty (frames, dim) stack")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("frame features must be finite")
    return arr.mean(axis=0)


def forward(head: AnticipationHead, frame_features) -> tuple[np.ndarray, np.ndarray]:
    """Run the head on one observation: returns (video-level representation, logits)."""
    mean = mean_frame_feature(frame_features)
    if mean.shape[0] != head.input_dim:
        raise InvalidInput(f"frame dim {mean.shape[0]} does not match head input dim {head.input_dim}")
    rep = mean @ head.proj_weights + head.proj_bias
    logits = rep @ head.cls_weights + head.cls_bias
    return rep, logits


def bce_loss(logits, labels: Iterable[int], class_count: int | None = None) -> float:
    """Mean-over-classes binary cross-entropy of sigmoid(logits) against a multi-hot target."""
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 1 or z.size == 0 or not np.all(np.isfinite(z)):
        raise InvalidInput("logits must be a finite 1-d vector")
    c = z.size if class_count is None else class_count
    if c != z.size:
        raise InvalidInput("class_count does not match logits length")
    lab = validate_labels(labels, c)
    y = np.zeros(c)
    y[list(lab)] = 1.0
    # per class: softplus(l) - l*y == -[y*log s(l) + (1-y)*log(1-s(l))]
    return float(np.mean(_softplus(z) - z * y))


def _multi_hot(batch_labels: Sequence[tuple[int, ...]], class_count: int) -> np.ndarray:
    y = np.zeros((len(batch_labels), class_count))
    for j, lab in enumerate(batch_labels):
        y[j, list(lab)] = 1.0
    return y


def batch_bce_loss(head: AnticipationHead, mean_feats: np.ndarray, targets: np.ndarray) -> float:
    """Mean over samples and classes of the BCE objective, from precomputed frame means."""
    rep = mean_feats @ head.proj_weights + head.proj_bias
    z = rep @ head.cls_weights + head.cls_bias
    return float(np.mean(_softplus(z) - z * targets))


def bce_gradients(
    head: AnticipationHead, mean_feats: np.ndarray, targets: np.ndarray
) -> dict[str, np.ndarray]:
    """Closed-form gradients of batch_bce_loss with respect to every head parameter.

    The chain is (sigmoid(z) - y), scaled by the class and sample means, pushed
    through the two linear layers.
    """
    n, c = targets.shape
    rep = mean_feats @ head.proj_weights + head.proj_bias
    z = rep @ head.cls_weights + head.cls_bias
    dz = (_sigmoid(z) - targets) / (n * c)
    grad_cls_w = rep.T @ dz
    grad_cls_b = dz.sum(axis=0)
    drep = dz @ head.cls_weights.T
    grad_proj_w = mean_feats.T @ drep
    grad_proj_b = drep.sum(axis=0)
    return {
        "proj_weights": grad_proj_w,
        "proj_bias": grad_proj_b,
        "cls_weights": grad_cls_w,
        "cls_bias": grad_cls_b,
    }


def train_source(head: AnticipationHead, dataset, epochs: int, lr: float) -> AnticipationHead:
    """Full-batch gradient descent on the mean BCE over a labeled source split.

    `dataset` is a sequence of records exposing .frame_features and .labels
    (labels required). The head is updated in place and returned.
    """
    if epochs < 1:
        raise InvalidInput("epochs must be >= 1")
    if lr < 0:
        raise InvalidInput("lr must be >= 0")
    if len(dataset) == 0:
        raise InvalidInput("dataset must be nonempty")
    means = []
    labels = []
    for rec in dataset:
        if rec.labels is None:
            raise InvalidInput(f"record {rec.sample_id!r} carries no labels")
        means.append(mean_frame_feature(rec.frame_features))
        labels.append(validate_labels(rec.labels, head.class_count))
    mean_feats = np.stack(means)
    if mean_feats.shape[1] != head.input_dim:
        raise InvalidInput("dataset feature dim does not match head input dim")
    targets = _multi_hot(labels, head.class_count)

    for _ in range(epochs):
        if lr == 0.0:
            break
        g = bce_gradients(head, mean_feats, targets)
        head.proj_weights -= lr * g["proj_weights"]
        head.proj_bias -= lr * g["proj_bias"]
        head.cls_weights -= lr * g["cls_weights"]
        head.cls_bias -= lr * g["cls_bias"]
    return head
