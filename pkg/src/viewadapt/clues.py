"""Dual-clue consistency: cosine clue logits against a learnable class-feature
table, a symmetric-KL agreement loss between the visual and textual views, and a
closed-form gradient step on the table.

No autodiff anywhere: the gradient composes the KL-through-softmax derivative with
the cosine derivative by hand, which keeps the update dependency-free and cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import EngineConfig, as_vector, safe_cosine, softmax, symmetric_kl
from .errors import InvalidInput


@dataclass
class ClueFeatures:
    """Precomputed visual and textual clue vectors for one sample. Either may be
    all-zero (a degenerate clue contributes nothing)."""

    visual: np.ndarray
    textual: np.ndarray

    def __post_init__(self):
        self.visual = as_vector(self.visual, "visual clue")
        self.textual = as_vector(self.textual, "textual clue")
        if self.visual.shape != self.textual.shape:
            raise InvalidInput("visual and textual clues must share a dimension")


@dataclass
class ClassFeatureTable:
    """Learnable per-class feature rows; row i scores class i via cosine."""

    features: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2:
            raise InvalidInput("class feature table must be 2-d")
        if not np.all(np.isfinite(feats)):
            raise InvalidInput("class feature table must be finite")
        norms = np.linalg.norm(feats, axis=1)
        if np.any(norms == 0.0):
            raise InvalidInput("class feature table rows must be nonzero")
        self.features = feats

    @property
    def class_count(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @classmethod
    def from_embeddings(cls, embeddings) -> "ClassFeatureTable":
        return cls(np.array(embeddings, dtype=np.float64))

    @classmethod
    def random_unit(cls, class_count: int, dim: int, seed: int) -> "ClassFeatureTable":
        rng = np.random.default_rng(seed)
        rows = rng.standard_normal((class_count, dim))
        rows /= np.linalg.norm(rows, axis=1, keepdims=True)
        return cls(rows)

    def copy(self) -> "ClassFeatureTable":
        return ClassFeatureTable(self.features.copy())


def clue_logits(clue, table: ClassFeatureTable, mu: float) -> np.ndarray:
    """Scaled cosine of the clue against every class row. A zero clue or zero row
    scores the neutral 0 for the affected class."""
    c = as_vector(clue, "clue")
    if c.shape[0] != table.dim:
        raise InvalidInput("clue dimension does not match the class feature table")
    out = np.empty(table.class_count)
    for i in range(table.class_count):
        out[i] = mu * safe_cosine(c, table.features[i])
    return out


def consistency_loss(lv, lt, eps: float = 1e-8) -> float:
    """Symmetric KL divergence between the two clue predictive distributions."""
    zv = as_vector(lv, "visual logits")
    zt = as_vector(lt, "textual logits")
    if zv.shape != zt.shape:
        raise InvalidInput("logit vectors must share a length")
    return symmetric_kl(softmax(zv), softmax(zt), eps=eps)


def _log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - np.max(z)
    return shifted - np.log(np.sum(np.exp(shifted)))


def _consistency_logit_grads(lv: np.ndarray, lt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # d(symmetric KL)/d logits for both branches, derived through softmax:
    #   dL/dlv_a = P_a[(ln P_a - ln Q_a) - KL(P||Q)] + (P_a - Q_a)
    # and the mirror image for lt.
    logp = _log_softmax(lv)
    logq = _log_softmax(lt)
    p = np.exp(logp)
    q = np.exp(logq)
    diff = logp - logq
    kl_pq = float(np.sum(p * diff))
    kl_qp = float(np.sum(q * -diff))
    grad_lv = p * (diff - kl_pq) + (p - q)
    grad_lt = q * (-diff - kl_qp) + (q - p)
    return grad_lv, grad_lt


def _cosine_grad_wrt_row(clue: np.ndarray, row: np.ndarray) -> np.ndarray:
    # d cos(u, w)/dw = u/(|u||w|) - cos(u, w) * w/|w|^2
    nu = np.linalg.norm(clue)
    nw = np.linalg.norm(row)
    if nu == 0.0 or nw == 0.0:
        return np.zeros_like(row)
    cos = float(np.dot(clue, row) / (nu * nw))
    return clue / (nu * nw) - cos * row / (nw * nw)


def consistency_gradient(clues: ClueFeatures, table: ClassFeatureTable, config: EngineConfig) -> np.ndarray:
    """Exact gradient of the consistency loss with respect to every table entry."""
    lv = clue_logits(clues.visual, table, config.mu1)
    lt = clue_logits(clues.textual, table, config.mu2)
    grad_lv, grad_lt = _consistency_logit_grads(lv, lt)
    grad = np.zeros_like(table.features)
    for i in range(table.class_count):
        row = table.features[i]
        grad[i] = grad_lv[i] * config.mu1 * _cosine_grad_wrt_row(clues.visual, row)
        grad[i] += grad_lt[i] * config.mu2 * _cosine_grad_wrt_row(clues.textual, row)
    return grad


def adapt_step(
    table: ClassFeatureTable, clue_batch: Sequence[ClueFeatures], config: EngineConfig
) -> tuple[ClassFeatureTable, float]:
    """One gradient-descent step on the table over a batch of clue pairs.

    Returns the table (mutated in place) and the pre-step batch-mean loss. With a
    zero learning rate the table is left bitwise untouched.
    """
    if not clue_batch:
        raise InvalidInput("adapt_step needs at least one clue pair")
    total_loss = 0.0
    total_grad = np.zeros_like(table.features)
    for clues in clue_batch:
        lv = clue_logits(clues.visual, table, config.mu1)
        lt = clue_logits(clues.textual, table, config.mu2)
        total_loss += consistency_loss(lv, lt, eps=config.kl_epsilon)
        total_grad += consistency_gradient(clues, table, config)
    mean_loss = total_loss / len(clue_batch)
    if config.learning_rate != 0.0:
        table.features = table.features - config.learning_rate * (total_grad / len(clue_batch))
    return table, mean_loss


def fuse_logits(lp, lv, lt, alpha: float) -> np.ndarray:
    """Final score: prototype logits plus alpha times the summed clue logits."""
    zp = as_vector(lp, "prototype logits")
    zv = as_vector(lv, "visual logits")
    zt = as_vector(lt, "textual logits")
    if not (zp.shape == zv.shape == zt.shape):
        raise InvalidInput("fused logit vectors must share a length")
    return zp + alpha * (zv + zt)
