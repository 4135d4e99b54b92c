"""Shared numeric primitives: softmax, entropy, top-k ranking, cosine similarity, symmetric KL."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateVector, InvalidInput


@dataclass
class EngineConfig:
    """Engine hyperparameters. Only class_count is problem-specific; the rest default
    to the standard operating point."""

    class_count: int
    k_labels: int = 5
    bank_capacity: int = 500
    mu1: float = 1.0
    mu2: float = 0.5
    alpha: float = 0.5
    batch_size: int = 64
    learning_rate: float = 1e-4
    frames_per_window: int = 5
    tau_obs_s: float = 2.0
    tau_interval_s: float = 1.0
    kl_epsilon: float = 1e-8

    def __post_init__(self) -> None:
        if self.class_count < 1:
            raise ConfigError("class_count must be positive")
        if not 1 <= self.k_labels <= self.class_count:
            raise ConfigError(f"k_labels must be in [1, {self.class_count}], got {self.k_labels}")
        if self.bank_capacity < 1:
            raise ConfigError("bank_capacity must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.frames_per_window < 1:
            raise ConfigError("frames_per_window must be >= 1")
        if self.learning_rate < 0:
            raise ConfigError("learning_rate must be >= 0")
        if self.tau_obs_s <= 0:
            raise ConfigError("tau_obs_s must be > 0")
        if self.tau_interval_s < 0:
            raise ConfigError("tau_interval_s must be >= 0")
        if self.kl_epsilon <= 0:
            raise ConfigError("kl_epsilon must be > 0")


def as_logits(values) -> np.ndarray:
    """Validate and return a finite 1-d float64 score vector."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInput("expected a nonempty 1-d score vector")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("scores must be finite")
    return arr


def as_vector(values, what: str = "vector") -> np.ndarray:
    """Validate and return a finite 1-d float64 feature vector."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInput(f"expected a nonempty 1-d {what}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{what} entries must be finite")
    return arr


def softmax(logits) -> np.ndarray:
    """Softmax over a logit vector. Max-subtracted, so large logits do not overflow."""
    z = as_logits(logits)
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def entropy(logits) -> float:
    """Shannon entropy (natural log) of the softmax distribution of `logits`.

    Bounded by [0, ln(len(logits))]; the limits are the one-hot and uniform cases.
    """
    p = softmax(logits)
    # p can underflow to exactly 0 for strongly dominated classes; lim p->0 of p*ln p is 0.
    plogp = np.where(p > 0.0, p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    return float(-plogp.sum())


def topk_indices(logits, k: int) -> list[int]:
    """Indices of the k largest scores in decreasing score order.

    Ties are broken by ascending index, matching a stable sort on (-score, index).
    """
    z = as_logits(logits)
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise InvalidInput("k must be a positive integer")
    if k > z.size:
        raise InvalidInput(f"k={k} exceeds class count {z.size}")
    order = np.argsort(-z, kind="stable")
    return [int(i) for i in order[:k]]


def cosine_similarity(a, b) -> float:
    """Cosine similarity of two same-dimension vectors, clipped into [-1, 1].

    Raises DegenerateVector on a zero-norm argument; similarity-consuming callers
    substitute 0 for that case.
    """
    u = as_vector(a)
    v = as_vector(b)
    if u.shape != v.shape:
        raise InvalidInput(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise DegenerateVector("cosine similarity of a zero-norm vector is undefined")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def safe_cosine(a, b) -> float:
    """cosine_similarity with the engine convention: zero-norm arguments score 0."""
    try:
        return cosine_similarity(a, b)
    except DegenerateVector:
        return 0.0


def as_probabilities(values) -> np.ndarray:
    """Validate a probability vector: nonnegative entries summing to 1 within 1e-6."""
    p = np.asarray(values, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise InvalidInput("expected a nonempty 1-d probability vector")
    if not np.all(np.isfinite(p)) or np.any(p < 0.0):
        raise InvalidInput("probabilities must be finite and nonnegative")
    total = float(p.sum())
    if abs(total - 1.0) > 1e-6:
        raise InvalidInput(f"probabilities must sum to 1, got {total}")
    return p


def symmetric_kl(p, q, eps: float = 1e-8) -> float:
    """KL(p||q) + KL(q||p) with probabilities floored at `eps` before the logs.

    Evaluated as sum((p - q) * (ln p - ln q)) after flooring, which is exactly
    symmetric in floating point and nonnegative term by term.
    """
    pv = as_probabilities(p)
    qv = as_probabilities(q)
    if pv.shape != qv.shape:
        raise InvalidInput(f"length mismatch: {pv.size} vs {qv.size}")
    if eps <= 0:
        raise InvalidInput("eps must be > 0")
    pc = np.maximum(pv, eps)
    qc = np.maximum(qv, eps)
    return float(np.sum((pc - qc) * (np.log(pc) - np.log(qc))))
