"""Standard and soft cross entropy with closed-form logit gradients.

Everything is evaluated in float64. Batch reductions use numpy's pairwise
summation over a fixed row order, so results are bitwise reproducible on a
given machine.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from softvqa.answers import GroundTruth


class LossMode(enum.Enum):
    STANDARD = "standard"
    SOFT = "soft"


@dataclass(frozen=True)
class LossResult:
    loss: float
    gradient: np.ndarray


def _as_logits(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 2:
        raise ValueError(f"logits must be a vector of length >= 2, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("logits must be finite")
    return x


def log_sum_exp(x) -> float:
    x = _as_logits(x)
    m = x.max()
    return float(m + np.log(np.exp(x - m).sum()))


def _softmax(x: np.ndarray) -> np.ndarray:
    e = np.exp(x - x.max())
    return e / e.sum()


def cross_entropy(x, target_class: int) -> LossResult:
    x = _as_logits(x)
    if not 0 <= target_class < x.shape[0]:
        raise IndexError(f"target class {target_class} out of range for {x.shape[0]} classes")
    grad = _softmax(x)
    grad[target_class] -= 1.0
    return LossResult(-x[target_class] + log_sum_exp(x), grad)


def soft_cross_entropy(x, target: GroundTruth) -> LossResult:
    """Weighted sum of cross entropy terms, one per unique ground-truth answer."""
    x = _as_logits(x)
    if target is None or not target.classes:
        raise ValueError("no ground truth")
    if any(not 0 <= c < x.shape[0] for c in target.classes):
        raise IndexError("target class out of range")
    lse = log_sum_exp(x)
    loss = 0.0
    for c, w in zip(target.classes, target.weights):
        loss += w * (-x[c] + lse)
    grad = target.total_weight * _softmax(x)
    for c, w in zip(target.classes, target.weights):
        grad[c] -= w
    return LossResult(float(loss), grad)


def target_matrix(
    targets: Sequence[GroundTruth], num_classes: int, mode: LossMode
) -> np.ndarray:
    """Dense (batch, classes) target weights for the given loss mode."""
    t = np.zeros((len(targets), num_classes))
    for i, gt in enumerate(targets):
        if gt is None:
            raise ValueError(f"example {i}: no ground truth")
        if mode is LossMode.STANDARD:
            t[i, gt.argmax_class] = 1.0
        else:
            t[i, list(gt.classes)] = gt.weights
    return t


def dense_loss(logits: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-row losses and unscaled gradients for dense target weights."""
    m = logits.max(axis=1, keepdims=True)
    shifted = np.exp(logits - m)
    z = shifted.sum(axis=1, keepdims=True)
    lse = m + np.log(z)
    losses = (targets * (lse - logits)).sum(axis=1)
    grad = targets.sum(axis=1, keepdims=True) * (shifted / z) - targets
    return losses, grad


def batch_loss(
    batch_x, batch_targets: Sequence[GroundTruth], mode: LossMode | str
) -> LossResult:
    """Mean loss over the batch; gradient rows are already scaled by 1/batch."""
    mode = LossMode(mode)
    x = np.asarray(batch_x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("batch_x must be a (batch, classes) array")
    if x.shape[0] != len(batch_targets):
        raise ValueError(
            f"length mismatch: {x.shape[0]} logit rows vs {len(batch_targets)} targets"
        )
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    if not np.all(np.isfinite(x)):
        raise ValueError("logits must be finite")
    losses, grad = dense_loss(x, target_matrix(batch_targets, x.shape[1], mode))
    n = x.shape[0]
    return LossResult(float(losses.sum() / n), grad / n)
