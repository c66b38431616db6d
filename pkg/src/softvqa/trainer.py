"""Linear / one-hidden-layer softmax classifiers trained with Adam.

Backpropagation is written out by hand on top of the closed-form logit
gradients from :mod:`softvqa.losses`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from softvqa.answers import Vocabulary
from softvqa.data import CurvePoint, FeatureDataset
from softvqa.losses import LossMode, dense_loss
from softvqa.metric import AccuracyReport, evaluate

log = logging.getLogger(__name__)

__all__ = [
    "AdamState",
    "CurvePoint",
    "ModelConfig",
    "ModelParams",
    "NumericalError",
    "TrainConfig",
    "TrainRun",
    "adam_step",
    "backward",
    "best_accuracy",
    "discrepancy_epochs",
    "fit",
    "forward",
    "init_params",
    "predict",
    "train",
    "with_mode",
]


class NumericalError(RuntimeError):
    """Raised when a loss or parameter becomes non-finite."""


@dataclass(frozen=True)
class ModelConfig:
    arch: str = "linear"
    hidden_dim: int = 64

    def __post_init__(self):
        if self.arch not in ("linear", "mlp"):
            raise ValueError(f"arch must be 'linear' or 'mlp', got {self.arch!r}")
        if self.arch == "mlp" and self.hidden_dim < 1:
            raise ValueError("hidden_dim must be >= 1")


@dataclass(frozen=True)
class TrainConfig:
    loss_mode: LossMode = LossMode.SOFT
    batch_size: int = 64
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    epochs: int = 30
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "loss_mode", LossMode(self.loss_mode))
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.learning_rate > 0 or not self.adam_eps > 0:
            raise ValueError("learning_rate and adam_eps must be positive")
        if not (0 < self.adam_beta1 < 1 and 0 < self.adam_beta2 < 1):
            raise ValueError("adam betas must lie in (0, 1)")
        if self.epochs < 0 or self.seed < 0:
            raise ValueError("epochs and seed must be non-negative")


@dataclass
class ModelParams:
    """Weights are stored (out, in) so that a layer computes ``W @ f + b``."""

    arch: str
    tensors: dict[str, np.ndarray]

    @property
    def num_classes(self) -> int:
        return self.tensors["W_out"].shape[0]

    @property
    def feature_dim(self) -> int:
        key = "W_hidden" if self.arch == "mlp" else "W_out"
        return self.tensors[key].shape[1]

    def copy(self) -> "ModelParams":
        return ModelParams(self.arch, {k: v.copy() for k, v in self.tensors.items()})

    def check_finite(self) -> None:
        for k, v in self.tensors.items():
            if not np.all(np.isfinite(v)):
                raise NumericalError(f"parameter {k} became non-finite")


def init_params(
    model: ModelConfig, feature_dim: int, num_classes: int, rng: np.random.Generator
) -> ModelParams:
    """Uniform init in +-1/sqrt(fan_in) for weights and biases."""

    def layer(fan_out, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        b = rng.uniform(-bound, bound, size=fan_out)
        return w, b

    if model.arch == "linear":
        w, b = layer(num_classes, feature_dim)
        return ModelParams("linear", {"W_out": w, "b_out": b})
    w1, b1 = layer(model.hidden_dim, feature_dim)
    w2, b2 = layer(num_classes, model.hidden_dim)
    return ModelParams("mlp", {"W_hidden": w1, "b_hidden": b1, "W_out": w2, "b_out": b2})


def _check_features(params: ModelParams, f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if f.ndim not in (1, 2) or f.shape[-1] != params.feature_dim:
        raise ValueError(
            f"expected feature dimension {params.feature_dim}, got shape {f.shape}"
        )
    return f


def _hidden(params: ModelParams, f: np.ndarray) -> np.ndarray:
    t = params.tensors
    return f @ t["W_hidden"].T + t["b_hidden"]


def forward(params: ModelParams, features) -> np.ndarray:
    """Logits for one feature vector or a (batch, features) matrix."""
    f = _check_features(params, features)
    t = params.tensors
    h = f if params.arch == "linear" else np.maximum(_hidden(params, f), 0.0)
    return h @ t["W_out"].T + t["b_out"]


def backward(params: ModelParams, features, grad_logits) -> dict[str, np.ndarray]:
    """Parameter gradients given dL/dlogits; batch rows are summed."""
    f = _check_features(params, features)
    g = np.asarray(grad_logits, dtype=np.float64)
    if g.shape != f.shape[:-1] + (params.num_classes,):
        raise ValueError(f"logit gradient shape {g.shape} does not match features {f.shape}")
    f2, g2 = np.atleast_2d(f), np.atleast_2d(g)
    t = params.tensors
    if params.arch == "linear":
        return {"W_out": g2.T @ f2, "b_out": g2.sum(axis=0)}
    pre = _hidden(params, f2)
    h = np.maximum(pre, 0.0)
    gh = (g2 @ t["W_out"]) * (pre > 0)
    return {
        "W_hidden": gh.T @ f2,
        "b_hidden": gh.sum(axis=0),
        "W_out": g2.T @ h,
        "b_out": g2.sum(axis=0),
    }


@dataclass
class AdamState:
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    state: AdamState, params: ModelParams, grads: dict[str, np.ndarray], config: TrainConfig
) -> tuple[AdamState, ModelParams]:
    """One bias-corrected Adam update. Inputs are left untouched."""
    t = state.step + 1
    b1, b2 = config.adam_beta1, config.adam_beta2
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t
    m, v, new = {}, {}, {}
    for k, p in params.tensors.items():
        g = grads[k]
        m[k] = b1 * state.m.get(k, 0.0) + (1.0 - b1) * g
        v[k] = b2 * state.v.get(k, 0.0) + (1.0 - b2) * (g * g)
        m_hat = m[k] / bc1
        v_hat = v[k] / bc2
        new[k] = p - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps)
    return AdamState(t, m, v), ModelParams(params.arch, new)


def predict(params: ModelParams, dataset: FeatureDataset, vocab: Vocabulary) -> dict[int, str]:
    """Argmax answer per question; ties go to the lowest class index."""
    idx = np.argmax(forward(params, dataset.features), axis=1)
    return {s.question_id: vocab.entries[i] for s, i in zip(dataset.answer_sets, idx.tolist())}


def _mean_loss(params, features, targets) -> float:
    if features.shape[0] == 0:
        return float("nan")
    losses, _ = dense_loss(forward(params, features), targets)
    return float(losses.mean())


@dataclass
class TrainRun:
    curve: list[CurvePoint]
    params: ModelParams
    val_predictions: dict[int, str]


def fit(
    train_set: FeatureDataset,
    val_set: FeatureDataset,
    vocab: Vocabulary,
    model_config: ModelConfig,
    train_config: TrainConfig,
    on_epoch: Callable[[CurvePoint], None] | None = None,
) -> TrainRun:
    """Train and return the curve, final parameters and final val predictions.

    A single seeded generator drives initialization and then one permutation
    per epoch; the loss mode never touches it, so both modes see identical
    batch orders.
    """
    if len(train_set.trainable) == 0:
        raise ValueError("training set has no answerable questions")
    if train_set.feature_dim != val_set.feature_dim:
        raise ValueError("train and val feature dimensions differ")
    k = len(vocab)
    mode = train_config.loss_mode
    rng = np.random.default_rng(train_config.seed)
    params = init_params(model_config, train_set.feature_dim, k, rng)
    state = AdamState()

    x_train = train_set.features[train_set.trainable]
    t_train = train_set.targets(k, mode)
    x_val = val_set.features[val_set.trainable]
    t_val = val_set.targets(k, mode)
    n = x_train.shape[0]
    bs = train_config.batch_size

    curve: list[CurvePoint] = []
    for epoch in range(1, train_config.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, bs):
            idx = order[start : start + bs]
            xb = x_train[idx]
            losses, grad = dense_loss(forward(params, xb), t_train[idx])
            if not np.all(np.isfinite(losses)):
                raise NumericalError(f"non-finite loss at epoch {epoch}, batch offset {start}")
            grads = backward(params, xb, grad / len(idx))
            state, params = adam_step(state, params, grads, train_config)
            params.check_finite()

        report = evaluate(predict(params, val_set, vocab), val_set.answer_sets)
        point = CurvePoint(
            epoch,
            _mean_loss(params, x_train, t_train),
            _mean_loss(params, x_val, t_val),
            report,
        )
        if not np.isfinite(point.train_loss):
            raise NumericalError(f"non-finite training loss at epoch {epoch}")
        log.debug(
            "epoch %d train_loss=%.6f val_loss=%.6f val_acc=%.4f",
            epoch, point.train_loss, point.val_loss, report.overall,
        )
        curve.append(point)
        if on_epoch is not None:
            on_epoch(point)
    return TrainRun(curve, params, predict(params, val_set, vocab))


def train(
    train_set: FeatureDataset,
    val_set: FeatureDataset,
    vocab: Vocabulary,
    model_config: ModelConfig,
    train_config: TrainConfig,
) -> list[CurvePoint]:
    return fit(train_set, val_set, vocab, model_config, train_config).curve


def discrepancy_epochs(curve: Sequence[CurvePoint]) -> list[int]:
    """Epochs where validation loss and validation accuracy both went up."""
    return [
        cur.epoch
        for prev, cur in zip(curve, curve[1:])
        if cur.val_loss > prev.val_loss and cur.val_accuracy.overall > prev.val_accuracy.overall
    ]


def best_accuracy(curve: Sequence[CurvePoint]) -> AccuracyReport:
    """The report from the epoch with the highest overall val accuracy (earliest on ties)."""
    if not curve:
        raise ValueError("empty curve")
    return max(curve, key=lambda p: p.val_accuracy.overall).val_accuracy


def with_mode(config: TrainConfig, mode: LossMode | str, seed: int | None = None) -> TrainConfig:
    return replace(config, loss_mode=LossMode(mode), seed=config.seed if seed is None else seed)
