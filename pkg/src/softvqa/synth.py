"""Synthetic questions with controllable annotator disagreement.

Each question gets a latent answer distribution ``p ~ Dirichlet(alpha)``;
ten annotators answer i.i.d. from ``p`` and the feature vector is a fixed
random linear map of ``p`` plus Gaussian noise. Small ``alpha`` gives
near-unanimous annotators, large ``alpha`` near-uniform ones.

Randomness comes from a single ``numpy.random.Generator`` (PCG64) seeded
with ``config.seed``; draws happen in a fixed order: embedding, then the
train split, then the val split.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from softvqa.answers import NUM_ANNOTATORS, AnswerSet, AnswerType, Vocabulary
from softvqa.data import FeatureDataset, Split

FEATURE_NOISE = 0.1
# large enough that a linear model converges within ~30 Adam epochs at lr 1e-3
EMBEDDING_SCALE = 10.0
TYPE_ORDER = (AnswerType.YES_NO, AnswerType.NUMBER, AnswerType.OTHER)


@dataclass(frozen=True)
class SynthConfig:
    num_classes: int = 20
    num_train: int = 5000
    num_val: int = 2000
    feature_dim: int = 32
    dirichlet_alpha: float = 0.5
    annotators: int = NUM_ANNOTATORS
    seed: int = 20170607
    type_fractions: tuple[float, float, float] = (0.38, 0.12, 0.50)

    def __post_init__(self):
        object.__setattr__(self, "type_fractions", tuple(float(x) for x in self.type_fractions))
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        if self.num_train < 1 or self.num_val < 1:
            raise ValueError("num_train and num_val must be >= 1")
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be >= 1")
        if not (self.dirichlet_alpha > 0 and math.isfinite(self.dirichlet_alpha)):
            raise ValueError("dirichlet_alpha must be a positive real")
        if self.annotators != NUM_ANNOTATORS:
            raise ValueError(f"annotators must be {NUM_ANNOTATORS}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        tf = self.type_fractions
        if len(tf) != 3 or any(x < 0 for x in tf) or abs(sum(tf) - 1.0) > 1e-9:
            raise ValueError("type_fractions must be three non-negative reals summing to 1")

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["type_fractions"] = list(self.type_fractions)
        return d

    def vocabulary(self) -> Vocabulary:
        return Vocabulary(tuple(class_name(i) for i in range(self.num_classes)))


def class_name(i: int) -> str:
    return f"c{i}"


def _split(rng, config: SynthConfig, embedding, n: int, first_id: int, split: Split, vocab):
    k = config.num_classes
    probs = rng.dirichlet(np.full(k, config.dirichlet_alpha), size=n)
    cdf = np.cumsum(probs, axis=1)
    u = rng.random((n, NUM_ANNOTATORS))
    # inverse-CDF sampling; clip guards against cdf[-1] rounding below u
    answers = np.minimum((u[:, :, None] >= cdf[:, None, :]).sum(axis=2), k - 1)
    features = probs @ embedding + rng.normal(0.0, FEATURE_NOISE, size=(n, config.feature_dim))
    types = rng.choice(3, size=n, p=config.type_fractions)
    sets = [
        AnswerSet(first_id + i, tuple(class_name(a) for a in row), TYPE_ORDER[t])
        for i, (row, t) in enumerate(zip(answers.tolist(), types.tolist()))
    ]
    return FeatureDataset.build(features, sets, vocab, split), probs


def generate_with_latent(config: SynthConfig):
    """Like :func:`generate` but also returns the latent answer distributions."""
    rng = np.random.default_rng(config.seed)
    vocab = config.vocabulary()
    embedding = EMBEDDING_SCALE * rng.standard_normal((config.num_classes, config.feature_dim))
    train, p_train = _split(rng, config, embedding, config.num_train, 1, Split.TRAIN, vocab)
    val, p_val = _split(
        rng, config, embedding, config.num_val, config.num_train + 1, Split.VALIDATION, vocab
    )
    return train, val, p_train, p_val


def generate(config: SynthConfig) -> tuple[FeatureDataset, FeatureDataset]:
    train, val, _, _ = generate_with_latent(config)
    return train, val
