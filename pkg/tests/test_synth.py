import numpy as np
import pytest

from softvqa.answers import AnswerType
from softvqa.synth import SynthConfig, generate, generate_with_latent

SMALL = dict(num_classes=10, num_train=400, num_val=200, feature_dim=8, seed=3)


def test_config_validation():
    with pytest.raises(ValueError):
        SynthConfig(num_classes=1)
    with pytest.raises(ValueError):
        SynthConfig(dirichlet_alpha=0)
    with pytest.raises(ValueError):
        SynthConfig(annotators=9)
    with pytest.raises(ValueError):
        SynthConfig(type_fractions=(0.5, 0.5, 0.5))
    with pytest.raises(ValueError, match="unknown"):
        SynthConfig.from_dict({"classes": 3})
    c = SynthConfig(**SMALL)
    assert SynthConfig.from_dict(c.to_dict()) == c


def test_generated_shapes_and_targets():
    cfg = SynthConfig(**SMALL)
    train, val = generate(cfg)
    assert len(train) == 400 and len(val) == 200
    assert train.feature_dim == 8
    ids = [s.question_id for s in train.answer_sets + val.answer_sets]
    assert len(set(ids)) == len(ids)
    for gt in train.ground_truths + val.ground_truths:
        assert abs(gt.total_weight - 1.0) < 1e-12
    assert all(len(s.answers) == 10 for s in train.answer_sets)
    assert all(a in cfg.vocabulary() for s in val.answer_sets for a in s.answers)


def test_same_seed_bitwise_identical():
    a_tr, a_va = generate(SynthConfig(**SMALL))
    b_tr, b_va = generate(SynthConfig(**SMALL))
    assert a_tr.features.tobytes() == b_tr.features.tobytes()
    assert a_va.answer_sets == b_va.answer_sets
    c_tr, _ = generate(SynthConfig(**{**SMALL, "seed": 4}))
    assert c_tr.features.tobytes() != a_tr.features.tobytes()


def test_small_alpha_is_nearly_unanimous():
    train, _ = generate(SynthConfig(**{**SMALL, "num_train": 2000, "dirichlet_alpha": 1e-3}))
    unanimous = np.mean([len(gt.classes) == 1 for gt in train.ground_truths])
    assert unanimous >= 0.95


def test_large_alpha_matches_uniform_multinomial():
    cfg = SynthConfig(**{**SMALL, "num_train": 3000, "dirichlet_alpha": 1e6})
    train, _ = generate(cfg)
    max_counts = np.array([round(max(gt.weights) * 10) for gt in train.ground_truths])
    rng = np.random.default_rng(0)
    uniform = rng.multinomial(10, np.full(10, 0.1), size=20000).max(axis=1)
    assert abs(max_counts.mean() - uniform.mean()) < 0.1


def test_features_encode_latent_distribution():
    cfg = SynthConfig(**{**SMALL, "num_train": 2000})
    train, _, p, _ = generate_with_latent(cfg)
    # least squares from features back to p should be near-exact
    x = np.hstack([train.features, np.ones((len(train), 1))])
    coef, *_ = np.linalg.lstsq(x, p, rcond=None)
    assert np.abs(x @ coef - p).mean() < 0.05


def test_type_fractions():
    cfg = SynthConfig(**{**SMALL, "num_train": 4000, "type_fractions": (0.2, 0.0, 0.8)})
    train, _ = generate(cfg)
    types = [s.answer_type for s in train.answer_sets]
    assert AnswerType.NUMBER not in types
    assert abs(types.count(AnswerType.YES_NO) / 4000 - 0.2) < 0.03
