import numpy as np
import pytest

from softvqa.answers import AnswerSet, AnswerType, GroundTruth


def central_diff(f, x, h=1e-5):
    """Central finite-difference gradient of scalar ``f`` at array ``x``."""
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + h
        fp = f(x)
        x[i] = old - h
        fm = f(x)
        x[i] = old
        g[i] = (fp - fm) / (2 * h)
    return g


NEAR_ZERO = 1e-3


def grad_errors(analytic, numeric, near_zero=NEAR_ZERO):
    """Max relative error over components of magnitude >= ``near_zero``,
    and max absolute error over the remaining ones."""
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    err = np.abs(analytic - numeric)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    big = scale >= near_zero
    rel = float((err[big] / scale[big]).max()) if big.any() else 0.0
    small = float(err[~big].max()) if (~big).any() else 0.0
    return rel, small


def assert_grad_close(analytic, numeric, rtol, atol=1e-8):
    rel, small = grad_errors(analytic, numeric)
    assert rel <= rtol and small <= atol, (rel, small, analytic, numeric)


def random_ground_truth(rng, num_classes, full=True):
    """Counts of ten annotators spread over random classes."""
    votes = rng.integers(0, num_classes, size=10)
    classes, counts = np.unique(votes, return_counts=True)
    if not full and len(classes) > 1:
        # drop one class as if it were out of vocabulary
        classes, counts = classes[1:], counts[1:]
    order = sorted(range(len(classes)), key=lambda i: (-counts[i], classes[i]))
    return GroundTruth(
        tuple(int(classes[i]) for i in order),
        tuple(counts[i] / 10 for i in order),
        int(classes[order[0]]),
    )


def answer_set(answers, qid=1, atype=AnswerType.OTHER):
    return AnswerSet(qid, tuple(answers), atype)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
