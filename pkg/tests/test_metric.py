import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from softvqa.answers import AnswerType
from softvqa.metric import (
    AccuracyReport,
    accuracy_numerator,
    bruteforce_fraction,
    evaluate,
    match_count,
    question_accuracy_bruteforce,
    question_accuracy_closed,
)

from conftest import answer_set

EXPECTED = [0, 0.3, 0.6, 0.9, 1, 1, 1, 1, 1, 1, 1]


def with_matches(n, qid=1, atype=AnswerType.OTHER):
    return answer_set(["cat"] * n + [f"other{i}" for i in range(10 - n)], qid, atype)


@pytest.mark.parametrize("n", range(11))
def test_accuracy_by_match_count(n):
    s = with_matches(n)
    assert question_accuracy_bruteforce("cat", s) == EXPECTED[n]
    assert question_accuracy_closed("cat", s) == EXPECTED[n]
    assert accuracy_numerator(n) * Fraction(1, 30) == bruteforce_fraction("cat", s)


def test_three_annotator_rule():
    for n in range(11):
        acc = question_accuracy_closed("cat", with_matches(n))
        if n >= 3:
            assert acc >= 0.9
        if n >= 4:
            assert acc == 1.0


@given(st.lists(st.sampled_from(["a", "b", "c", "A", "b."]), min_size=10, max_size=10),
       st.sampled_from(["a", "b", "c", "d"]))
def test_closed_form_equals_brute_force(answers, predicted):
    s = answer_set(answers)
    assert question_accuracy_closed(predicted, s) == question_accuracy_bruteforce(predicted, s)


@given(st.lists(st.sampled_from(["a", "b", "c"]), min_size=10, max_size=10), st.randoms())
def test_permutation_invariance(answers, rnd):
    shuffled = list(answers)
    rnd.shuffle(shuffled)
    assert question_accuracy_bruteforce("a", answer_set(answers)) == question_accuracy_bruteforce(
        "a", answer_set(shuffled)
    )


def test_matching_uses_normalized_answers():
    s = answer_set(["Yes."] * 3 + ["no"] * 7)
    assert match_count("yes", s) == 3


def test_evaluate_single_question():
    r = evaluate({1: "yes"}, [answer_set(["yes"] * 10, 1, AnswerType.YES_NO)])
    assert r.overall == 1.0 and r.yes_no == 1.0
    assert r.number == 0.0 and r.other == 0.0
    assert r.counts == {"yes_no": 1, "number": 0, "other": 0}


def test_evaluate_mean_over_types():
    ds = [with_matches(3, 1, AnswerType.NUMBER), with_matches(1, 2, AnswerType.OTHER)]
    r = evaluate({1: "cat", 2: "Cat"}, ds)
    assert r.overall == pytest.approx(0.6, abs=1e-15)
    assert r.number == pytest.approx(0.9) and r.other == pytest.approx(0.3)


def test_evaluate_missing_and_duplicates():
    ds = [with_matches(3, 1), with_matches(3, 7)]
    with pytest.raises(KeyError, match="7"):
        evaluate({1: "cat"}, ds)
    with pytest.raises(ValueError, match="duplicate"):
        evaluate([(1, "cat"), (1, "dog"), (7, "cat")], ds)


def test_evaluate_random_dataset_against_brute_force():
    rnd = random.Random(7)
    words = ["yes", "no", "2", "3", "red"]
    types = list(AnswerType)
    ds = [answer_set([rnd.choice(words) for _ in range(10)], i, rnd.choice(types)) for i in range(200)]
    preds = {i: rnd.choice(words) for i in range(200)}
    r = evaluate(preds, ds)
    brute = [question_accuracy_bruteforce(preds[s.question_id], s) for s in ds]
    assert r.overall == pytest.approx(sum(brute) / 200, abs=1e-12)
    weighted = sum(getattr(r, t.name.lower()) * r.counts[t.name.lower()] for t in types) / 200
    assert r.overall == pytest.approx(weighted, abs=1e-12)
    for t in types:
        vals = [b for b, s in zip(brute, ds) if s.answer_type is t]
        assert getattr(r, t.name.lower()) == pytest.approx(sum(vals) / len(vals), abs=1e-12)


def test_report_round_trip():
    r = AccuracyReport(0.5, 0.25, 0.75, 0.5, {"yes_no": 1, "number": 1, "other": 2})
    assert AccuracyReport.from_dict(r.to_dict()) == r
