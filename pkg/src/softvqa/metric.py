"""Consensus VQA accuracy.

A prediction scores ``min(matches / 3, 1)`` against each of the ten
leave-one-out subsets of the annotator answers, averaged over subsets.
All scores are rationals with denominator 30.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from softvqa.answers import NUM_ANNOTATORS, AnswerSet, AnswerType, normalize_answer

DENOMINATOR = 30


def match_count(predicted: str, answer_set: AnswerSet) -> int:
    return sum(a == predicted for a in answer_set.normalized())


def bruteforce_fraction(predicted: str, answer_set: AnswerSet) -> Fraction:
    answers = answer_set.normalized()
    total = Fraction(0)
    for k in range(NUM_ANNOTATORS):
        matches = sum(answers[j] == predicted for j in range(NUM_ANNOTATORS) if j != k)
        total += min(Fraction(matches, 3), Fraction(1))
    return total / NUM_ANNOTATORS


def question_accuracy_bruteforce(predicted: str, answer_set: AnswerSet) -> float:
    """Enumerate all ten leave-one-out subsets explicitly."""
    return float(bruteforce_fraction(predicted, answer_set))


def accuracy_numerator(n: int) -> int:
    """Score times 30 for a prediction matching ``n`` of the ten answers."""
    if not 0 <= n <= NUM_ANNOTATORS:
        raise ValueError(f"match count must lie in [0, 10], got {n}")
    return n * min(n - 1, 3) + (NUM_ANNOTATORS - n) * min(n, 3)


def accuracy_from_count(n: int) -> float:
    return accuracy_numerator(n) / DENOMINATOR


def question_accuracy_closed(predicted: str, answer_set: AnswerSet) -> float:
    return accuracy_from_count(match_count(predicted, answer_set))


@dataclass(frozen=True)
class AccuracyReport:
    overall: float
    yes_no: float
    number: float
    other: float
    counts: dict[str, int] = field(default_factory=dict)

    def by_type(self) -> dict[AnswerType, float]:
        return {
            AnswerType.YES_NO: self.yes_no,
            AnswerType.NUMBER: self.number,
            AnswerType.OTHER: self.other,
        }

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "yes_no": self.yes_no,
            "number": self.number,
            "other": self.other,
            "counts": dict(self.counts),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "AccuracyReport":
        return cls(
            overall=float(d["overall"]),
            yes_no=float(d["yes_no"]),
            number=float(d["number"]),
            other=float(d["other"]),
            counts={k: int(v) for k, v in d["counts"].items()},
        )


def _prediction_map(predictions) -> dict[int, str]:
    if isinstance(predictions, Mapping):
        return dict(predictions)
    out: dict[int, str] = {}
    for qid, answer in predictions:
        if qid in out:
            raise ValueError(f"duplicate question_id {qid} in predictions")
        out[qid] = answer
    return out


def evaluate(
    predictions: Mapping[int, str] | Iterable[tuple[int, str]],
    dataset: Sequence[AnswerSet],
) -> AccuracyReport:
    """Score predictions against a dataset, overall and per answer type.

    ``predictions`` may be a mapping or an iterable of ``(question_id, answer)``
    pairs; a repeated id in the latter is an error. Empty answer-type buckets
    report 0.0 with count 0.
    """
    preds = _prediction_map(predictions)
    ids = [s.question_id for s in dataset]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate question_id in dataset")
    missing = [qid for qid in ids if qid not in preds]
    if missing:
        shown = ", ".join(str(q) for q in missing[:20])
        more = f" (+{len(missing) - 20} more)" if len(missing) > 20 else ""
        raise KeyError(f"missing predictions for question ids: {shown}{more}")

    numerators = {t: 0 for t in AnswerType}
    counts = {t: 0 for t in AnswerType}
    for s in dataset:
        n = match_count(normalize_answer(preds[s.question_id]), s)
        numerators[s.answer_type] += accuracy_numerator(n)
        counts[s.answer_type] += 1

    def mean(num: int, cnt: int) -> float:
        return num / (DENOMINATOR * cnt) if cnt else 0.0

    total = sum(counts.values())
    return AccuracyReport(
        overall=mean(sum(numerators.values()), total),
        yes_no=mean(numerators[AnswerType.YES_NO], counts[AnswerType.YES_NO]),
        number=mean(numerators[AnswerType.NUMBER], counts[AnswerType.NUMBER]),
        other=mean(numerators[AnswerType.OTHER], counts[AnswerType.OTHER]),
        counts={t.name.lower(): counts[t] for t in AnswerType},
    )
