"""Answer normalization, vocabularies and weighted ground-truth targets."""

from __future__ import annotations

import enum
import functools
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

NUM_ANNOTATORS = 10

_PUNCT = str.maketrans("", "", ".,?!'\"")
_WS = re.compile(r"\s+")


class AnswerType(enum.Enum):
    YES_NO = "yes/no"
    NUMBER = "number"
    OTHER = "other"

    @classmethod
    def parse(cls, value: str) -> "AnswerType":
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown answer_type {value!r}") from None


@dataclass(frozen=True)
class AnswerSet:
    """The ten raw annotator answers attached to one question."""

    question_id: int
    answers: tuple[str, ...]
    answer_type: AnswerType = AnswerType.OTHER

    def __post_init__(self):
        object.__setattr__(self, "answers", tuple(self.answers))
        if len(self.answers) != NUM_ANNOTATORS:
            raise ValueError(
                f"question {self.question_id}: expected {NUM_ANNOTATORS} answers, "
                f"got {len(self.answers)}"
            )
        if self.question_id < 0:
            raise ValueError(f"question_id must be non-negative, got {self.question_id}")

    def normalized(self) -> tuple[str, ...]:
        return tuple(normalize_answer(a) for a in self.answers)


@functools.lru_cache(maxsize=1 << 16)
def normalize_answer(raw: str) -> str:
    """Lowercase, drop ``.,?!'"`` and collapse whitespace."""
    return _WS.sub(" ", raw.lower().translate(_PUNCT)).strip()


@dataclass(frozen=True)
class Vocabulary:
    entries: tuple[str, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        if len(entries) < 2:
            raise ValueError("degenerate vocabulary")
        index = {s: i for i, s in enumerate(entries)}
        if len(index) != len(entries):
            raise ValueError("vocabulary entries must be distinct")
        object.__setattr__(self, "index", index)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, answer: str) -> bool:
        return answer in self.index


def build_vocabulary(answer_sets: Iterable[AnswerSet], top_k: int) -> Vocabulary:
    """Keep the ``top_k`` most frequent normalized answers.

    Ties in frequency are broken lexicographically, which makes the result
    independent of the order of ``answer_sets``.
    """
    if top_k < 2:
        raise ValueError("top_k must be at least 2")
    counts: Counter[str] = Counter()
    seen = False
    for s in answer_sets:
        seen = True
        counts.update(s.normalized())
    if not seen:
        raise ValueError("answer_sets is empty")
    if len(counts) < 2:
        raise ValueError("degenerate vocabulary")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocabulary(tuple(a for a, _ in ranked[:top_k]))


class UnanswerableError(ValueError):
    pass


@dataclass(frozen=True)
class GroundTruth:
    """Unique in-vocabulary answers with weights count/10.

    Weights are not renormalized, so out-of-vocabulary answers leave
    ``sum(weights) < 1``.
    """

    classes: tuple[int, ...]
    weights: tuple[float, ...]
    argmax_class: int

    def __post_init__(self):
        if not self.classes:
            raise ValueError("no ground truth")
        if len(self.classes) != len(self.weights):
            raise ValueError("classes and weights differ in length")
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("classes must be distinct")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")
        if self.argmax_class not in self.classes:
            raise ValueError("argmax_class must be one of classes")

    @property
    def total_weight(self) -> float:
        return sum(self.weights)


def to_ground_truth(answer_set: AnswerSet, vocab: Vocabulary) -> GroundTruth:
    counts = Counter(
        vocab.index[a] for a in answer_set.normalized() if a in vocab.index
    )
    if not counts:
        raise UnanswerableError(
            f"question {answer_set.question_id}: unanswerable under vocabulary"
        )
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return GroundTruth(
        classes=tuple(c for c, _ in ranked),
        weights=tuple(n / NUM_ANNOTATORS for _, n in ranked),
        argmax_class=ranked[0][0],
    )


def ground_truths(
    answer_sets: Sequence[AnswerSet], vocab: Vocabulary
) -> list[GroundTruth | None]:
    """Targets aligned with ``answer_sets``; None where nothing is in vocabulary."""
    out: list[GroundTruth | None] = []
    for s in answer_sets:
        try:
            out.append(to_ground_truth(s, vocab))
        except UnanswerableError:
            out.append(None)
    return out
