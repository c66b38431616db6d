"""Soft cross entropy for VQA-style classification and the consensus accuracy metric."""

from softvqa.answers import (
    AnswerSet,
    AnswerType,
    GroundTruth,
    Vocabulary,
    build_vocabulary,
    normalize_answer,
    to_ground_truth,
)
from softvqa.losses import (
    LossMode,
    LossResult,
    batch_loss,
    cross_entropy,
    log_sum_exp,
    soft_cross_entropy,
)
from softvqa.metric import (
    AccuracyReport,
    evaluate,
    question_accuracy_bruteforce,
    question_accuracy_closed,
)

__all__ = [
    "AccuracyReport",
    "AnswerSet",
    "AnswerType",
    "GroundTruth",
    "LossMode",
    "LossResult",
    "Vocabulary",
    "batch_loss",
    "build_vocabulary",
    "cross_entropy",
    "evaluate",
    "log_sum_exp",
    "normalize_answer",
    "question_accuracy_bruteforce",
    "question_accuracy_closed",
    "soft_cross_entropy",
    "to_ground_truth",
]

__version__ = "0.1.0"
