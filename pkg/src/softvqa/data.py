"""File formats: VQA v2 style annotation/prediction JSON, feature datasets, curve CSV.

A dataset directory holds::

    vocab.json                 {"entries": [...]}
    {split}_annotations.json   VQA v2 annotation schema
    {split}_features.npy       float64 array, one row per annotation, same order

where ``split`` is ``train`` or ``val``.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
import os
import tempfile
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from softvqa.answers import (
    NUM_ANNOTATORS,
    AnswerSet,
    AnswerType,
    GroundTruth,
    Vocabulary,
    ground_truths,
)
from softvqa.losses import LossMode, target_matrix
from softvqa.metric import AccuracyReport

log = logging.getLogger(__name__)

CURVE_HEADER = (
    "epoch",
    "train_loss",
    "val_loss",
    "val_acc_all",
    "val_acc_yesno",
    "val_acc_number",
    "val_acc_other",
)


class Split(enum.Enum):
    TRAIN = "train"
    VALIDATION = "val"


class DataFormatError(ValueError):
    pass


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise DataFormatError(f"{path}: malformed JSON: {e}") from e


def _require_int(obj, key, where):
    v = obj.get(key) if isinstance(obj, dict) else None
    if not isinstance(v, int) or isinstance(v, bool):
        raise DataFormatError(f"{where}: field {key!r} must be an integer")
    return v


def _require_str(obj, key, where):
    v = obj.get(key) if isinstance(obj, dict) else None
    if not isinstance(v, str):
        raise DataFormatError(f"{where}: field {key!r} must be a string")
    return v


def parse_annotations(doc) -> list[AnswerSet]:
    if not isinstance(doc, dict) or not isinstance(doc.get("annotations"), list):
        raise DataFormatError("expected an object with an 'annotations' array")
    out: list[AnswerSet] = []
    seen: set[int] = set()
    for i, ann in enumerate(doc["annotations"]):
        where = f"annotation {i}"
        qid = _require_int(ann, "question_id", where)
        where = f"question {qid}"
        if qid in seen:
            raise DataFormatError(f"duplicate question_id {qid}")
        seen.add(qid)
        try:
            atype = AnswerType.parse(_require_str(ann, "answer_type", where))
        except ValueError as e:
            raise DataFormatError(f"{where}: {e}") from None
        answers = ann.get("answers")
        if not isinstance(answers, list):
            raise DataFormatError(f"{where}: field 'answers' must be an array")
        if len(answers) != NUM_ANNOTATORS:
            raise DataFormatError(
                f"question {qid}: expected {NUM_ANNOTATORS} answers, got {len(answers)}"
            )
        raw = tuple(_require_str(a, "answer", f"{where}, answer {j}") for j, a in enumerate(answers))
        out.append(AnswerSet(qid, raw, atype))
    return out


def load_annotations(path) -> list[AnswerSet]:
    return parse_annotations(_read_json(path))


def annotations_document(answer_sets: Sequence[AnswerSet]) -> dict:
    return {
        "annotations": [
            {
                "question_id": s.question_id,
                "answer_type": s.answer_type.value,
                "answers": [
                    {"answer": a, "answer_id": j + 1} for j, a in enumerate(s.answers)
                ],
            }
            for s in answer_sets
        ]
    }


def _atomic_write_text(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_annotations(path, answer_sets: Sequence[AnswerSet]) -> None:
    _atomic_write_text(path, json.dumps(annotations_document(answer_sets)) + "\n")


def parse_predictions(doc) -> dict[int, str]:
    if not isinstance(doc, list):
        raise DataFormatError("predictions must be a JSON array")
    out: dict[int, str] = {}
    for i, item in enumerate(doc):
        where = f"prediction {i}"
        qid = _require_int(item, "question_id", where)
        answer = _require_str(item, "answer", where)
        if qid in out:
            raise DataFormatError(f"duplicate question_id {qid} in predictions")
        out[qid] = answer
    return out


def load_predictions(path) -> dict[int, str]:
    return parse_predictions(_read_json(path))


def save_predictions(path, predictions: dict[int, str]) -> None:
    doc = [{"question_id": q, "answer": predictions[q]} for q in sorted(predictions)]
    _atomic_write_text(path, json.dumps(doc) + "\n")


@dataclass(frozen=True)
class CurvePoint:
    epoch: int
    train_loss: float
    val_loss: float
    val_accuracy: AccuracyReport


def format_curves(curve: Sequence[CurvePoint]) -> str:
    if not curve:
        raise ValueError("empty curve")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_HEADER)
    prev = 0
    for p in curve:
        if p.epoch != prev + 1:
            raise ValueError(f"epochs must increase by one from 1, got {p.epoch} after {prev}")
        prev = p.epoch
        a = p.val_accuracy
        w.writerow(
            [p.epoch]
            + [f"{v:.6f}" for v in (p.train_loss, p.val_loss, a.overall, a.yes_no, a.number, a.other)]
        )
    return buf.getvalue()


def save_curves(path, curve: Sequence[CurvePoint]) -> None:
    _atomic_write_text(path, format_curves(curve))


def load_curves(path) -> list[CurvePoint]:
    """Parse a curve CSV; per-type question counts are not stored and come back empty."""
    with open(path, encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if not rows or tuple(rows[0]) != CURVE_HEADER:
        raise DataFormatError(f"{path}: unexpected curve header")
    out = []
    for row in rows[1:]:
        if len(row) != len(CURVE_HEADER):
            raise DataFormatError(f"{path}: malformed row {row}")
        e, tl, vl, acc, yn, num, oth = row
        out.append(
            CurvePoint(
                int(e),
                float(tl),
                float(vl),
                AccuracyReport(float(acc), float(yn), float(num), float(oth), {}),
            )
        )
    return out


@dataclass(frozen=True, eq=False)
class FeatureDataset:
    """Feature rows aligned with answer sets and their targets.

    ``ground_truths[i]`` is None for questions with no in-vocabulary answer;
    those rows are skipped by the losses but still scored by the metric.
    """

    features: np.ndarray
    ground_truths: tuple[GroundTruth | None, ...]
    answer_sets: tuple[AnswerSet, ...]
    split: Split

    def __post_init__(self):
        f = np.asarray(self.features, dtype=np.float64)
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "ground_truths", tuple(self.ground_truths))
        object.__setattr__(self, "answer_sets", tuple(self.answer_sets))
        if f.ndim != 2 or f.shape[0] < 1 or f.shape[1] < 1:
            raise ValueError(f"features must be a non-empty 2-D array, got shape {f.shape}")
        if not (f.shape[0] == len(self.ground_truths) == len(self.answer_sets)):
            raise ValueError("features, ground_truths and answer_sets differ in length")
        if not np.all(np.isfinite(f)):
            raise ValueError("features must be finite")

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @cached_property
    def trainable(self) -> np.ndarray:
        """Row indices that have a ground truth."""
        return np.array([i for i, g in enumerate(self.ground_truths) if g is not None], dtype=np.intp)

    def subset(self, rows) -> "FeatureDataset":
        rows = list(rows)
        return FeatureDataset(
            self.features[rows],
            [self.ground_truths[i] for i in rows],
            [self.answer_sets[i] for i in rows],
            self.split,
        )

    def targets(self, num_classes: int, mode: LossMode) -> np.ndarray:
        """Dense targets for the trainable rows, in ``trainable`` order."""
        return target_matrix([self.ground_truths[i] for i in self.trainable], num_classes, mode)

    @classmethod
    def build(cls, features, answer_sets: Sequence[AnswerSet], vocab: Vocabulary, split: Split):
        gts = ground_truths(answer_sets, vocab)
        dropped = sum(g is None for g in gts)
        if dropped:
            log.info("%s: %d questions have no in-vocabulary answer", split.value, dropped)
        return cls(features, gts, answer_sets, split)


def save_vocabulary(path, vocab: Vocabulary) -> None:
    _atomic_write_text(path, json.dumps({"entries": list(vocab.entries)}) + "\n")


def load_vocabulary(path) -> Vocabulary:
    doc = _read_json(path)
    entries = doc.get("entries") if isinstance(doc, dict) else None
    if not isinstance(entries, list) or not all(isinstance(e, str) for e in entries):
        raise DataFormatError(f"{path}: expected {{'entries': [strings]}}")
    return Vocabulary(tuple(entries))


def save_dataset_dir(directory, vocab: Vocabulary, train: FeatureDataset, val: FeatureDataset) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    save_vocabulary(d / "vocab.json", vocab)
    for ds in (train, val):
        save_annotations(d / f"{ds.split.value}_annotations.json", ds.answer_sets)
        np.save(d / f"{ds.split.value}_features.npy", ds.features)


def load_dataset_dir(directory) -> tuple[Vocabulary, FeatureDataset, FeatureDataset]:
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"dataset directory {d} does not exist")
    vocab = load_vocabulary(d / "vocab.json")
    out = []
    for split in (Split.TRAIN, Split.VALIDATION):
        sets = load_annotations(d / f"{split.value}_annotations.json")
        feats = np.load(d / f"{split.value}_features.npy", allow_pickle=False)
        if feats.ndim != 2 or feats.shape[0] != len(sets):
            raise DataFormatError(
                f"{split.value}: {feats.shape[0] if feats.ndim else 0} feature rows "
                f"for {len(sets)} annotations"
            )
        out.append(FeatureDataset.build(feats, sets, vocab, split))
    if out[0].feature_dim != out[1].feature_dim:
        raise DataFormatError("train and val feature dimensions differ")
    return vocab, out[0], out[1]
