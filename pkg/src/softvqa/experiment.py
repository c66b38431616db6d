"""Standard-vs-soft comparison over several training seeds."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from softvqa.answers import Vocabulary
from softvqa.data import CurvePoint, FeatureDataset, save_curves
from softvqa.losses import LossMode
from softvqa.trainer import ModelConfig, TrainConfig, best_accuracy, discrepancy_epochs, train, with_mode

log = logging.getLogger(__name__)

COLUMNS = ("overall", "yes_no", "number", "other")


def curve_filename(mode: LossMode, seed: int) -> str:
    return f"curve_{mode.value}_seed{seed}.csv"


@dataclass
class ComparisonResult:
    seeds: list[int]
    curves: dict[LossMode, dict[int, list[CurvePoint]]]

    def best(self, mode: LossMode, column: str = "overall") -> np.ndarray:
        """Best-epoch val accuracy per seed (epoch chosen by overall accuracy)."""
        return np.array(
            [getattr(best_accuracy(self.curves[mode][s]), column) for s in self.seeds]
        )

    def delta(self, column: str = "overall") -> float:
        return float(self.best(LossMode.SOFT, column).mean() - self.best(LossMode.STANDARD, column).mean())

    def discrepancies(self, mode: LossMode = LossMode.STANDARD) -> dict[int, list[int]]:
        return {s: discrepancy_epochs(self.curves[mode][s]) for s in self.seeds}

    def summary(self) -> str:
        """Plain-text table of best val accuracy in percentage points."""
        lines = [
            f"{'loss':<10}" + "".join(f"{c:>22}" for c in ("All", "Y/N", "Num", "Other")),
        ]
        for mode in (LossMode.STANDARD, LossMode.SOFT):
            cells = []
            for col in COLUMNS:
                v = 100 * self.best(mode, col)
                cells.append(f"{v.mean():.2f} [{v.min():.2f},{v.max():.2f}]")
            lines.append(f"{mode.value:<10}" + "".join(f"{c:>22}" for c in cells))
        lines.append(
            f"{'delta':<10}" + "".join(f"{100 * self.delta(c):>+22.2f}" for c in COLUMNS)
        )
        return "\n".join(lines)


def compare(
    train_set: FeatureDataset,
    val_set: FeatureDataset,
    vocab: Vocabulary,
    model_config: ModelConfig,
    base_config: TrainConfig,
    seeds: Sequence[int],
    out_dir=None,
) -> ComparisonResult:
    """Train both loss modes for every seed; optionally write one curve CSV per run."""
    if not seeds:
        raise ValueError("at least one seed is required")
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    curves: dict[LossMode, dict[int, list[CurvePoint]]] = {m: {} for m in LossMode}
    for seed in seeds:
        for mode in (LossMode.STANDARD, LossMode.SOFT):
            cfg = with_mode(base_config, mode, seed)
            log.info("training %s seed=%d", mode.value, seed)
            curve = train(train_set, val_set, vocab, model_config, cfg)
            curves[mode][seed] = curve
            if out_dir is not None and curve:
                save_curves(Path(out_dir) / curve_filename(mode, seed), curve)
    return ComparisonResult(list(seeds), curves)
