"""Command-line interface: ``softvqa {eval,synth,train,compare,inspect}``.

Exit codes: 0 success, 2 input/validation error, 3 numerical failure.
Log verbosity is read from ``SOFTVQA_LOG_LEVEL`` (default WARNING).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from softvqa.data import (
    DataFormatError,
    load_annotations,
    load_curves,
    load_dataset_dir,
    load_predictions,
    save_curves,
    save_dataset_dir,
    save_predictions,
)
from softvqa.experiment import compare, curve_filename
from softvqa.losses import LossMode
from softvqa.metric import AccuracyReport, evaluate
from softvqa.synth import SynthConfig, generate
from softvqa.trainer import ModelConfig, NumericalError, TrainConfig, discrepancy_epochs, fit

LOG_ENV = "SOFTVQA_LOG_LEVEL"
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("softvqa")


class InputError(Exception):
    pass


def format_report(report: AccuracyReport) -> str:
    cols = [("All", report.overall), ("Y/N", report.yes_no), ("Num", report.number), ("Other", report.other)]
    head = "".join(f"{name:>8}" for name, _ in cols)
    vals = "".join(f"{100 * v:>8.2f}" for _, v in cols)
    counts = report.counts
    n = "".join(
        f"{c:>8}"
        for c in (sum(counts.values()), counts.get("yes_no", 0), counts.get("number", 0), counts.get("other", 0))
    )
    return f"{'':<6}{head}\n{'acc':<6}{vals}\n{'n':<6}{n}"


def _existing_file(p: str) -> Path:
    path = Path(p)
    if not path.is_file():
        raise InputError(f"file not found: {p}")
    return path


def _existing_dir(p: str) -> Path:
    path = Path(p)
    if not path.is_dir():
        raise InputError(f"directory not found: {p}")
    return path


def _out_dir(p: str) -> Path:
    path = Path(p)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise InputError(f"cannot create output directory {p}: {e}") from e
    return path


def _seeds(text: str) -> list[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise InputError(f"--seeds must be comma-separated integers, got {text!r}") from None
    if not seeds or any(s < 0 for s in seeds):
        raise InputError("--seeds needs at least one non-negative integer")
    if len(set(seeds)) != len(seeds):
        raise InputError("--seeds contains duplicates")
    return seeds


def _train_config(args, mode: LossMode, seed: int) -> TrainConfig:
    return TrainConfig(
        loss_mode=mode,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        epochs=args.epochs,
        seed=seed,
    )


def run_eval(args) -> int:
    sets = load_annotations(_existing_file(args.annotations))
    preds = load_predictions(_existing_file(args.predictions))
    report = evaluate(preds, sets)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(format_report(report))
    return EXIT_OK


def run_synth(args) -> int:
    path = _existing_file(args.config)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: malformed JSON: {e}") from e
    if not isinstance(doc, dict):
        raise InputError(f"{path}: config must be a JSON object")
    config = SynthConfig.from_dict(doc)
    out = _out_dir(args.out)
    train_set, val_set = generate(config)
    save_dataset_dir(out, config.vocabulary(), train_set, val_set)
    (out / "synth_config.json").write_text(json.dumps(config.to_dict(), indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(train_set)} train / {len(val_set)} val questions to {out}")
    return EXIT_OK


def _report_discrepancies(label: str, epochs: list[int]) -> None:
    if epochs:
        print(f"{label}: val loss and val accuracy both rose at epochs {epochs}")
    else:
        print(f"{label}: no epoch with both val loss and val accuracy rising")


def run_train(args) -> int:
    data = _existing_dir(args.data)
    out = _out_dir(args.out)
    vocab, train_set, val_set = load_dataset_dir(data)
    mode = LossMode(args.loss)
    run = fit(train_set, val_set, vocab, _model_config(args), _train_config(args, mode, args.seed))
    stem = f"{mode.value}_seed{args.seed}"
    if run.curve:
        save_curves(out / curve_filename(mode, args.seed), run.curve)
        print(format_report(run.curve[-1].val_accuracy))
        _report_discrepancies(stem, discrepancy_epochs(run.curve))
    save_predictions(out / f"predictions_{stem}.json", run.val_predictions)
    np.savez(out / f"params_{stem}.npz", **run.params.tensors)
    return EXIT_OK


def run_compare(args) -> int:
    data = _existing_dir(args.data)
    seeds = _seeds(args.seeds)
    if args.epochs < 1:
        raise InputError("--epochs must be >= 1 for compare")
    out = _out_dir(args.out)
    vocab, train_set, val_set = load_dataset_dir(data)
    result = compare(
        train_set, val_set, vocab, _model_config(args),
        _train_config(args, LossMode.SOFT, seeds[0]), seeds, out,
    )
    print(f"best val accuracy over seeds {seeds} (mean [min,max], %)")
    print(result.summary())
    for seed, epochs in result.discrepancies().items():
        _report_discrepancies(f"standard seed {seed}", epochs)
    return EXIT_OK


def run_inspect(args) -> int:
    curve = load_curves(_existing_file(args.curve))
    _report_discrepancies(str(args.curve), discrepancy_epochs(curve))
    return EXIT_OK


def _model_config(args) -> ModelConfig:
    return ModelConfig(arch=args.arch, hidden_dim=args.hidden_dim)


def _add_training_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="dataset directory written by `synth`")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--out", required=True)
    p.add_argument("--arch", choices=("linear", "mlp"), default="linear")
    p.add_argument("--hidden-dim", type=int, default=64)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="softvqa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="score predictions with the VQA consensus metric")
    p.add_argument("--annotations", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.set_defaults(func=run_eval)

    p = sub.add_parser("synth", help="generate a synthetic dataset directory")
    p.add_argument("--config", required=True, help="JSON object of SynthConfig fields")
    p.add_argument("--out", required=True)
    p.set_defaults(func=run_synth)

    p = sub.add_parser("train", help="train one model with one loss")
    _add_training_flags(p)
    p.add_argument("--loss", choices=[m.value for m in LossMode], required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=run_train)

    p = sub.add_parser("compare", help="train both losses over several seeds")
    _add_training_flags(p)
    p.add_argument("--seeds", default="1,2,3,4,5")
    p.set_defaults(func=run_compare)

    p = sub.add_parser("inspect", help="report epochs where val loss and accuracy both rose")
    p.add_argument("--curve", required=True)
    p.set_defaults(func=run_inspect)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get(LOG_ENV, "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, DataFormatError, FileNotFoundError, KeyError, ValueError, IndexError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
