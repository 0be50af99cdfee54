"""Command-line entry points and the four-way comparison driver.

Subcommands: train (AdaBoostV to an ensemble file), sparsify, sample,
eval, margins, and compare, the driver that trains a full ensemble,
derives truncated / sparsified / importance-sampled competitors, evaluates
all four, and writes a JSON report plus cumulative-margin CSV curves.

Every run is reproducible from its config: all randomness derives from the
single seed through fixed component indices (0 full training, 1 truncated
training, 2 sparsifier, 3 sampler), and reports are written with sorted
keys so identical configs produce byte-identical files (timing aside).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .boosting import (
    BoostConfig,
    Dataset,
    Ensemble,
    adaboost_v,
    budget_multiplier,
)
from .discrepancy import DEFAULT_CONFIG, ColoringConfig
from .evaluation import accuracy, auc, bias_correct, predict_scores
from .fileio import (
    FileFormatError,
    ensure_parent,
    load_dataset,
    load_ensemble,
    load_margin_matrix,
    save_ensemble,
    write_curve_csv,
    write_json_report,
)
from .margins import (
    MarginMatrix,
    WeightVector,
    build_margin_matrix,
    cumulative_margin_curve,
    margins,
    min_margin,
    sup_norm_diff,
)
from .seeding import split_seed
from .sparsify import SparsifyReport, importance_sample, sparsify, truncate_top

SCHEMA_VERSION = 1
METHOD_NAMES = ("full", "truncated", "sparsified", "sampled")


@dataclass(frozen=True)
class RunConfig:
    """Driver configuration: seed, target size, constants, and paths."""

    seed: int = 0
    target: int = 16
    rounds: int | None = None
    spencer_constant: float = 12.0
    halving_constant: float = 24.0
    boosting_constant: float = 4.0
    pipeline_constant: float = 30.0
    coloring_retries: int = 16
    train_path: str | None = None
    test_path: str | None = None
    matrix_path: str | None = None
    out_path: str | None = None
    matrix_mode: bool = False

    def __post_init__(self):
        for name in (
            "spencer_constant",
            "halving_constant",
            "boosting_constant",
            "pipeline_constant",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.target < 1:
            raise ValueError("target size must be at least 1")
        if self.coloring_retries < 1:
            raise ValueError("coloring retry budget must be at least 1")

    def coloring_config(self) -> ColoringConfig:
        return dataclasses.replace(
            DEFAULT_CONFIG,
            spencer_constant=self.spencer_constant,
            retry_budget=self.coloring_retries,
        )

    def echo(self) -> dict:
        payload = dataclasses.asdict(self)
        return payload


def _require_paths(config: RunConfig) -> None:
    if config.matrix_mode:
        if not config.matrix_path:
            raise ValueError("matrix mode needs --matrix")
        paths = [config.matrix_path]
    else:
        if not (config.train_path and config.test_path):
            raise ValueError("dataset mode needs --train and --test")
        paths = [config.train_path, config.test_path]
    for path in paths:
        if not Path(path).is_file():
            raise FileNotFoundError(f"input file not found: {path}")
    if not config.out_path:
        raise ValueError("an output directory (--out) is required")


def _pruned_ensemble(full: Ensemble, weights: WeightVector) -> Ensemble:
    surviving = weights.nonzero_indices()
    return Ensemble(
        tuple(full.hypotheses[i] for i in surviving),
        WeightVector(weights.values[surviving]),
    )


def _dataset_record(
    name: str,
    ensemble: Ensemble,
    train: Dataset,
    test: Dataset,
    full_train_scores: np.ndarray,
    fit_bias: bool,
    sparsify_report: SparsifyReport | None = None,
) -> dict:
    weights = ensemble.weights.normalized()
    scored = Ensemble(ensemble.hypotheses, weights)
    train_scores = predict_scores(scored, train)
    test_scores = predict_scores(scored, test)
    offset = 0.0
    if fit_bias:
        offset, _ = bias_correct(train_scores, train.labels)
    train_margins = train.labels * train_scores
    record = {
        "method": name,
        "hypothesis_count": len(ensemble),
        "min_margin": float(np.min(train_margins)),
        "sup_norm_error_vs_full": float(
            np.max(np.abs(full_train_scores - train_scores))
        ),
        "bias_offset": offset,
        "train_accuracy": accuracy(train_scores, train.labels, offset),
        "test_accuracy": accuracy(test_scores, test.labels, offset),
        "train_auc": auc(train_scores, train.labels),
        "test_auc": auc(test_scores, test.labels),
        "curve": [[m, f] for m, f in cumulative_margin_curve(train_margins)],
    }
    if sparsify_report is not None:
        record["sparsify"] = _report_payload(sparsify_report)
    return record


def _matrix_record(
    name: str,
    U: MarginMatrix,
    weights: WeightVector,
    full_weights: WeightVector,
    sparsify_report: SparsifyReport | None = None,
) -> dict:
    record = {
        "method": name,
        "hypothesis_count": weights.support_size,
        "min_margin": min_margin(U, weights),
        "sup_norm_error_vs_full": sup_norm_diff(U, full_weights, weights),
        "bias_offset": None,
        "train_accuracy": None,
        "test_accuracy": None,
        "train_auc": None,
        "test_auc": None,
        "curve": [[m, f] for m, f in cumulative_margin_curve(margins(U, weights))],
    }
    if sparsify_report is not None:
        record["sparsify"] = _report_payload(sparsify_report)
    return record


def _report_payload(report: SparsifyReport) -> dict:
    return {
        "initial_support": report.initial_support,
        "final_support": report.final_support,
        "halving_rounds": report.halving_rounds,
        "achieved_error": report.achieved_error,
        "per_round_errors": list(report.per_round_errors),
        "truncated_fallback": report.truncated_fallback,
    }


def run_compare(config: RunConfig) -> dict:
    """Run the four-method comparison and write report plus curves.

    On failure the partial report is still written, with a failure marker,
    before the exception propagates.
    """
    _require_paths(config)
    out_dir = Path(config.out_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    payload: dict = {
        "schema_version": SCHEMA_VERSION,
        "mode": "matrix" if config.matrix_mode else "dataset",
        "config": config.echo(),
        "methods": [],
    }
    try:
        if config.matrix_mode:
            _compare_matrix(config, payload)
        else:
            _compare_datasets(config, payload)
    except Exception as exc:
        payload["failed"] = {"error": f"{type(exc).__name__}: {exc}"}
        payload["timing_seconds"] = time.perf_counter() - started
        write_json_report(out_dir / "report.json", payload)
        raise
    payload["timing_seconds"] = time.perf_counter() - started
    write_json_report(out_dir / "report.json", payload)
    for record in payload["methods"]:
        write_curve_csv(out_dir / f"curve_{record['method']}.csv", record["curve"])
    return payload


def _compare_datasets(config: RunConfig, payload: dict) -> None:
    train = load_dataset(config.train_path)
    test = load_dataset(config.test_path)
    T = config.target
    rounds = config.rounds
    if rounds is None:
        rounds = budget_multiplier(train.n_points, T) * T
    coloring = config.coloring_config()

    full = adaboost_v(train, BoostConfig(rounds=rounds, seed=split_seed(config.seed, 0)))
    truncated = adaboost_v(
        train, BoostConfig(rounds=min(T, rounds), seed=split_seed(config.seed, 1))
    )
    U = build_margin_matrix(train, full)
    w_full = full.weights.normalized()
    target = min(T, len(full))
    sparse_w, report = sparsify(U, w_full, target, split_seed(config.seed, 2), coloring)
    sampled_w = importance_sample(w_full, target, split_seed(config.seed, 3))

    full_scored = Ensemble(full.hypotheses, w_full)
    full_train_scores = predict_scores(full_scored, train)
    payload["rounds"] = rounds
    records = payload["methods"]
    records.append(
        _dataset_record("full", full, train, test, full_train_scores, fit_bias=False)
    )
    records.append(
        _dataset_record(
            "truncated", truncated, train, test, full_train_scores, fit_bias=False
        )
    )
    records.append(
        _dataset_record(
            "sparsified",
            _pruned_ensemble(full, sparse_w),
            train,
            test,
            full_train_scores,
            fit_bias=True,
            sparsify_report=report,
        )
    )
    records.append(
        _dataset_record(
            "sampled",
            _pruned_ensemble(full, sampled_w),
            train,
            test,
            full_train_scores,
            fit_bias=True,
        )
    )


def _compare_matrix(config: RunConfig, payload: dict) -> None:
    U, w = load_margin_matrix(config.matrix_path)
    T = min(config.target, len(w))
    coloring = config.coloring_config()
    sparse_w, report = sparsify(U, w, T, split_seed(config.seed, 2), coloring)
    sampled_w = importance_sample(w, T, split_seed(config.seed, 3))
    records = payload["methods"]
    records.append(_matrix_record("full", U, w, w))
    records.append(_matrix_record("truncated", U, truncate_top(w, T), w))
    records.append(_matrix_record("sparsified", U, sparse_w, w, report))
    records.append(_matrix_record("sampled", U, sampled_w, w))


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="root RNG seed")
    parser.add_argument("--config", default=None, help="key=value config file")
    parser.add_argument("--ks", type=float, default=None, help="coloring bound constant")
    parser.add_argument("--kh", type=float, default=None, help="halving bound constant")
    parser.add_argument("--cv", type=float, default=None, help="boosting gap constant")
    parser.add_argument("--cb", type=float, default=None, help="pipeline gap constant")


def parse_config_file(path) -> dict[str, str]:
    """Flat key=value lines; blank lines and #-comments ignored."""
    values: dict[str, str] = {}
    with open(path) as handle:
        for line_no, line in enumerate(handle, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise FileFormatError(
                    f"{path}: line {line_no}: expected key=value"
                )
            key, _, value = text.partition("=")
            values[key.strip()] = value.strip()
    return values


_CONFIG_KEYS = {
    "seed": int,
    "target": int,
    "rounds": int,
    "ks": float,
    "kh": float,
    "cv": float,
    "cb": float,
    "train": str,
    "test": str,
    "matrix": str,
    "model": str,
    "out": str,
    "matrix_mode": lambda v: v.lower() in ("1", "true", "yes"),
}


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """File values fill in only the options the command line left unset."""
    if getattr(args, "config", None) is None:
        return args
    values = parse_config_file(args.config)
    unknown = set(values) - set(_CONFIG_KEYS)
    if unknown:
        raise FileFormatError(
            f"{args.config}: unknown config keys: {', '.join(sorted(unknown))}"
        )
    for key, raw in values.items():
        attr = {"train": "train", "test": "test", "matrix": "matrix",
                "model": "model", "out": "out"}.get(key, key)
        if hasattr(args, attr) and getattr(args, attr) in (None, False):
            setattr(args, attr, _CONFIG_KEYS[key](raw))
    return args


def _run_config_from(args: argparse.Namespace) -> RunConfig:
    kwargs = {
        "seed": args.seed if args.seed is not None else 0,
        "target": args.target if getattr(args, "target", None) is not None else 16,
        "rounds": getattr(args, "rounds", None),
        "matrix_mode": bool(getattr(args, "matrix_mode", False)),
        "train_path": getattr(args, "train", None),
        "test_path": getattr(args, "test", None),
        "matrix_path": getattr(args, "matrix", None),
        "out_path": getattr(args, "out", None),
    }
    if args.ks is not None:
        kwargs["spencer_constant"] = args.ks
    if args.kh is not None:
        kwargs["halving_constant"] = args.kh
    if args.cv is not None:
        kwargs["boosting_constant"] = args.cv
    if args.cb is not None:
        kwargs["pipeline_constant"] = args.cb
    return RunConfig(**kwargs)


def _coloring_from(args: argparse.Namespace) -> ColoringConfig:
    if getattr(args, "ks", None) is not None:
        return dataclasses.replace(DEFAULT_CONFIG, spencer_constant=args.ks)
    return DEFAULT_CONFIG


def _cmd_train(args: argparse.Namespace) -> int:
    args = _merge_config(args)
    dataset = load_dataset(args.data)
    config = BoostConfig(rounds=args.rounds, seed=args.seed)
    ensemble = adaboost_v(dataset, config)
    ensure_parent(args.out)
    save_ensemble(args.out, ensemble)
    w = ensemble.weights.normalized()
    scores = predict_scores(Ensemble(ensemble.hypotheses, w), dataset)
    summary = {
        "rounds_trained": len(ensemble),
        "stopped_early": ensemble.stopped_early,
        "train_min_margin": float(np.min(dataset.labels * scores)),
        "train_accuracy": accuracy(scores, dataset.labels),
        "model": str(args.out),
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _load_matrix_or_model(args: argparse.Namespace) -> tuple[MarginMatrix, WeightVector, Ensemble | None]:
    if getattr(args, "matrix", None):
        U, w = load_margin_matrix(args.matrix)
        return U, w, None
    if not (getattr(args, "model", None) and getattr(args, "data", None)):
        raise ValueError("need either --matrix or both --model and --data")
    ensemble = load_ensemble(args.model)
    dataset = load_dataset(args.data)
    U = build_margin_matrix(dataset, ensemble)
    return U, ensemble.weights.normalized(), ensemble


def _cmd_sparsify(args: argparse.Namespace) -> int:
    args = _merge_config(args)
    U, w, ensemble = _load_matrix_or_model(args)
    T = min(args.target, len(w))
    sparse_w, report = sparsify(U, w, T, split_seed(args.seed or 0, 2), _coloring_from(args))
    _write_weights_output(args.out, sparse_w, ensemble)
    print(json.dumps(_report_payload(report), indent=2, sort_keys=True))
    return 0


def _cmd_sample(args: argparse.Namespace) -> int:
    args = _merge_config(args)
    U, w, ensemble = _load_matrix_or_model(args)
    T = min(args.target, len(w))
    sampled = importance_sample(w, T, split_seed(args.seed or 0, 3))
    _write_weights_output(args.out, sampled, ensemble)
    summary = {
        "support": sampled.support_size,
        "sup_norm_error": sup_norm_diff(U, w, sampled),
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _write_weights_output(path, weights: WeightVector, ensemble: Ensemble | None) -> None:
    ensure_parent(path)
    if ensemble is None:
        with open(path, "w") as handle:
            json.dump({"weights": [float(v) for v in weights.values]}, handle, indent=2)
            handle.write("\n")
    else:
        surviving = weights.nonzero_indices()
        pruned = Ensemble(
            tuple(ensemble.hypotheses[i] for i in surviving),
            WeightVector(weights.values[surviving]),
        )
        save_ensemble(path, pruned)


def _cmd_eval(args: argparse.Namespace) -> int:
    args = _merge_config(args)
    ensemble = load_ensemble(args.model)
    dataset = load_dataset(args.data)
    scores = predict_scores(
        Ensemble(ensemble.hypotheses, ensemble.weights.normalized()), dataset
    )
    if args.fit_bias:
        offset, train_acc = bias_correct(scores, dataset.labels)
    else:
        offset = args.offset
        train_acc = accuracy(scores, dataset.labels, offset)
    payload = {
        "offset": offset,
        "accuracy": train_acc,
        "auc": auc(scores, dataset.labels),
        "min_margin": float(np.min(dataset.labels * scores)),
    }
    if args.out:
        ensure_parent(args.out)
        write_json_report(args.out, payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_margins(args: argparse.Namespace) -> int:
    args = _merge_config(args)
    U, w, _ = _load_matrix_or_model(args)
    curve = cumulative_margin_curve(margins(U, w))
    ensure_parent(args.out)
    write_curve_csv(args.out, curve)
    print(f"wrote {len(curve)} curve points to {args.out}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    args = _merge_config(args)
    config = _run_config_from(args)
    payload = run_compare(config)
    lines = []
    for record in payload["methods"]:
        lines.append(
            f"{record['method']:>11}: {record['hypothesis_count']:4d} hypotheses, "
            f"min margin {record['min_margin']:+.4f}, "
            f"sup error vs full {record['sup_norm_error_vs_full']:.4f}"
        )
    print("\n".join(lines))
    print(f"report: {Path(config.out_path) / 'report.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsevote",
        description="Sparsify weighted voting ensembles while preserving margins.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train an AdaBoostV stump ensemble")
    p_train.add_argument("--data", required=True, help="training CSV (label first)")
    p_train.add_argument("--rounds", type=int, required=True)
    p_train.add_argument("--out", required=True, help="output model JSON")
    _add_common(p_train)
    p_train.set_defaults(func=_cmd_train)

    for name, func, helptext in (
        ("sparsify", _cmd_sparsify, "halve ensemble weights down to T hypotheses"),
        ("sample", _cmd_sample, "importance-sample ensemble weights to T draws"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--matrix", default=None, help="margin-matrix text file")
        p.add_argument("--model", default=None, help="ensemble model JSON")
        p.add_argument("--data", default=None, help="dataset CSV for the model")
        p.add_argument("--target", "-T", type=int, required=True)
        p.add_argument("--out", required=True)
        _add_common(p)
        p.set_defaults(func=func)

    p_eval = sub.add_parser("eval", help="score a model on a dataset")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--offset", type=float, default=0.0)
    p_eval.add_argument("--fit-bias", action="store_true", dest="fit_bias")
    p_eval.add_argument("--out", default=None)
    _add_common(p_eval)
    p_eval.set_defaults(func=_cmd_eval)

    p_margins = sub.add_parser("margins", help="write the cumulative-margin curve")
    p_margins.add_argument("--matrix", default=None)
    p_margins.add_argument("--model", default=None)
    p_margins.add_argument("--data", default=None)
    p_margins.add_argument("--out", required=True)
    _add_common(p_margins)
    p_margins.set_defaults(func=_cmd_margins)

    p_compare = sub.add_parser("compare", help="full four-method comparison")
    p_compare.add_argument("--train", default=None)
    p_compare.add_argument("--test", default=None)
    p_compare.add_argument("--matrix", default=None)
    p_compare.add_argument("--matrix-mode", action="store_true", dest="matrix_mode")
    p_compare.add_argument("--target", "-T", type=int, default=None)
    p_compare.add_argument("--rounds", type=int, default=None)
    p_compare.add_argument("--out", default=None)
    _add_common(p_compare)
    p_compare.set_defaults(func=_cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
