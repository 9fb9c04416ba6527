"""Command-line orchestration: fit, score, eval-ood, oneclass, confusion.

Exit codes: 0 success, 1 runtime error, 2 usage error. Output is
deterministic for identical (inputs, config, seed); timing lines carry the
"# time" prefix so they can be filtered out when comparing runs.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .config import COV_MODES, DETECTORS, KERNELS, RunConfig, read_config_file
from .detectors import fit_detector, load_detector, save_detector
from .evaluation import (
    confusion_matrix_eval,
    format_confusion_table,
    format_one_vs_all_table,
    format_ood_report,
    one_vs_all_eval,
    one_vs_all_json,
    ood_report_json,
    run_ood_eval,
)
from .fvec import read_features
from .kmeans import kmeans_fit
from .mahalanobis import fit_gaussian_stats
from .manifest import load_dataset, load_manifest

USAGE_ERROR = 2
RUNTIME_ERROR = 1


class UsageError(ValueError):
    """Bad arguments or configuration; maps to exit code 2."""


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", help="named experiment preset")
    parser.add_argument("--config", help="key=value config file (flags win)")
    parser.add_argument("--detector", choices=DETECTORS)
    parser.add_argument("--components", type=int)
    parser.add_argument("--cov", choices=COV_MODES, dest="cov_mode")
    parser.add_argument("--shrinkage", type=float)
    parser.add_argument("--kernel", choices=KERNELS)
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--runs", type=int)
    parser.add_argument("--bandwidth", type=float)


def build_config(args: argparse.Namespace) -> RunConfig:
    """defaults < preset < config file < explicit flags."""
    config = RunConfig()
    if args.preset:
        config = config.apply_preset(args.preset)
    if args.config:
        overrides = read_config_file(args.config)
        config = RunConfig(**{**config.__dict__, **overrides})
    flags = {
        key: getattr(args, key)
        for key in (
            "detector",
            "components",
            "cov_mode",
            "shrinkage",
            "kernel",
            "epsilon",
            "seed",
            "runs",
            "bandwidth",
        )
        if getattr(args, key, None) is not None
    }
    config = RunConfig(**{**config.__dict__, **flags})
    try:
        return config.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load_features(path: str) -> np.ndarray:
    features = read_features(path)
    if features.shape[0] < 1:
        raise ValueError(f"{path}: empty feature file")
    return features


def cmd_fit(args: argparse.Namespace) -> int:
    config = build_config(args)
    features = _load_features(args.train)
    started = time.perf_counter()
    if config.detector == "mahalanobis":
        clusters = kmeans_fit(features, config.components, seed=config.seed)
        detector = fit_gaussian_stats(
            features, clusters, mode=config.cov_mode, shrinkage=config.shrinkage
        )
        print(f"inertia {clusters.inertia:.6f}")
    else:
        detector = fit_detector(features, config)
    save_detector(detector, args.out)
    print(f"detector {detector.detector_id}")
    print(f"components {config.components}")
    print(f"shrinkage {config.shrinkage}")
    print(f"dim {features.shape[1]}")
    print(f"rows {features.shape[0]}")
    print(f"# time fit_seconds={time.perf_counter() - started:.3f}")
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    detector = load_detector(args.model)
    features = _load_features(args.test)
    scores = detector.score_batch(features)
    lines = "".join(f"{s:.17g}\n" for s in scores)
    if args.out:
        Path(args.out).write_text(lines)
        print(f"wrote {scores.size} scores to {args.out}")
    else:
        sys.stdout.write(lines)
    return 0


def cmd_eval_ood(args: argparse.Namespace) -> int:
    config = build_config(args)
    detector = load_detector(args.model)
    inlier = _load_features(args.inlier)
    outlier = _load_features(args.outlier)
    report = run_ood_eval(detector, inlier, outlier, metadata=config.describe())
    if args.json:
        Path(args.json).write_text(ood_report_json(report) + "\n")
    print(format_ood_report(report))
    return 0


def _load_labeled_split(manifest_path: str):
    manifest = load_manifest(manifest_path)
    if manifest.role != "labeled-multiclass":
        raise UsageError(
            f"{manifest_path}: role must be labeled-multiclass, got {manifest.role!r}"
        )
    train_x, train_y = load_dataset(manifest, "train")
    test_x, test_y = load_dataset(manifest, "test")
    if train_y is None or test_y is None:
        raise UsageError(f"{manifest_path}: both splits need labels")
    return train_x, train_y, test_x, test_y


def cmd_oneclass(args: argparse.Namespace) -> int:
    config = build_config(args)
    train_x, train_y, test_x, test_y = _load_labeled_split(args.manifest)
    report = one_vs_all_eval(
        train_x, train_y, test_x, test_y, config, runs=config.runs, seed=config.seed
    )
    if args.json:
        Path(args.json).write_text(one_vs_all_json(report) + "\n")
    print(format_one_vs_all_table(report))
    return 0


def cmd_confusion(args: argparse.Namespace) -> int:
    config = build_config(args)
    train_x, train_y, test_x, test_y = _load_labeled_split(args.manifest)
    n_classes = int(train_y.max()) + 1
    detectors = [
        fit_detector(train_x[train_y == c], config) for c in range(n_classes)
    ]
    matrix = confusion_matrix_eval(test_x, test_y, detectors)
    print(format_confusion_table(matrix))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsod",
        description="Feature-space outlier detection over FVEC feature files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a detector on a training feature file")
    p_fit.add_argument("train", help="training features (.fvec)")
    p_fit.add_argument("--out", required=True, help="model directory to write")
    _add_config_flags(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_score = sub.add_parser("score", help="score a feature file with a fitted model")
    p_score.add_argument("model", help="model directory")
    p_score.add_argument("test", help="features to score (.fvec)")
    p_score.add_argument("--out", help="write scores here instead of stdout")
    p_score.set_defaults(func=cmd_score)

    p_eval = sub.add_parser("eval-ood", help="AUROC of a model on an inlier/outlier pair")
    p_eval.add_argument("model", help="model directory")
    p_eval.add_argument("inlier", help="inlier test features (.fvec)")
    p_eval.add_argument("outlier", help="outlier test features (.fvec)")
    p_eval.add_argument("--json", help="also write a JSON report here")
    _add_config_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval_ood)

    p_one = sub.add_parser("oneclass", help="one-vs-all protocol on a labeled manifest")
    p_one.add_argument("manifest", help="labeled-multiclass manifest with a test split")
    p_one.add_argument("--json", help="also write a JSON report here")
    _add_config_flags(p_one)
    p_one.set_defaults(func=cmd_oneclass)

    p_conf = sub.add_parser("confusion", help="pairwise AUROC confusion matrix")
    p_conf.add_argument("manifest", help="labeled-multiclass manifest with a test split")
    _add_config_flags(p_conf)
    p_conf.set_defaults(func=cmd_confusion)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
