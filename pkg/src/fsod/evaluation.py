"""Tie-aware AUROC and the OOD / one-vs-all / confusion evaluation protocols.

Outliers are the positive class under the higher-score-is-outlier
convention everywhere. AUROC uses the Mann-Whitney rank-sum form with
explicit 0.5 credit for ties, O(n log n).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata


@dataclass(frozen=True)
class ScoreReport:
    """Scores and AUROC of one detector on one inlier/outlier pair."""

    detector_id: str
    inlier_scores: np.ndarray
    outlier_scores: np.ndarray
    auroc: float
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class OneVsAllReport:
    """Per-class AUROCs of the one-vs-all protocol.

    per_run is (runs, C); per_class averages over runs; mean averages the
    per-class values (equal to averaging per_run over both axes). std is
    the standard deviation of the per-run means.
    """

    per_class: np.ndarray
    per_run: np.ndarray
    mean: float
    std: float
    metadata: dict = field(default_factory=dict)


def _check_scores(scores: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(scores, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError(f"{name} score array is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} scores contain non-finite values")
    return arr


def auroc(inlier_scores: np.ndarray, outlier_scores: np.ndarray) -> float:
    """P(random outlier scores above random inlier), ties half-credited.

    Mann-Whitney: pooled fractional ranks; U = rank-sum of outliers minus
    n_out(n_out+1)/2; AUROC = U / (n_in * n_out).
    """
    inl = _check_scores(inlier_scores, "inlier")
    out = _check_scores(outlier_scores, "outlier")
    n_in, n_out = inl.size, out.size
    ranks = rankdata(np.concatenate([inl, out]), method="average")
    rank_sum = float(ranks[n_in:].sum())
    u = rank_sum - n_out * (n_out + 1) / 2.0
    return u / (n_in * n_out)


def run_ood_eval(
    detector,
    inlier_test: np.ndarray,
    outlier_test: np.ndarray,
    metadata: dict | None = None,
) -> ScoreReport:
    """Score both test sets with a fitted detector and compute AUROC."""
    inlier_scores = detector.score_batch(inlier_test)
    outlier_scores = detector.score_batch(outlier_test)
    return ScoreReport(
        detector_id=detector.detector_id,
        inlier_scores=inlier_scores,
        outlier_scores=outlier_scores,
        auroc=auroc(inlier_scores, outlier_scores),
        metadata=dict(metadata or {}),
    )


def _check_classes(labels: np.ndarray, name: str) -> int:
    classes = np.unique(labels)
    if classes[0] != 0 or classes[-1] != classes.size - 1:
        raise ValueError(f"{name} class indices must be contiguous from 0")
    return int(classes.size)


def one_vs_all_eval(
    train_features: np.ndarray,
    train_labels: np.ndarray,
    test_features: np.ndarray,
    test_labels: np.ndarray,
    config,
    runs: int = 5,
    seed: int = 0,
) -> OneVsAllReport:
    """One-vs-all anomaly protocol over C classes.

    For each class c a detector is fitted on the class-c training rows;
    inliers are the class-c test rows and outliers an equal-count sample,
    without replacement, from the other classes' test rows. Run r draws
    outliers with seed ``seed + r``. AUROCs are averaged over runs, then
    over classes.
    """
    from .detectors import fit_detector

    train_labels = np.asarray(train_labels)
    test_labels = np.asarray(test_labels)
    n_classes = _check_classes(train_labels, "train")
    n_classes_test = _check_classes(test_labels, "test")
    if n_classes < 2:
        raise ValueError(f"one-vs-all needs at least 2 classes, got {n_classes}")
    if n_classes_test != n_classes:
        raise ValueError(
            f"train has {n_classes} classes but test has {n_classes_test}"
        )
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")

    per_run = np.empty((runs, n_classes), dtype=np.float64)
    for c in range(n_classes):
        detector = fit_detector(train_features[train_labels == c], config)
        scores = detector.score_batch(test_features)
        inlier_idx = np.flatnonzero(test_labels == c)
        pool = np.flatnonzero(test_labels != c)
        if inlier_idx.size > pool.size:
            raise ValueError(
                f"class {c}: requested {inlier_idx.size} outliers but only "
                f"{pool.size} rows of other classes are available"
            )
        for r in range(runs):
            rng = np.random.default_rng(seed + r)
            sample = rng.choice(pool, size=inlier_idx.size, replace=False)
            per_run[r, c] = auroc(scores[inlier_idx], scores[sample])

    per_class = per_run.mean(axis=0)
    run_means = per_run.mean(axis=1)
    return OneVsAllReport(
        per_class=per_class,
        per_run=per_run,
        mean=float(per_class.mean()),
        std=float(run_means.std()),
        metadata={"runs": runs, "seed": seed},
    )


def confusion_matrix_eval(
    test_features: np.ndarray,
    test_labels: np.ndarray,
    detectors,
) -> np.ndarray:
    """Pairwise AUROC matrix: entry (r, c) uses the class-r detector with
    class r as inliers and class c as outliers; the diagonal is NaN.
    """
    test_labels = np.asarray(test_labels)
    n_classes = _check_classes(test_labels, "test")
    if len(detectors) != n_classes:
        raise ValueError(
            f"need one detector per class: got {len(detectors)} for {n_classes} classes"
        )
    matrix = np.full((n_classes, n_classes), np.nan)
    for r in range(n_classes):
        scores = detectors[r].score_batch(test_features)
        inlier = scores[test_labels == r]
        for c in range(n_classes):
            if c == r:
                continue
            matrix[r, c] = auroc(inlier, scores[test_labels == c])
    return matrix


# -- report serialization ------------------------------------------------


def _pct(value: float) -> str:
    return f"{100.0 * value:.1f}"


def format_ood_report(report: ScoreReport) -> str:
    lines = [
        f"detector {report.detector_id}",
        f"inliers {report.inlier_scores.size}",
        f"outliers {report.outlier_scores.size}",
        f"AUROC {_pct(report.auroc)}",
    ]
    return "\n".join(lines)


def ood_report_json(report: ScoreReport) -> str:
    payload = {
        "detector": report.detector_id,
        "auroc": report.auroc,
        "n_inlier": int(report.inlier_scores.size),
        "n_outlier": int(report.outlier_scores.size),
        "inlier_scores": report.inlier_scores.tolist(),
        "outlier_scores": report.outlier_scores.tolist(),
        "metadata": report.metadata,
    }
    return json.dumps(payload, sort_keys=True)


def format_one_vs_all_table(report: OneVsAllReport) -> str:
    lines = ["class  auroc"]
    for c, value in enumerate(report.per_class):
        lines.append(f"{c:<5d}  {_pct(value)}")
    lines.append(f"mean   {_pct(report.mean)}")
    lines.append(f"std    {100.0 * report.std:.2f}")
    return "\n".join(lines)


def one_vs_all_json(report: OneVsAllReport) -> str:
    payload = {
        "per_class": report.per_class.tolist(),
        "per_run": report.per_run.tolist(),
        "mean": report.mean,
        "std": report.std,
        "metadata": report.metadata,
    }
    return json.dumps(payload, sort_keys=True)


def format_confusion_table(matrix: np.ndarray) -> str:
    n = matrix.shape[0]
    header = "in\\out " + " ".join(f"{c:>6d}" for c in range(n)) + "   mean"
    lines = [header]
    for r in range(n):
        cells = []
        for c in range(n):
            cells.append("     -" if r == c else f"{_pct(matrix[r, c]):>6}")
        row_mean = np.nanmean(matrix[r])
        lines.append(f"{r:<6d} " + " ".join(cells) + f" {_pct(row_mean):>6}")
    return "\n".join(lines)
