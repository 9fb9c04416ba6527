"""Non-parametric baseline detectors: Gaussian-kernel KDE and max-cosine.

Both are exact brute-force evaluations over the stored training set
(no approximate index) and return scores where higher = more outlier-like.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .evaluation import auroc


@dataclass(frozen=True)
class KdeModel:
    """Gaussian KDE over the training features with isotropic bandwidth h."""

    train: np.ndarray
    bandwidth: float

    kind = "kde"

    @property
    def dim(self) -> int:
        return self.train.shape[1]

    @property
    def detector_id(self) -> str:
        return f"kde-h{self.bandwidth:g}"

    def score(self, z: np.ndarray) -> float:
        return kde_score(self, z)

    def score_batch(self, features: np.ndarray) -> np.ndarray:
        return kde_score_batch(self, features)


def fit_kde(features: np.ndarray, bandwidth: float) -> KdeModel:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("training features must be finite")
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be > 0, got {bandwidth}")
    return KdeModel(train=x, bandwidth=float(bandwidth))


def _sq_dists(train: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """(Q, N) squared Euclidean distances, clamped at 0."""
    sq = (
        np.einsum("qd,qd->q", queries, queries)[:, None]
        - 2.0 * (queries @ train.T)
        + np.einsum("nd,nd->n", train, train)[None, :]
    )
    return np.maximum(sq, 0.0)


def kde_score_batch(model: KdeModel, features: np.ndarray) -> np.ndarray:
    """Negative log KDE density per row, via log-sum-exp.

    score(z) = -log[(1/N) sum_i exp(-||z - z_i||^2 / 2h^2)] + (D/2) log(2 pi h^2)
    """
    q = np.asarray(features, dtype=np.float64)
    if q.ndim != 2 or q.shape[1] != model.dim:
        raise ValueError(f"expected features of shape (N, {model.dim}), got {q.shape}")
    h2 = model.bandwidth**2
    n, d = model.train.shape
    log_kernel_sum = logsumexp(-_sq_dists(model.train, q) / (2.0 * h2), axis=1)
    return (
        np.log(n) - log_kernel_sum + 0.5 * d * np.log(2.0 * np.pi * h2)
    )


def kde_score(model: KdeModel, z: np.ndarray) -> float:
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (model.dim,):
        raise ValueError(f"expected a vector of dimension {model.dim}, got shape {z.shape}")
    return float(kde_score_batch(model, z[None, :])[0])


@dataclass(frozen=True)
class CosineIndex:
    """Unit-normalized training rows; scores by largest cosine similarity.

    Zero-norm training rows are invalid for cosine geometry and are dropped
    at build time (their count is recorded).
    """

    unit: np.ndarray
    dropped: int = 0

    kind = "cosine"

    @property
    def dim(self) -> int:
        return self.unit.shape[1]

    @property
    def detector_id(self) -> str:
        return "cosine"

    def score(self, z: np.ndarray) -> float:
        return cosine_knn_score(self, z)

    def score_batch(self, features: np.ndarray) -> np.ndarray:
        return cosine_score_batch(self, features)


def build_cosine_index(features: np.ndarray) -> CosineIndex:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {x.shape}")
    norms = np.linalg.norm(x, axis=1)
    valid = norms > 0.0
    if not valid.any():
        raise ValueError("every training row has zero norm")
    unit = x[valid] / norms[valid, None]
    return CosineIndex(unit=unit, dropped=int((~valid).sum()))


def cosine_score_batch(index: CosineIndex, features: np.ndarray) -> np.ndarray:
    """1 - max cosine similarity to the training set, in [0, 2]."""
    q = np.asarray(features, dtype=np.float64)
    if q.ndim != 2 or q.shape[1] != index.dim:
        raise ValueError(f"expected features of shape (N, {index.dim}), got {q.shape}")
    norms = np.linalg.norm(q, axis=1)
    if (norms == 0.0).any():
        row = int(np.flatnonzero(norms == 0.0)[0])
        raise ValueError(f"zero-norm query at row {row}")
    best = (q / norms[:, None]) @ index.unit.T
    return 1.0 - np.clip(best.max(axis=1), -1.0, 1.0)


def cosine_knn_score(index: CosineIndex, z: np.ndarray) -> float:
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (index.dim,):
        raise ValueError(f"expected a vector of dimension {index.dim}, got shape {z.shape}")
    return float(cosine_score_batch(index, z[None, :])[0])


def kde_bandwidth_grid(
    features: np.ndarray,
    grid,
    seed: int = 0,
    holdout_fraction: float = 0.1,
) -> float:
    """Pick the bandwidth maximizing mean held-out log-density.

    A seeded fraction of the rows is held out; each candidate h is scored by
    the average log density those rows get under a KDE built from the rest.
    Deterministic for a fixed seed; ties go to the earlier grid entry.
    """
    grid = [float(h) for h in grid]
    if not grid:
        raise ValueError("bandwidth grid is empty")
    if any(h <= 0 for h in grid):
        raise ValueError(f"bandwidth grid must be positive, got {grid}")
    if len(grid) == 1:
        return grid[0]

    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("bandwidth selection needs at least 2 feature rows")
    n = x.shape[0]
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_holdout = max(1, int(round(holdout_fraction * n)))
    n_holdout = min(n_holdout, n - 1)
    holdout, rest = x[order[:n_holdout]], x[order[n_holdout:]]

    best_h, best_loglik = grid[0], -np.inf
    for h in grid:
        loglik = float(np.mean(-kde_score_batch(fit_kde(rest, h), holdout)))
        if loglik > best_loglik:
            best_h, best_loglik = h, loglik
    return best_h


def kde_bandwidth_best_auroc(
    train: np.ndarray,
    inlier_test: np.ndarray,
    outlier_test: np.ndarray,
    grid,
) -> tuple[float, float]:
    """Sweep the grid against labeled outliers and return (h, auroc) of the best.

    This reproduces "report the best results" grid searches; it peeks at the
    labeled test split, so it is an evaluation mode, not a fitting default.
    """
    grid = [float(h) for h in grid]
    if not grid:
        raise ValueError("bandwidth grid is empty")
    if any(h <= 0 for h in grid):
        raise ValueError(f"bandwidth grid must be positive, got {grid}")
    best = None
    for h in grid:
        model = fit_kde(train, h)
        value = auroc(model.score_batch(inlier_test), model.score_batch(outlier_test))
        if best is None or value > best[1]:
            best = (h, value)
    return best
