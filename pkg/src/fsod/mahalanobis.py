"""Cluster-conditional Gaussian modeling and min-Mahalanobis scoring.

Fits per-cluster means plus a tied (pooled within-cluster, 1/N) or
per-cluster (1/N_m) covariance, shrinks with lambda * cbar * I before a
Cholesky factorization, and scores a sample by the minimum squared
Mahalanobis distance over clusters. Higher score = more outlier-like.

All statistics accumulate in float64 regardless of the float32 storage
precision of the input features. Scores are evaluated through two
triangular solves against the stored factor; no covariance is ever
explicitly inverted.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import solve_triangular

from .fvec import read_features, write_features
from .kmeans import ClusterModel

MODES = ("tied", "percluster")


@dataclass(frozen=True)
class MahalanobisModel:
    """Fitted detector: cluster means plus Cholesky factor(s) of the shrunk covariance.

    factors has shape (1, D, D) in tied mode and (M, D, D) in per-cluster
    mode; each factor L is lower-triangular with strictly positive diagonal
    and satisfies L @ L.T = cov + shrinkage * cbar * I, where cbar is the
    mean diagonal of that covariance (fallback 1 when the diagonal is zero).
    """

    means: np.ndarray
    factors: np.ndarray
    mode: str
    shrinkage: float
    counts: np.ndarray

    kind = "mahalanobis"

    @property
    def n_clusters(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def detector_id(self) -> str:
        return f"mahalanobis-{self.mode}-m{self.n_clusters}"

    def score(self, z: np.ndarray) -> float:
        return mahalanobis_score(self, z)

    def score_batch(self, features: np.ndarray) -> np.ndarray:
        return score_batch(self, features)


def gaussian_stats(
    features: np.ndarray,
    assignments: np.ndarray,
    n_clusters: int,
    mode: str = "tied",
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cluster-conditional means and maximum-likelihood covariance(s).

    Returns (means, covs, counts): means is (M, D); covs is (1, D, D) holding
    the pooled within-cluster covariance (normalized by N, not N-1) in tied
    mode, or (M, D, D) with per-cluster 1/N_m covariances otherwise.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {x.shape}")
    a = np.asarray(assignments)
    n, d = x.shape
    if a.shape != (n,):
        raise ValueError(f"assignments must cover all {n} rows, got shape {a.shape}")
    if a.min() < 0 or a.max() >= n_clusters:
        raise ValueError("assignment index out of range")

    counts = np.bincount(a, minlength=n_clusters)
    if (counts == 0).any():
        empty = int(np.flatnonzero(counts == 0)[0])
        raise ValueError(f"cluster {empty} is empty")
    if mode == "percluster" and (counts < 2).any():
        small = int(np.flatnonzero(counts < 2)[0])
        raise ValueError(
            f"per-cluster covariance needs at least 2 samples per cluster, "
            f"cluster {small} has {counts[small]}"
        )

    means = np.empty((n_clusters, d), dtype=np.float64)
    for m in range(n_clusters):
        means[m] = x[a == m].mean(axis=0)

    if mode == "tied":
        pooled = np.zeros((d, d), dtype=np.float64)
        for m in range(n_clusters):
            centered = x[a == m] - means[m]
            pooled += centered.T @ centered
        covs = pooled[None, :, :] / n
    else:
        covs = np.empty((n_clusters, d, d), dtype=np.float64)
        for m in range(n_clusters):
            centered = x[a == m] - means[m]
            covs[m] = centered.T @ centered / counts[m]
    return means, covs, counts


def shrink_and_factor(cov: np.ndarray, shrinkage: float) -> np.ndarray:
    """Cholesky factor of cov + shrinkage * cbar * I.

    cbar is the mean diagonal of cov, with fallback 1 when it is zero
    (all samples identical), so the shrunk matrix is positive definite for
    any shrinkage > 0.
    """
    d = cov.shape[0]
    cbar = float(np.trace(cov)) / d
    if cbar <= 0.0:
        cbar = 1.0
    shrunk = cov + (shrinkage * cbar) * np.eye(d)
    try:
        return np.linalg.cholesky(shrunk)
    except np.linalg.LinAlgError:
        smallest = float(np.linalg.eigvalsh(shrunk)[0])
        raise np.linalg.LinAlgError(
            f"covariance is not positive definite after shrinkage "
            f"(smallest eigenvalue ~ {smallest:.3e}); increase shrinkage"
        ) from None


def fit_gaussian_stats(
    features: np.ndarray,
    clusters: ClusterModel,
    mode: str = "tied",
    shrinkage: float = 1e-3,
) -> MahalanobisModel:
    """Fit the min-Mahalanobis detector on clustered training features."""
    if shrinkage < 0:
        raise ValueError(f"shrinkage must be >= 0, got {shrinkage}")
    means, covs, counts = gaussian_stats(
        features, clusters.assignments, clusters.n_clusters, mode
    )
    factors = np.stack([shrink_and_factor(c, shrinkage) for c in covs])
    return MahalanobisModel(
        means=means, factors=factors, mode=mode, shrinkage=shrinkage, counts=counts
    )


def score_batch(model: MahalanobisModel, features: np.ndarray) -> np.ndarray:
    """Minimum squared Mahalanobis distance per row (no square root, Eq.-2 form)."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.dim:
        raise ValueError(
            f"expected features of shape (N, {model.dim}), got {x.shape}"
        )
    per_cluster = np.empty((model.n_clusters, x.shape[0]), dtype=np.float64)
    for m in range(model.n_clusters):
        factor = model.factors[0] if model.factors.shape[0] == 1 else model.factors[m]
        diff = (x - model.means[m]).T
        y = solve_triangular(factor, diff, lower=True, check_finite=False)
        per_cluster[m] = np.einsum("dn,dn->n", y, y)
    return per_cluster.min(axis=0)


def mahalanobis_score(model: MahalanobisModel, z: np.ndarray) -> float:
    """Scalar form of :func:`score_batch`; bit-identical to a single-row batch."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (model.dim,):
        raise ValueError(f"expected a vector of dimension {model.dim}, got shape {z.shape}")
    return float(score_batch(model, z[None, :])[0])


def save_model(model: MahalanobisModel, directory: str | Path) -> None:
    """Serialize to a directory: means.fvec, factor file(s), metadata.txt."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_features(model.means, directory / "means.fvec")
    if model.mode == "tied":
        write_features(model.factors[0], directory / "factor_tied.fvec")
    else:
        for m in range(model.n_clusters):
            write_features(model.factors[m], directory / f"factor_{m:03d}.fvec")
    counts = ",".join(str(int(c)) for c in model.counts)
    meta = (
        "format=mahalanobis-model\n"
        f"mode={model.mode}\n"
        f"shrinkage={model.shrinkage!r}\n"
        f"dim={model.dim}\n"
        f"components={model.n_clusters}\n"
        f"counts={counts}\n"
    )
    (directory / "metadata.txt").write_text(meta)


def _read_metadata(path: Path) -> dict[str, str]:
    pairs = {}
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        pairs[key.strip()] = value.strip()
    return pairs


def load_model(directory: str | Path) -> MahalanobisModel:
    """Load a serialized detector.

    Factors pass through float32 storage, so reloaded scores match the
    in-memory model only to storage precision.
    """
    directory = Path(directory)
    meta = _read_metadata(directory / "metadata.txt")
    if meta.get("format") != "mahalanobis-model":
        raise ValueError(f"{directory}: not a mahalanobis model directory")
    mode = meta["mode"]
    if mode not in MODES:
        raise ValueError(f"{directory}: unknown covariance mode {mode!r}")
    n_clusters = int(meta["components"])
    means = np.asarray(read_features(directory / "means.fvec"), dtype=np.float64)
    if mode == "tied":
        factor_files = [directory / "factor_tied.fvec"]
    else:
        factor_files = [directory / f"factor_{m:03d}.fvec" for m in range(n_clusters)]
    factors = np.stack(
        [np.asarray(read_features(f), dtype=np.float64) for f in factor_files]
    )
    counts = np.asarray([int(c) for c in meta["counts"].split(",")], dtype=np.int64)
    model = MahalanobisModel(
        means=means,
        factors=factors,
        mode=mode,
        shrinkage=float(meta["shrinkage"]),
        counts=counts,
    )
    if means.shape[0] != n_clusters or counts.shape[0] != n_clusters:
        raise ValueError(f"{directory}: component count mismatch")
    return model
