"""K-means partitioning of training features (Lloyd + k-means++ init).

Determinism contract: for a fixed seed and input the result is
bit-reproducible on one platform and value-reproducible across platforms.
All randomness flows through one numpy PCG64 generator seeded from the
caller's seed (``default_rng``: fixed, platform-independent stream with
splitmix-style seed expansion via SeedSequence).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fvec import read_features, write_features
from .manifest import read_labels, write_labels


@dataclass(frozen=True)
class ClusterModel:
    """K-means fit result.

    centers is (M, D) float64; assignments is (N,) with values < M; inertia
    is the sum of squared distances of every row to its assigned center.
    inertia_trace records the objective after each Lloyd update (monotone
    non-increasing). No cluster is empty.
    """

    n_clusters: int
    centers: np.ndarray
    assignments: np.ndarray
    inertia: float
    inertia_trace: tuple[float, ...] = field(default=(), repr=False)

    @property
    def dim(self) -> int:
        return self.centers.shape[1]


def _pairwise_sq_dists(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """(N, M) squared Euclidean distances, clamped at 0."""
    sq = (
        np.einsum("nd,nd->n", x, x)[:, None]
        - 2.0 * (x @ centers.T)
        + np.einsum("md,md->m", centers, centers)[None, :]
    )
    return np.maximum(sq, 0.0)


def _kmeanspp_init(x: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: first center uniform, the rest D²-weighted."""
    n = x.shape[0]
    centers = np.empty((m, x.shape[1]), dtype=np.float64)
    centers[0] = x[rng.integers(n)]
    closest = _pairwise_sq_dists(x, centers[:1])[:, 0]
    for k in range(1, m):
        total = closest.sum()
        if total > 0.0:
            idx = rng.choice(n, p=closest / total)
        else:
            # all points coincide with chosen centers (duplicate-heavy data)
            idx = rng.integers(n)
        centers[k] = x[idx]
        closest = np.minimum(closest, _pairwise_sq_dists(x, centers[k : k + 1])[:, 0])
    return centers


def _repair_empty(
    new_assign: np.ndarray, closest: np.ndarray, n_clusters: int
) -> np.ndarray:
    """Reseed every empty cluster to the point farthest from its center.

    Repaired points are pinned (distance set to -inf) so they are never
    stolen again; each cluster is repaired at most once, so this terminates
    even on fully degenerate data.
    """
    counts = np.bincount(new_assign, minlength=n_clusters)
    while (counts == 0).any():
        m = int(np.flatnonzero(counts == 0)[0])
        far = int(np.argmax(closest))
        counts[new_assign[far]] -= 1
        counts[m] += 1
        new_assign[far] = m
        closest[far] = -np.inf
    return counts


def kmeans_fit(
    features: np.ndarray,
    n_clusters: int,
    seed: int = 0,
    max_iter: int = 300,
    rel_tol: float = 1e-6,
) -> ClusterModel:
    """Partition feature rows into ``n_clusters`` clusters with Lloyd's algorithm.

    Iterates until the relative inertia improvement drops below ``rel_tol``,
    the assignments stop changing, or ``max_iter`` is reached. Empty clusters
    are repaired by reseeding them to the point currently farthest from its
    assigned center, so the returned model never has an empty cluster and
    each center equals the mean of its assigned rows.
    """
    x = np.ascontiguousarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {x.shape}")
    n = x.shape[0]
    if n_clusters < 1:
        raise ValueError(f"n_clusters must be >= 1, got {n_clusters}")
    if n_clusters > n:
        raise ValueError(f"n_clusters {n_clusters} exceeds row count {n}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")

    rng = np.random.default_rng(seed)
    centers = _kmeanspp_init(x, n_clusters, rng)

    assignments = np.full(n, -1, dtype=np.int64)
    trace: list[float] = []
    prev_inertia = np.inf
    for _ in range(max_iter):
        sq = _pairwise_sq_dists(x, centers)
        new_assign = np.argmin(sq, axis=1)  # ties -> lowest index
        closest = sq[np.arange(n), new_assign]
        _repair_empty(new_assign, closest, n_clusters)

        for m in range(n_clusters):
            centers[m] = x[new_assign == m].mean(axis=0)

        diff = x - centers[new_assign]
        inertia = float(np.einsum("nd,nd->", diff, diff))
        trace.append(inertia)

        converged = (new_assign == assignments).all() or (
            np.isfinite(prev_inertia)
            and prev_inertia - inertia <= rel_tol * prev_inertia
        )
        assignments = new_assign
        prev_inertia = inertia
        if converged:
            break

    return ClusterModel(
        n_clusters=n_clusters,
        centers=centers,
        assignments=assignments,
        inertia=prev_inertia,
        inertia_trace=tuple(trace),
    )


def assign(model: ClusterModel, z: np.ndarray) -> int:
    """Index of the nearest center in Euclidean distance; ties -> lowest index."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (model.dim,):
        raise ValueError(f"expected a vector of dimension {model.dim}, got shape {z.shape}")
    diff = model.centers - z[None, :]
    return int(np.argmin(np.einsum("md,md->m", diff, diff)))


def save_cluster_model(model: ClusterModel, directory: str | Path) -> None:
    """Serialize centers to FVEC plus an assignments sidecar."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_features(model.centers, directory / "centers.fvec")
    write_labels(model.assignments, directory / "assignments.txt")


def load_cluster_model(
    directory: str | Path, features: np.ndarray | None = None
) -> ClusterModel:
    """Load a serialized cluster model.

    Inertia is recomputed when the training features are supplied, NaN
    otherwise (it is not stored in the serialized form).
    """
    directory = Path(directory)
    centers = np.asarray(read_features(directory / "centers.fvec"), dtype=np.float64)
    assignments = read_labels(directory / "assignments.txt")
    if assignments.min() < 0 or assignments.max() >= centers.shape[0]:
        raise ValueError(f"{directory}: assignment index out of range")
    inertia = float("nan")
    if features is not None:
        x = np.asarray(features, dtype=np.float64)
        diff = x - centers[assignments]
        inertia = float(np.einsum("nd,nd->", diff, diff))
    return ClusterModel(
        n_clusters=centers.shape[0],
        centers=centers,
        assignments=assignments,
        inertia=inertia,
    )
