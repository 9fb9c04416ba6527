"""Acceptance gate: every criterion prints one [PASS]/[FAIL] line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines live;
without -s they appear in the captured output of failing tests.
"""

import time

import numpy as np

from fsod.detectors import default_bandwidth_grid
from fsod.evaluation import auroc
from fsod.kmeans import kmeans_fit
from fsod.mahalanobis import (
    MahalanobisModel,
    fit_gaussian_stats,
    gaussian_stats,
    score_batch,
)
from fsod.nonparametric import build_cosine_index, fit_kde, kde_bandwidth_grid
from fsod.preprocess import linear_score_gradient, perturb_input, resample
from fsod.kmeans import ClusterModel

from oracles import (
    auroc_pair_count_outer,
    bilinear_scalar,
    gaussian_stats_direct,
    min_mahalanobis_explicit,
)


def report(name: str, ok: bool, detail: str = "") -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name} {detail}".rstrip())
    assert ok, f"{name}: {detail}"


def cluster_model(x, assignments, n_clusters):
    centers = np.array([x[assignments == m].mean(axis=0) for m in range(n_clusters)])
    return ClusterModel(
        n_clusters=n_clusters,
        centers=centers,
        assignments=np.asarray(assignments),
        inertia=0.0,
    )


def test_auroc_oracle_equivalence():
    started = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(500):
        n_in = int(rng.integers(1, 201))
        n_out = int(rng.integers(1, 201))
        # integer grid forces plenty of ties
        inl = rng.integers(0, 12, size=n_in).astype(np.float64)
        out = rng.integers(0, 12, size=n_out).astype(np.float64)
        worst = max(worst, abs(auroc(inl, out) - auroc_pair_count_outer(inl, out)))
    elapsed = time.perf_counter() - started
    report(
        "auroc-oracle-equivalence",
        worst <= 1e-12 and elapsed < 5.0,
        f"max_abs_err={worst:.2e} elapsed={elapsed:.2f}s",
    )


def test_mahalanobis_oracle_equivalence():
    started = time.perf_counter()
    rng = np.random.default_rng(202)
    worst = 0.0
    for case in range(100):
        d = int(rng.integers(2, 9))
        m = int(rng.integers(1, 5))
        n = 40 * m + 10 * d
        x = rng.normal(size=(n, d)) @ (rng.normal(size=(d, d)) + 2.0 * np.eye(d))
        assignments = np.concatenate([np.arange(m), rng.integers(0, m, size=n - m)])
        mode = "percluster" if case % 2 else "tied"
        model = fit_gaussian_stats(
            x, cluster_model(x, assignments, m), mode=mode, shrinkage=1e-6
        )
        shrunk = np.array([factor @ factor.T for factor in model.factors])
        queries = rng.normal(scale=3.0, size=(4, d))
        scores = score_batch(model, queries)
        for i, z in enumerate(queries):
            want = min_mahalanobis_explicit(model.means, shrunk, z)
            worst = max(worst, abs(scores[i] - want) / max(abs(want), 1e-300))
    elapsed = time.perf_counter() - started
    report(
        "mahalanobis-oracle-equivalence",
        worst <= 1e-9 and elapsed < 5.0,
        f"max_rel_err={worst:.2e} elapsed={elapsed:.2f}s",
    )


def test_cluster_stats_formula():
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(1, 17))
        m = int(rng.integers(1, 5))
        n = int(rng.integers(m * 3, 150))
        x = rng.normal(size=(n, d))
        assignments = np.concatenate([np.arange(m), rng.integers(0, m, size=n - m)])
        means, covs, _ = gaussian_stats(x, assignments, m, mode="tied")
        oracle_means, oracle_covs = gaussian_stats_direct(x, assignments, m, "tied")
        worst = max(worst, float(np.abs(means - oracle_means).max()))
        worst = max(worst, float(np.abs(covs[0] - oracle_covs[0]).max()))
    report("cluster-stats-formula", worst <= 1e-12, f"max_abs_err={worst:.2e}")


def test_kmeans_monotone_and_blob_recovery():
    rng = np.random.default_rng(404)
    monotone = True
    for seed in range(100):
        n = int(rng.integers(8, 60))
        d = int(rng.integers(1, 7))
        m = int(rng.integers(1, min(n, 9)))
        x = np.random.default_rng(seed).normal(size=(n, d))
        trace = kmeans_fit(x, m, seed=seed).inertia_trace
        monotone = monotone and all(b <= a for a, b in zip(trace, trace[1:]))

    blob_rng = np.random.default_rng(505)
    a = blob_rng.normal(size=(40, 2))
    b = blob_rng.normal(size=(40, 2)) + np.array([100.0, 100.0])
    model = kmeans_fit(np.vstack([a, b]), 2, seed=0)
    got = np.array(sorted(model.centers.tolist()))
    want = np.array(sorted([a.mean(axis=0).tolist(), b.mean(axis=0).tolist()]))
    centroid_err = float(np.abs(got - want).max())
    report(
        "kmeans-monotone-and-blobs",
        monotone and centroid_err <= 1e-9,
        f"monotone={monotone} centroid_err={centroid_err:.2e}",
    )


def test_synthetic_end_to_end():
    started = time.perf_counter()
    rng = np.random.default_rng(2024)
    d, m, per_component, n_test = 32, 4, 500, 800

    component_means = rng.normal(scale=3.0, size=(m, d))
    train = component_means[rng.integers(0, m, size=per_component * m)] + rng.normal(
        size=(per_component * m, d)
    )
    inliers = component_means[rng.integers(0, m, size=n_test)] + rng.normal(
        size=(n_test, d)
    )
    # outlier cloud centered 6 within-component sigmas away from the mixture
    # mean, off the component structure (unit within-component sigma)
    direction = rng.normal(size=d)
    direction /= np.linalg.norm(direction)
    outliers = (
        component_means.mean(axis=0)
        + 6.0 * direction
        + rng.normal(size=(n_test, d))
    )

    clusters = kmeans_fit(train, m, seed=0)
    maha = fit_gaussian_stats(train, clusters, mode="tied")
    auroc_maha = auroc(maha.score_batch(inliers), maha.score_batch(outliers))

    bandwidth = kde_bandwidth_grid(train, default_bandwidth_grid(train), seed=0)
    kde = fit_kde(train, bandwidth)
    auroc_kde = auroc(kde.score_batch(inliers), kde.score_batch(outliers))

    cosine = build_cosine_index(train)
    auroc_cos = auroc(cosine.score_batch(inliers), cosine.score_batch(outliers))

    elapsed = time.perf_counter() - started
    report(
        "synthetic-end-to-end",
        auroc_maha >= 0.99 and auroc_kde >= 0.95 and auroc_cos >= 0.95 and elapsed < 30,
        f"mahalanobis={auroc_maha:.4f} kde={auroc_kde:.4f} cosine={auroc_cos:.4f} "
        f"elapsed={elapsed:.1f}s",
    )


def test_tied_beats_percluster_in_small_samples():
    d, m, per_cluster, n_test, shift = 64, 4, 40, 400, 4.0
    wins = 0
    pairs = []
    for seed in range(10):
        rng = np.random.default_rng(seed)
        cov_root = rng.normal(size=(d, d)) / np.sqrt(d)  # shared true covariance
        means = rng.normal(scale=6.0, size=(m, d))

        def draw(n):
            return means[rng.integers(0, m, size=n)] + rng.normal(size=(n, d)) @ cov_root.T

        train, inliers = draw(per_cluster * m), draw(n_test)
        direction = rng.normal(size=d)
        direction /= np.linalg.norm(direction)
        outliers = draw(n_test) + shift * direction

        clusters = kmeans_fit(train, m, seed=seed)
        values = {}
        for mode in ("tied", "percluster"):
            model = fit_gaussian_stats(train, clusters, mode=mode, shrinkage=1e-3)
            values[mode] = auroc(model.score_batch(inliers), model.score_batch(outliers))
        wins += values["tied"] >= values["percluster"]
        pairs.append((values["tied"], values["percluster"]))
    report(
        "tied-vs-percluster-ordering",
        wins >= 9,
        f"tied_wins={wins}/10 first_pair=({pairs[0][0]:.3f},{pairs[0][1]:.3f})",
    )


def test_resampling_criteria():
    constant_ok = True
    for kernel in ("nearest", "bilinear", "cubic", "lanczos"):
        out = resample(np.full((7, 5, 3), 0.5), 13, 11, kernel)
        constant_ok = constant_ok and bool(np.abs(out - 0.5).max() <= 1e-6)

    rng = np.random.default_rng(606)
    worst = 0.0
    for _ in range(50):
        in_h, in_w = int(rng.integers(1, 14)), int(rng.integers(1, 14))
        out_h, out_w = int(rng.integers(1, 14)), int(rng.integers(1, 14))
        img = rng.uniform(size=(in_h, in_w, int(rng.choice([1, 3]))))
        got = resample(img, out_h, out_w, "bilinear")
        worst = max(worst, float(np.abs(got - bilinear_scalar(img, out_h, out_w)).max()))
    report(
        "resampling-constant-and-bilinear-oracle",
        constant_ok and worst <= 1e-6,
        f"constant_ok={constant_ok} bilinear_max_err={worst:.2e}",
    )


def test_perturbation_strictly_decreases_quadratic():
    failures = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        pixels, feature_dim = 8, 4
        weights = rng.normal(size=(feature_dim, pixels))
        root = rng.normal(size=(feature_dim, feature_dim))
        cov = root @ root.T + 0.5 * np.eye(feature_dim)
        mean = rng.normal(size=feature_dim)
        model = MahalanobisModel(
            means=mean[None, :],
            factors=np.linalg.cholesky(cov)[None, :, :],
            mode="tied",
            shrinkage=0.0,
            counts=np.array([1]),
        )
        image = rng.uniform(0.3, 0.7, size=(2, 4, 1))
        provider = linear_score_gradient(weights, model)

        def dist(img):
            diff = weights @ img.ravel() - mean
            return float(diff @ np.linalg.inv(cov) @ diff)

        grad = provider(image)
        sign = np.sign(grad.ravel())
        curvature = float(sign @ weights.T @ np.linalg.inv(cov) @ weights @ sign)
        threshold = float(np.abs(grad).sum()) / curvature
        epsilon = min(0.9 * threshold, 0.2)  # stays inside [0,1]: no clamping
        if not dist(perturb_input(image, provider, epsilon)) < dist(image):
            failures += 1
    report(
        "perturbation-strict-decrease",
        failures == 0,
        f"failures={failures}/100",
    )
