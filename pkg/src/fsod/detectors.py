"""Detector factory and model-directory serialization dispatch.

Every detector exposes score_batch(features) -> scores (higher = more
outlier-like), a scalar score(z), kind, and detector_id, so the evaluation
protocols and the CLI can treat them uniformly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .config import RunConfig
from .fvec import read_features, write_features
from .kmeans import kmeans_fit
from .mahalanobis import MahalanobisModel, fit_gaussian_stats, load_model, save_model
from .nonparametric import (
    CosineIndex,
    KdeModel,
    build_cosine_index,
    fit_kde,
    kde_bandwidth_grid,
)

Detector = MahalanobisModel | KdeModel | CosineIndex


def default_bandwidth_grid(features: np.ndarray) -> list[float]:
    """Geometric grid around the features' average per-coordinate spread."""
    x = np.asarray(features, dtype=np.float64)
    base = float(np.sqrt(x.var(axis=0).mean()))
    if base <= 0.0:
        base = 1.0
    return [base * f for f in (0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0)]


def fit_detector(features: np.ndarray, config: RunConfig) -> Detector:
    """Fit the detector named by the config on the training features."""
    config.validate()
    if config.detector == "mahalanobis":
        clusters = kmeans_fit(features, config.components, seed=config.seed)
        return fit_gaussian_stats(
            features, clusters, mode=config.cov_mode, shrinkage=config.shrinkage
        )
    if config.detector == "kde":
        bandwidth = config.bandwidth
        if bandwidth is None:
            bandwidth = kde_bandwidth_grid(
                features, default_bandwidth_grid(features), seed=config.seed
            )
        return fit_kde(features, bandwidth)
    return build_cosine_index(features)


def save_detector(detector: Detector, directory: str | Path) -> None:
    directory = Path(directory)
    if isinstance(detector, MahalanobisModel):
        save_model(detector, directory)
        return
    directory.mkdir(parents=True, exist_ok=True)
    if isinstance(detector, KdeModel):
        write_features(detector.train, directory / "train.fvec")
        meta = f"format=kde-model\nbandwidth={detector.bandwidth!r}\n"
    else:
        write_features(detector.unit, directory / "index.fvec")
        meta = f"format=cosine-model\ndropped={detector.dropped}\n"
    (directory / "metadata.txt").write_text(meta)


def _read_metadata(directory: Path) -> dict[str, str]:
    path = directory / "metadata.txt"
    if not path.is_file():
        raise ValueError(f"{directory}: not a model directory (no metadata.txt)")
    pairs = {}
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        pairs[key.strip()] = value.strip()
    return pairs


def load_detector(directory: str | Path) -> Detector:
    directory = Path(directory)
    fmt = _read_metadata(directory).get("format")
    if fmt == "mahalanobis-model":
        return load_model(directory)
    if fmt == "kde-model":
        meta = _read_metadata(directory)
        train = read_features(directory / "train.fvec")
        return fit_kde(train, float(meta["bandwidth"]))
    if fmt == "cosine-model":
        meta = _read_metadata(directory)
        # unit rows round-trip through float32; renormalize to restore the invariant
        index = build_cosine_index(read_features(directory / "index.fvec"))
        return CosineIndex(unit=index.unit, dropped=int(meta.get("dropped", "0")))
    raise ValueError(f"{directory}: unknown model format {fmt!r}")
