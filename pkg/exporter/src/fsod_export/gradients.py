"""Input perturbation with real network gradients.

Reads a fitted Mahalanobis model directory (the detector library's
serialized form), differentiates the min-distance score through the
backbone with autograd, applies x_hat = clamp(x - eps * sign(grad), 0, 1)
in pixel space, and re-extracts features of the perturbed inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .backbones import FeatureExtractor
from .export import decode_image, list_images, pixel_batch, write_export
from .fvec import read_fvec


@dataclass(frozen=True)
class DistanceModel:
    """means + lower Cholesky factors of the shrunk covariance(s)."""

    means: np.ndarray  # (M, D)
    factors: np.ndarray  # (1 or M, D, D)
    mode: str


def read_model_dir(directory) -> DistanceModel:
    directory = Path(directory)
    meta_path = directory / "metadata.txt"
    if not meta_path.is_file():
        raise FileNotFoundError(f"not a model directory: {directory}")
    meta = dict(
        line.split("=", 1)
        for line in meta_path.read_text().splitlines()
        if "=" in line
    )
    if meta.get("format") != "mahalanobis-model":
        raise ValueError(f"{directory}: perturbation needs a mahalanobis model")
    means = read_fvec(directory / "means.fvec").astype(np.float64)
    mode = meta["mode"]
    if mode == "tied":
        factor_paths = [directory / "factor_tied.fvec"]
    else:
        factor_paths = sorted(directory.glob("factor_*.fvec"))
    factors = np.stack([read_fvec(p).astype(np.float64) for p in factor_paths])
    return DistanceModel(means=means, factors=factors, mode=mode)


def min_distance(z: torch.Tensor, means: torch.Tensor, factors: torch.Tensor) -> torch.Tensor:
    """Per-sample minimum squared Mahalanobis distance (differentiable)."""
    quads = []
    for m in range(means.shape[0]):
        factor = factors[0] if factors.shape[0] == 1 else factors[m]
        diff = (z - means[m]).T  # (D, B)
        half = torch.linalg.solve_triangular(factor, diff, upper=False)
        quads.append((half * half).sum(dim=0))
    return torch.stack(quads).min(dim=0).values


def perturb_batch(
    extractor: FeatureExtractor,
    pixels: torch.Tensor,
    means: torch.Tensor,
    factors: torch.Tensor,
    epsilon: float,
) -> torch.Tensor:
    """One gradient-sign step against the distance score, clamped to [0,1]."""
    if epsilon == 0.0:
        return pixels
    x = pixels.clone().requires_grad_(True)
    score = min_distance(extractor(x), means, factors).sum()
    score.backward()
    with torch.no_grad():
        return torch.clamp(x - epsilon * torch.sign(x.grad), 0.0, 1.0)


def perturb_array_features(
    images: np.ndarray,
    extractor: FeatureExtractor,
    model_dir,
    epsilon: float,
    out_path,
    batch_size: int = 16,
    kernel: str = "cubic",
) -> np.ndarray:
    """Array-input variant of :func:`export_score_gradients`."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    stack = np.asarray(images)
    if stack.ndim != 4 or stack.shape[3] != 3 or stack.shape[0] < 1:
        raise ValueError(f"expected (N, H, W, 3) images, got shape {stack.shape}")
    model = read_model_dir(model_dir)
    means = torch.from_numpy(model.means).float()
    factors = torch.from_numpy(model.factors).float()
    rows = []
    for start in range(0, stack.shape[0], batch_size):
        pixels = pixel_batch(list(stack[start : start + batch_size]), kernel)
        perturbed = perturb_batch(extractor, pixels, means, factors, epsilon)
        rows.append(extractor.extract(perturbed).cpu().numpy().astype(np.float32))
    features = np.vstack(rows)
    names = [str(i) for i in range(features.shape[0])]
    write_export(features, names, [], extractor, kernel, out_path)
    return features


def export_score_gradients(
    image_dir,
    extractor: FeatureExtractor,
    model_dir,
    epsilon: float,
    out_path,
    batch_size: int = 16,
    kernel: str = "cubic",
) -> np.ndarray:
    """Write features of perturbed inputs; epsilon 0 reproduces plain export."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    model = read_model_dir(model_dir)
    if model.means.shape[1] != extractor.spec.output_dim:
        raise ValueError(
            f"model dimension {model.means.shape[1]} does not match backbone "
            f"output {extractor.spec.output_dim}"
        )
    means = torch.from_numpy(model.means).float()
    factors = torch.from_numpy(model.factors).float()

    paths = list_images(image_dir)
    kept, skipped, rows = [], [], []
    pending = []

    def flush():
        if not pending:
            return
        pixels = pixel_batch(pending, kernel)
        perturbed = perturb_batch(extractor, pixels, means, factors, epsilon)
        rows.append(extractor.extract(perturbed).cpu().numpy().astype(np.float32))
        pending.clear()

    for path in paths:
        try:
            pending.append(decode_image(path))
        except OSError:
            skipped.append(path.name)
            continue
        kept.append(path.name)
        if len(pending) == batch_size:
            flush()
    flush()
    if not rows:
        raise ValueError(f"no decodable images in {image_dir}")
    features = np.vstack(rows)
    write_export(features, kept, skipped, extractor, kernel, out_path)
    return features
