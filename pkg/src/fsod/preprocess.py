"""Image preprocessing: separable resampling, center crop, normalization,
and gradient-sign input perturbation.

Images are (H, W, C) float arrays with values in [0, 1] and 1 or 3
channels. Resampling is separable (horizontal pass, then vertical) with
half-pixel center alignment, src = (dst + 0.5) * scale - 0.5, edge
replication, and per-output-pixel kernel-weight normalization. Outputs are
clamped back to [0, 1] (cubic and lanczos overshoot).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import solve_triangular

from .mahalanobis import MahalanobisModel

GradientProvider = Callable[[np.ndarray], np.ndarray]

# Nearest gets a tiny guard band past 0.5 so exact half-integer source
# offsets (integer scale ratios) hit both taps and average, which keeps
# resampling exactly flip-equivariant.
_NEAREST_RADIUS = 0.5 + 1e-9


def _box(t: np.ndarray) -> np.ndarray:
    return (np.abs(t) <= _NEAREST_RADIUS).astype(np.float64)


def _triangle(t: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, 1.0 - np.abs(t))


def _keys_cubic(t: np.ndarray) -> np.ndarray:
    # Keys convolution kernel with a = -0.5 (Catmull-Rom)
    a = -0.5
    at = np.abs(t)
    near = ((a + 2.0) * at - (a + 3.0)) * at * at + 1.0
    far = ((a * at - 5.0 * a) * at + 8.0 * a) * at - 4.0 * a
    return np.where(at <= 1.0, near, np.where(at < 2.0, far, 0.0))


def _lanczos3(t: np.ndarray) -> np.ndarray:
    return np.where(np.abs(t) < 3.0, np.sinc(t) * np.sinc(t / 3.0), 0.0)


_KERNELS: dict[str, tuple[float, Callable[[np.ndarray], np.ndarray]]] = {
    "nearest": (_NEAREST_RADIUS, _box),
    "bilinear": (1.0, _triangle),
    "cubic": (2.0, _keys_cubic),
    "lanczos": (3.0, _lanczos3),
}
_ALIASES = {"bicubic": "cubic", "lanczos3": "lanczos"}

KERNEL_NAMES = tuple(_KERNELS)


def canonical_kernel(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in _KERNELS:
        raise ValueError(f"unknown kernel {name!r}, expected one of {KERNEL_NAMES}")
    return name


def axis_weights(n_in: int, n_out: int, kernel: str = "cubic") -> np.ndarray:
    """(n_out, n_in) resampling weight matrix for one axis.

    Tap indices outside the image are clamped (edge replication) and each
    row is normalized to sum to 1.
    """
    if n_in < 1 or n_out < 1:
        raise ValueError(f"axis sizes must be >= 1, got {n_in} -> {n_out}")
    radius, fn = _KERNELS[canonical_kernel(kernel)]
    scale = n_in / n_out
    src = (np.arange(n_out, dtype=np.float64) + 0.5) * scale - 0.5
    lo = np.ceil(src - radius).astype(np.int64)
    taps = int(np.floor(2.0 * radius)) + 1
    rows = np.arange(n_out)
    weights = np.zeros((n_out, n_in), dtype=np.float64)
    for k in range(taps):
        j = lo + k
        w = fn(src - j)
        np.add.at(weights, (rows, np.clip(j, 0, n_in - 1)), w)
    return weights / weights.sum(axis=1, keepdims=True)


def _check_image(image: np.ndarray) -> np.ndarray:
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 3:
        raise ValueError(f"image must be (H, W, C), got shape {img.shape}")
    h, w, c = img.shape
    if h < 1 or w < 1:
        raise ValueError(f"image has a zero-sized axis: {img.shape}")
    if c not in (1, 3):
        raise ValueError(f"image must have 1 or 3 channels, got {c}")
    return img


def resample(image: np.ndarray, out_h: int, out_w: int, kernel: str = "cubic") -> np.ndarray:
    """Resample to (out_h, out_w) with the named kernel; output in [0, 1]."""
    img = _check_image(image)
    if out_h < 1 or out_w < 1:
        raise ValueError(f"output size must be >= 1, got {out_h}x{out_w}")
    wx = axis_weights(img.shape[1], out_w, kernel)
    wy = axis_weights(img.shape[0], out_h, kernel)
    horizontal = np.moveaxis(np.tensordot(img, wx, axes=(1, 1)), 1, 2)
    out = np.tensordot(wy, horizontal, axes=(1, 0))
    return np.clip(out, 0.0, 1.0)


def center_crop(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Crop the centered (out_h, out_w) window, offset floor((in - out)/2)."""
    img = _check_image(image)
    h, w = img.shape[:2]
    if out_h > h or out_w > w:
        raise ValueError(f"crop {out_h}x{out_w} exceeds image size {h}x{w}")
    if out_h < 1 or out_w < 1:
        raise ValueError(f"crop size must be >= 1, got {out_h}x{out_w}")
    top = (h - out_h) // 2
    left = (w - out_w) // 2
    return img[top : top + out_h, left : left + out_w]


def normalize_u8(raw: np.ndarray) -> np.ndarray:
    """Map an integer image with values 0..255 to floats in [0, 1] (value/255)."""
    arr = np.asarray(raw)
    if not np.issubdtype(arr.dtype, np.integer):
        raise ValueError(f"raw image must be an integer array, got dtype {arr.dtype}")
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.size and (arr.min() < 0 or arr.max() > 255):
        raise ValueError("raw image values must lie in 0..255")
    return _check_image(arr.astype(np.float64) / 255.0)


def perturb_input(
    image: np.ndarray, gradient: GradientProvider, epsilon: float
) -> np.ndarray:
    """One gradient-sign step against the distance score, clamped to [0, 1].

    Returns x - epsilon * sign(grad(x)) elementwise, where grad supplies the
    gradient of the detector's distance score with respect to the pixels
    (sign(0) = 0). Moving against the gradient lowers the distance, pulling
    inputs toward the inlier model.
    """
    img = _check_image(image)
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    grad = np.asarray(gradient(img), dtype=np.float64)
    if grad.shape != img.shape:
        raise ValueError(
            f"gradient shape {grad.shape} does not match image shape {img.shape}"
        )
    return np.clip(img - epsilon * np.sign(grad), 0.0, 1.0)


@dataclass(frozen=True)
class PipelineConfig:
    kernel: str = "cubic"
    resize_to: tuple[int, int] = (256, 256)
    crop_to: tuple[int, int] = (224, 224)


def preprocess_pipeline(
    raw: np.ndarray, config: PipelineConfig = PipelineConfig()
) -> np.ndarray:
    """normalize -> resample to resize_to -> center-crop to crop_to.

    Applied unconditionally: an input already at the crop size is still
    resized up and cropped back.
    """
    img = normalize_u8(raw)
    img = resample(img, *config.resize_to, kernel=config.kernel)
    return center_crop(img, *config.crop_to)


def linear_score_gradient(
    weights: np.ndarray, model: MahalanobisModel
) -> GradientProvider:
    """Gradient provider for a linear extractor f(x) = weights @ x.ravel().

    Supplies the exact pixel gradient of the min-Mahalanobis score:
    2 * Wᵀ Σ⁻¹ (W x - μ_m̂) for the active (closest) cluster m̂, using the
    covariance mode the model was fitted with. Lets the perturbation be
    exercised without any network runtime.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != model.dim:
        raise ValueError(
            f"weights must map pixels to dimension {model.dim}, got shape {w.shape}"
        )

    def gradient(image: np.ndarray) -> np.ndarray:
        x = np.asarray(image, dtype=np.float64)
        if x.size != w.shape[1]:
            raise ValueError(
                f"image has {x.size} pixels, extractor expects {w.shape[1]}"
            )
        z = w @ x.ravel()
        best: tuple[float, np.ndarray] | None = None
        for m in range(model.n_clusters):
            factor = model.factors[0] if model.factors.shape[0] == 1 else model.factors[m]
            diff = z - model.means[m]
            half = solve_triangular(factor, diff, lower=True, check_finite=False)
            score = float(half @ half)
            if best is None or score < best[0]:
                solved = solve_triangular(
                    factor.T, half, lower=False, check_finite=False
                )
                best = (score, solved)
        grad = 2.0 * (w.T @ best[1])
        return grad.reshape(x.shape)

    return gradient
