"""Input pipeline: [0,1] normalization, resampling to 256, center crop 224.

The resampler follows the detector library's documented math: separable
convolution, half-pixel center alignment (src = (dst + 0.5) * scale - 0.5),
edge replication, per-output-pixel weight normalization, Keys a=-0.5 cubic
and 3-lobe lanczos. Backbones that expect their own input statistics get
them applied after this pipeline.
"""

import math

import numpy as np

IMAGENET_MEAN = np.array([0.485, 0.456, 0.406], dtype=np.float32)
IMAGENET_STD = np.array([0.229, 0.224, 0.225], dtype=np.float32)

RESIZE_TO = 256
CROP_TO = 224


def _kernel_weight(kind: str, t: float) -> float:
    at = abs(t)
    if kind == "nearest":
        return 1.0 if at <= 0.5 + 1e-9 else 0.0
    if kind == "bilinear":
        return max(0.0, 1.0 - at)
    if kind == "cubic":
        if at <= 1.0:
            return (1.5 * at - 2.5) * at * at + 1.0
        if at < 2.0:
            return ((-0.5 * at + 2.5) * at - 4.0) * at + 2.0
        return 0.0
    if kind == "lanczos":
        if at >= 3.0:
            return 0.0
        if at < 1e-12:
            return 1.0
        return (
            3.0
            * math.sin(math.pi * t)
            * math.sin(math.pi * t / 3.0)
            / (math.pi * math.pi * t * t)
        )
    raise ValueError(f"unknown kernel {kind!r}")


_RADIUS = {"nearest": 0.5 + 1e-9, "bilinear": 1.0, "cubic": 2.0, "lanczos": 3.0}

KERNELS = tuple(_RADIUS)


def resize_matrix(n_in: int, n_out: int, kernel: str) -> np.ndarray:
    """Row-normalized (n_out, n_in) weight matrix for one axis."""
    radius = _RADIUS[kernel]
    scale = n_in / n_out
    out = np.zeros((n_out, n_in), dtype=np.float64)
    for dst in range(n_out):
        src = (dst + 0.5) * scale - 0.5
        lo = math.ceil(src - radius)
        hi = math.floor(src + radius)
        for j in range(lo, hi + 1):
            out[dst, min(max(j, 0), n_in - 1)] += _kernel_weight(kernel, src - j)
        out[dst] /= out[dst].sum()
    return out


def resize_image(image: np.ndarray, size: int, kernel: str = "cubic") -> np.ndarray:
    """Resample an (H, W, C) float image to (size, size, C), clamped to [0,1]."""
    img = np.asarray(image, dtype=np.float64)
    wy = resize_matrix(img.shape[0], size, kernel)
    wx = resize_matrix(img.shape[1], size, kernel)
    out = np.einsum("hi,iwc->hwc", wy, img)
    out = np.einsum("wj,hjc->hwc", wx, out)
    return np.clip(out, 0.0, 1.0)


def center_crop(image: np.ndarray, size: int) -> np.ndarray:
    h, w = image.shape[:2]
    if size > h or size > w:
        raise ValueError(f"crop {size} exceeds image size {h}x{w}")
    top, left = (h - size) // 2, (w - size) // 2
    return image[top : top + size, left : left + size]


def prepare_image(raw_rgb: np.ndarray, kernel: str = "cubic") -> np.ndarray:
    """uint8 (H, W, 3) -> float32 (224, 224, 3) in [0, 1] via resize 256 + crop."""
    raw = np.asarray(raw_rgb)
    if raw.ndim != 3 or raw.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {raw.shape}")
    if raw.shape[0] < 1 or raw.shape[1] < 1:
        raise ValueError("empty image")
    img = raw.astype(np.float64) / 255.0
    img = resize_image(img, RESIZE_TO, kernel)
    return center_crop(img, CROP_TO).astype(np.float32)


