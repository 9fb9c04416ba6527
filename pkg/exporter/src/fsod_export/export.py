"""Feature export: images -> preprocessed batches -> backbone -> FVEC.

Alongside the feature file the exporter writes an ordering manifest (one
source name per row, in row order) and a provenance file (backbone,
checkpoint hash, resampling kernel), so every row is traceable.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from .backbones import FeatureExtractor
from .fvec import write_fvec
from .preprocessing import prepare_image

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".webp")


@dataclass(frozen=True)
class ExportResult:
    rows: int
    dim: int
    skipped: tuple[str, ...]
    checkpoint_sha256: str


def list_images(folder) -> list[Path]:
    folder = Path(folder)
    if not folder.is_dir():
        raise FileNotFoundError(f"image folder not found: {folder}")
    paths = sorted(
        p for p in folder.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not paths:
        raise ValueError(f"no images found in {folder}")
    return paths


def decode_image(path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def _batched(items, size):
    for start in range(0, len(items), size):
        yield items[start : start + size]


def pixel_batch(images: list[np.ndarray], kernel: str) -> torch.Tensor:
    """Decoded images -> (B, 3, 224, 224) float tensor in [0, 1]."""
    prepared = np.stack([prepare_image(raw, kernel) for raw in images])
    return torch.from_numpy(np.ascontiguousarray(np.transpose(prepared, (0, 3, 1, 2))))


def extract_batch(
    extractor: FeatureExtractor, images: list[np.ndarray], kernel: str
) -> np.ndarray:
    return extractor.extract(pixel_batch(images, kernel)).cpu().numpy().astype(np.float32)


def export_features(
    image_dir,
    extractor: FeatureExtractor,
    out_path,
    batch_size: int = 32,
    kernel: str = "cubic",
) -> ExportResult:
    """Export one feature row per decodable image, in sorted-name order.

    Undecodable files are skipped with a warning and recorded (name and row
    index) in the ordering manifest as well as the returned result.
    """
    if batch_size < 1:
        raise ValueError(f"batch size must be >= 1, got {batch_size}")
    paths = list_images(image_dir)
    rows: list[np.ndarray] = []
    kept: list[str] = []
    skipped: list[str] = []
    pending: list[np.ndarray] = []

    def flush():
        if pending:
            rows.append(extract_batch(extractor, pending, kernel))
            pending.clear()

    for index, path in enumerate(paths):
        try:
            image = decode_image(path)
        except (UnidentifiedImageError, OSError) as exc:
            logger.warning("skipping undecodable image #%d %s: %s", index, path.name, exc)
            skipped.append(path.name)
            continue
        pending.append(image)
        kept.append(path.name)
        if len(pending) == batch_size:
            flush()
    flush()

    if not rows:
        raise ValueError(f"no decodable images in {image_dir}")
    features = np.vstack(rows)
    write_export(features, kept, skipped, extractor, kernel, out_path)
    return ExportResult(
        rows=features.shape[0],
        dim=features.shape[1],
        skipped=tuple(skipped),
        checkpoint_sha256=extractor.checkpoint_sha256,
    )


def export_array_features(
    images: np.ndarray,
    extractor: FeatureExtractor,
    out_path,
    batch_size: int = 32,
    kernel: str = "cubic",
) -> ExportResult:
    """Export features of an in-memory uint8 (N, H, W, 3) image stack.

    Row order follows the array; the ordering manifest records indices.
    """
    if batch_size < 1:
        raise ValueError(f"batch size must be >= 1, got {batch_size}")
    stack = np.asarray(images)
    if stack.ndim != 4 or stack.shape[3] != 3 or stack.shape[0] < 1:
        raise ValueError(f"expected (N, H, W, 3) images, got shape {stack.shape}")
    rows = [
        extract_batch(extractor, list(chunk), kernel)
        for chunk in _batched(stack, batch_size)
    ]
    features = np.vstack(rows)
    names = [str(i) for i in range(features.shape[0])]
    write_export(features, names, [], extractor, kernel, out_path)
    return ExportResult(
        rows=features.shape[0],
        dim=features.shape[1],
        skipped=(),
        checkpoint_sha256=extractor.checkpoint_sha256,
    )


def write_export(features, kept, skipped, extractor, kernel, out_path) -> None:
    out_path = Path(out_path)
    write_fvec(features, out_path)
    order_path = out_path.with_suffix(out_path.suffix + ".order")
    order_path.write_text("".join(f"{name}\n" for name in kept))
    provenance = out_path.with_suffix(out_path.suffix + ".provenance")
    provenance.write_text(
        f"backbone={extractor.spec.algorithm}\n"
        f"architecture={extractor.spec.architecture}\n"
        f"checkpoint_sha256={extractor.checkpoint_sha256}\n"
        f"kernel={kernel}\n"
        f"rows={features.shape[0]}\n"
        f"dim={features.shape[1]}\n"
        + "".join(f"skipped={name}\n" for name in skipped)
    )


def read_order_manifest(path) -> list[str]:
    return [line for line in Path(path).read_text().splitlines() if line]
