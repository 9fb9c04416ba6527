"""Named benchmark datasets via torchvision (downloaded on first use).

Returns uint8 (N, H, W, 3) image arrays plus labels where the dataset has
them. CIFAR-100 is exposed with its 20 coarse labels, the grouping the
one-class protocol uses.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

DATASETS = (
    "cifar10-train",
    "cifar10-test",
    "cifar100-coarse-train",
    "cifar100-coarse-test",
    "svhn-test",
    "fashion-mnist-train",
    "fashion-mnist-test",
)


def _root() -> str:
    return os.environ.get("FSOD_EXPORT_DATA", str(Path.home() / ".cache" / "fsod-datasets"))


def load_dataset(name: str) -> tuple[np.ndarray, np.ndarray | None]:
    """(images, labels) for a named dataset split; downloads when missing."""
    from torchvision import datasets as tvd

    root = _root()
    if name == "cifar10-train" or name == "cifar10-test":
        ds = tvd.CIFAR10(root, train=name.endswith("train"), download=True)
        return np.asarray(ds.data, dtype=np.uint8), np.asarray(ds.targets)
    if name.startswith("cifar100-coarse"):
        ds = tvd.CIFAR100(root, train=name.endswith("train"), download=True)
        images = np.asarray(ds.data, dtype=np.uint8)
        # torchvision stores fine labels; recover the coarse grouping
        meta = _cifar100_coarse_labels(ds)
        return images, meta
    if name == "svhn-test":
        ds = tvd.SVHN(root, split="test", download=True)
        images = np.transpose(np.asarray(ds.data, dtype=np.uint8), (0, 2, 3, 1))
        return images, np.asarray(ds.labels)
    if name.startswith("fashion-mnist"):
        ds = tvd.FashionMNIST(root, train=name.endswith("train"), download=True)
        gray = np.asarray(ds.data, dtype=np.uint8)[:, :, :, None]
        return np.repeat(gray, 3, axis=3), np.asarray(ds.targets)
    raise ValueError(f"unknown dataset {name!r}, expected one of {DATASETS}")


def _cifar100_coarse_labels(ds) -> np.ndarray:
    import pickle

    base = Path(ds.root) / ds.base_folder
    filename = ds.train_list[0][0] if ds.train else ds.test_list[0][0]
    with open(base / filename, "rb") as fh:
        entry = pickle.load(fh, encoding="latin1")
    return np.asarray(entry["coarse_labels"])
