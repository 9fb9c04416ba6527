"""Dataset manifests: line-oriented key=value text plus label sidecars.

A manifest names one feature file (and optionally a per-row label sidecar,
one integer per line). For the one-vs-all protocols a labeled-multiclass
manifest may additionally name the test split via ``test_feature_file`` /
``test_labels``. Paths are resolved relative to the manifest's directory.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fvec import read_features

ROLES = ("inlier", "outlier", "labeled-multiclass")

_REQUIRED_KEYS = ("name", "feature_file", "role")
_OPTIONAL_KEYS = ("labels", "test_feature_file", "test_labels")


class ManifestError(ValueError):
    """Malformed manifest or a label file violating its invariants."""


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    feature_file: Path
    role: str
    labels: Path | None = None
    test_feature_file: Path | None = None
    test_labels: Path | None = None


def load_manifest(path: str | Path) -> DatasetManifest:
    """Parse and validate a manifest file.

    Label/row-count cross-checks are deferred to :func:`load_dataset`, when
    the feature file is actually read.
    """
    path = Path(path)
    base = path.parent
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ManifestError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in pairs:
            raise ManifestError(f"{path}:{lineno}: duplicate key {key!r}")
        if key not in _REQUIRED_KEYS and key not in _OPTIONAL_KEYS:
            raise ManifestError(f"{path}:{lineno}: unknown key {key!r}")
        pairs[key] = value

    missing = [k for k in _REQUIRED_KEYS if k not in pairs]
    if missing:
        raise ManifestError(f"{path}: missing required keys {missing}")
    role = pairs["role"]
    if role not in ROLES:
        raise ManifestError(f"{path}: unknown role {role!r}, expected one of {ROLES}")
    if role == "labeled-multiclass" and "labels" not in pairs:
        raise ManifestError(f"{path}: role labeled-multiclass requires labels")
    if ("test_feature_file" in pairs) != ("test_labels" in pairs):
        raise ManifestError(f"{path}: test_feature_file and test_labels go together")

    def resolve(key: str) -> Path | None:
        return base / pairs[key] if key in pairs else None

    return DatasetManifest(
        name=pairs["name"],
        feature_file=base / pairs["feature_file"],
        role=role,
        labels=resolve("labels"),
        test_feature_file=resolve("test_feature_file"),
        test_labels=resolve("test_labels"),
    )


def read_labels(path: str | Path) -> np.ndarray:
    """Read a label sidecar (one integer per line) as an int64 vector."""
    values = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            values.append(int(line))
        except ValueError:
            raise ManifestError(f"{path}:{lineno}: not an integer: {line!r}") from None
    if not values:
        raise ManifestError(f"{path}: empty label file")
    return np.asarray(values, dtype=np.int64)


def write_labels(labels: np.ndarray, path: str | Path) -> None:
    arr = np.asarray(labels, dtype=np.int64).ravel()
    Path(path).write_text("".join(f"{v}\n" for v in arr))


def _check_labels(labels: np.ndarray, rows: int, origin: Path) -> None:
    if labels.shape[0] != rows:
        raise ManifestError(
            f"{origin}: label count {labels.shape[0]} does not match "
            f"feature row count {rows}"
        )
    classes = np.unique(labels)
    if classes[0] != 0 or classes[-1] != classes.size - 1:
        raise ManifestError(
            f"{origin}: class indices must be contiguous from 0, got {classes.tolist()}"
        )


def load_dataset(
    manifest: DatasetManifest, split: str = "train"
) -> tuple[np.ndarray, np.ndarray | None]:
    """Load (features, labels) for one split, cross-checking label invariants.

    ``split`` is "train" (the primary feature file) or "test" (the optional
    test pair). Labels are None when the manifest has none for that split.
    """
    if split == "train":
        feature_path, label_path = manifest.feature_file, manifest.labels
    elif split == "test":
        if manifest.test_feature_file is None:
            raise ManifestError(f"manifest {manifest.name!r} has no test split")
        feature_path, label_path = manifest.test_feature_file, manifest.test_labels
    else:
        raise ValueError(f"split must be 'train' or 'test', got {split!r}")

    features = read_features(feature_path)
    labels = None
    if label_path is not None:
        labels = read_labels(label_path)
        _check_labels(labels, features.shape[0], label_path)
    return features, labels
