"""Shared plumbing for the reproduction scripts.

The scripts talk to the detector exclusively through its CLI (`fsod`) and
file formats; run them in an environment where both packages are installed
and the datasets/checkpoints can be downloaded.
"""

import re
import subprocess
import sys
from pathlib import Path

import numpy as np

from fsod_export import FeatureExtractor, export_array_features, get_spec
from fsod_export.datasets import load_dataset


def build_extractor(backbone: str, checkpoint: str | None) -> FeatureExtractor:
    return FeatureExtractor(get_spec(backbone, checkpoint))


def export_dataset(name, extractor, out_path, batch_size, kernel="cubic"):
    """Export a named dataset once; reuse the cached file on reruns."""
    out_path = Path(out_path)
    labels_path = out_path.with_suffix(out_path.suffix + ".labels")
    if out_path.is_file() and labels_path.is_file():
        print(f"reusing {out_path}")
        return out_path, labels_path
    images, labels = load_dataset(name)
    export_array_features(images, extractor, out_path, batch_size=batch_size, kernel=kernel)
    labels_path.write_text("".join(f"{int(v)}\n" for v in labels))
    print(f"exported {name} -> {out_path} ({images.shape[0]} rows)")
    return out_path, labels_path


def run_detector(*args: str) -> str:
    """Run the detector CLI and return stdout (echoing it through)."""
    cmd = ["fsod", *args]
    result = subprocess.run(cmd, capture_output=True, text=True)
    sys.stdout.write(result.stdout)
    if result.returncode != 0:
        sys.stderr.write(result.stderr)
        raise RuntimeError(f"{' '.join(cmd)} failed with code {result.returncode}")
    return result.stdout


def parse_percent(stdout: str, label: str) -> float:
    match = re.search(rf"^{re.escape(label)}\s+([0-9.]+)$", stdout, re.MULTILINE)
    if match is None:
        raise RuntimeError(f"could not find {label!r} in detector output")
    return float(match.group(1))


def write_manifest(path, train_fvec, train_labels, test_fvec, test_labels, name):
    Path(path).write_text(
        f"name={name}\nrole=labeled-multiclass\n"
        f"feature_file={Path(train_fvec).name}\nlabels={Path(train_labels).name}\n"
        f"test_feature_file={Path(test_fvec).name}\ntest_labels={Path(test_labels).name}\n"
    )
    return path


def gate(name: str, value: float, low: float, high: float) -> bool:
    ok = low <= value <= high
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {value:.1f} (expected {low:.1f}..{high:.1f})")
    return ok


def read_labels(path) -> np.ndarray:
    return np.asarray(
        [int(line) for line in Path(path).read_text().splitlines() if line.strip()]
    )
