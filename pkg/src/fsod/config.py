"""Run configuration shared by the CLI and the evaluation protocols."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

DETECTORS = ("mahalanobis", "kde", "cosine")
COV_MODES = ("tied", "percluster")
KERNELS = ("nearest", "bilinear", "cubic", "lanczos")

# Components per experiment family: 8 for the low-resolution OOD task,
# 4 for one-class anomaly detection, 10 for high-resolution OOD.
PRESETS: dict[str, dict] = {
    "cifar10-ood": {"components": 8, "cov_mode": "tied", "kernel": "cubic"},
    "oneclass": {"components": 4, "cov_mode": "tied", "kernel": "cubic"},
    "highres-ood": {"components": 10, "cov_mode": "tied", "kernel": "cubic"},
}


@dataclass(frozen=True)
class RunConfig:
    detector: str = "mahalanobis"
    components: int = 8
    cov_mode: str = "tied"
    shrinkage: float = 1e-3
    kernel: str = "cubic"
    epsilon: float = 0.0
    seed: int = 0
    runs: int = 1
    bandwidth: float | None = None  # kde only; None selects via grid search

    def validate(self) -> "RunConfig":
        if self.detector not in DETECTORS:
            raise ValueError(f"detector must be one of {DETECTORS}, got {self.detector!r}")
        if self.components < 1:
            raise ValueError(f"components must be >= 1, got {self.components}")
        if self.cov_mode not in COV_MODES:
            raise ValueError(f"cov mode must be one of {COV_MODES}, got {self.cov_mode!r}")
        if self.shrinkage < 0:
            raise ValueError(f"shrinkage must be >= 0, got {self.shrinkage}")
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if self.bandwidth is not None and self.bandwidth <= 0:
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")
        return self

    def apply_preset(self, preset: str) -> "RunConfig":
        if preset not in PRESETS:
            raise ValueError(f"unknown preset {preset!r}, expected one of {tuple(PRESETS)}")
        return replace(self, **PRESETS[preset])

    def describe(self) -> dict:
        return {
            "detector": self.detector,
            "components": self.components,
            "cov_mode": self.cov_mode,
            "shrinkage": self.shrinkage,
            "kernel": self.kernel,
            "epsilon": self.epsilon,
            "seed": self.seed,
            "runs": self.runs,
        }


_CONFIG_TYPES = {
    "detector": str,
    "components": int,
    "cov_mode": str,
    "shrinkage": float,
    "kernel": str,
    "epsilon": float,
    "seed": int,
    "runs": int,
    "bandwidth": float,
}


def read_config_file(path: str | Path) -> dict:
    """Parse a key=value config file into RunConfig field overrides."""
    overrides: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_TYPES:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            overrides[key] = _CONFIG_TYPES[key](value)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return overrides
