"""Pre-trained backbone loading: checkpoint acquisition, hash verification,
projection-head removal.

All algorithms ship a ResNet-50 trunk; features are taken after global
average pooling (2048-d), with the classifier / projection head discarded.
Checkpoints are verified against a sha256 recorded here when one is known;
otherwise the computed hash is reported and stored in the provenance file
so it can be pinned.
"""

from __future__ import annotations

import hashlib
import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path

import torch
from torchvision.models import resnet50

from .preprocessing import IMAGENET_MEAN, IMAGENET_STD

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BackboneSpec:
    algorithm: str
    architecture: str = "resnet50"
    checkpoint: str | None = None  # local path; downloaded from url when absent
    url: str | None = None
    sha256: str | None = None  # full hash or a prefix (torchvision-style)
    output_dim: int = 2048
    normalization: str = "imagenet"  # "unit" for [0,1] inputs


# Published checkpoints. SimCLRv2 and BYOL weights are distributed in forms
# that need a local conversion step first, so they take --checkpoint paths.
REGISTRY: dict[str, BackboneSpec] = {
    "supervised": BackboneSpec(
        algorithm="supervised",
        url="https://download.pytorch.org/models/resnet50-19c8e357.pth",
        sha256="19c8e357",
    ),
    "simclrv2": BackboneSpec(algorithm="simclrv2", normalization="unit"),
    "mocov2": BackboneSpec(
        algorithm="mocov2",
        url=(
            "https://dl.fbaipublicfiles.com/moco/moco_checkpoints/"
            "moco_v2_800ep/moco_v2_800ep_pretrain.pth.tar"
        ),
    ),
    "swav": BackboneSpec(
        algorithm="swav",
        url="https://dl.fbaipublicfiles.com/deepcluster/swav_800ep_pretrain.pth.tar",
    ),
    "byol": BackboneSpec(algorithm="byol"),
    "barlowtwins": BackboneSpec(
        algorithm="barlowtwins",
        url=(
            "https://dl.fbaipublicfiles.com/barlowtwins/"
            "epochs1000_bs2048_lr0.2_lambd0.0051_proj_8192_8192_8192_scale0.024/"
            "resnet50.pth"
        ),
    ),
}

ALGORITHMS = tuple(REGISTRY)

# state-dict key prefixes used by the different training codebases
_STRIP_PREFIXES = ("module.", "encoder_q.", "encoder.", "backbone.", "convnet.", "net.")
_HEAD_MARKERS = ("fc.", "projector", "projection", "head", "prototypes", "predictor")


def get_spec(algorithm: str, checkpoint: str | None = None) -> BackboneSpec:
    key = algorithm.lower()
    if key not in REGISTRY:
        raise ValueError(f"unknown backbone {algorithm!r}, expected one of {ALGORITHMS}")
    spec = REGISTRY[key]
    if checkpoint is not None:
        spec = replace(spec, checkpoint=checkpoint)
    return spec


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def verify_checkpoint(path, expected: str | None) -> str:
    """Return the file's sha256, raising on a mismatch with the recorded hash."""
    actual = file_sha256(path)
    if expected is None:
        logger.warning("no recorded hash for %s; computed sha256=%s", path, actual)
    elif not actual.startswith(expected.lower()):
        raise ValueError(
            f"checkpoint hash mismatch for {path}: expected {expected}, got {actual}"
        )
    return actual


def _obtain_checkpoint(spec: BackboneSpec) -> Path:
    if spec.checkpoint is not None:
        path = Path(spec.checkpoint)
        if not path.is_file():
            raise FileNotFoundError(f"checkpoint not found: {path}")
        return path
    if spec.url is None:
        raise ValueError(
            f"backbone {spec.algorithm!r} has no download URL; pass a local "
            f"checkpoint path (converted weights)"
        )
    cache = Path(os.environ.get("FSOD_EXPORT_CACHE", Path.home() / ".cache" / "fsod-export"))
    cache.mkdir(parents=True, exist_ok=True)
    target = cache / spec.url.rsplit("/", 1)[-1]
    if not target.is_file():
        logger.info("downloading %s", spec.url)
        torch.hub.download_url_to_file(spec.url, str(target), progress=False)
    return target


def _extract_state_dict(blob) -> dict:
    if isinstance(blob, dict):
        for key in ("state_dict", "model", "resnet"):
            if key in blob and isinstance(blob[key], dict):
                return blob[key]
    if not isinstance(blob, dict):
        raise ValueError("unsupported checkpoint format (not a state dict)")
    return blob


def _normalize_keys(state: dict) -> dict:
    out = {}
    for key, value in state.items():
        name = key
        changed = True
        while changed:
            changed = False
            for prefix in _STRIP_PREFIXES:
                if name.startswith(prefix):
                    name = name[len(prefix) :]
                    changed = True
        if any(marker in name for marker in _HEAD_MARKERS):
            continue  # discard classifier / projection head weights
        out[name] = value
    return out


class FeatureExtractor(torch.nn.Module):
    """ResNet-50 trunk ending at global average pooling (2048-d features).

    Owns its input statistics: forward() takes (B, 3, H, W) pixels in [0, 1]
    and applies the backbone's normalization internally, so the plain export
    path and the differentiable perturbation path share the exact math.
    """

    def __init__(self, spec: BackboneSpec, random_init: bool = False):
        super().__init__()
        if spec.architecture != "resnet50":
            raise ValueError(f"unsupported architecture {spec.architecture!r}")
        self.spec = spec
        self.checkpoint_sha256 = "random-init"
        net = resnet50(weights=None)
        if not random_init:
            path = _obtain_checkpoint(spec)
            self.checkpoint_sha256 = verify_checkpoint(path, spec.sha256)
            state = _normalize_keys(
                _extract_state_dict(torch.load(path, map_location="cpu", weights_only=False))
            )
            missing, unexpected = net.load_state_dict(state, strict=False)
            missing = [k for k in missing if not k.startswith("fc.")]
            if missing:
                raise ValueError(
                    f"checkpoint does not cover the backbone: missing {missing[:5]}..."
                )
            if unexpected:
                logger.info("ignored %d non-backbone keys", len(unexpected))
        net.fc = torch.nn.Identity()
        self.net = net
        if spec.normalization == "imagenet":
            mean = torch.tensor(IMAGENET_MEAN).view(1, 3, 1, 1)
            std = torch.tensor(IMAGENET_STD).view(1, 3, 1, 1)
        elif spec.normalization == "unit":
            mean = torch.zeros(1, 3, 1, 1)
            std = torch.ones(1, 3, 1, 1)
        else:
            raise ValueError(f"unknown normalization {spec.normalization!r}")
        self.register_buffer("input_mean", mean)
        self.register_buffer("input_std", std)
        self.eval()

    @torch.no_grad()
    def extract(self, pixels: torch.Tensor) -> torch.Tensor:
        return self(pixels)

    def forward(self, pixels: torch.Tensor) -> torch.Tensor:
        return self.net((pixels - self.input_mean) / self.input_std)
