"""Feature exporter: pre-trained backbones -> FVEC feature files."""

from .backbones import ALGORITHMS, BackboneSpec, FeatureExtractor, get_spec
from .export import (
    ExportResult,
    export_array_features,
    export_features,
    read_order_manifest,
)
from .fvec import read_fvec, write_fvec
from .gradients import export_score_gradients, read_model_dir
from .preprocessing import prepare_image, resize_image

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "BackboneSpec",
    "ExportResult",
    "FeatureExtractor",
    "export_array_features",
    "export_features",
    "export_score_gradients",
    "get_spec",
    "prepare_image",
    "read_fvec",
    "read_model_dir",
    "read_order_manifest",
    "resize_image",
    "write_fvec",
]
