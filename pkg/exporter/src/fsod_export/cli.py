"""fsod-export: turn image folders into FVEC feature files.

Subcommands:
  export   images -> features through a pre-trained backbone
  perturb  images -> features of gradient-sign perturbed inputs against a
           fitted Mahalanobis model directory
"""

from __future__ import annotations

import argparse
import logging
import sys

from .backbones import ALGORITHMS, FeatureExtractor, get_spec
from .datasets import DATASETS, load_dataset
from .export import export_array_features, export_features
from .gradients import export_score_gradients
from .preprocessing import KERNELS


def _add_backbone_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backbone", default="simclrv2", choices=ALGORITHMS)
    parser.add_argument("--checkpoint", help="local checkpoint path (overrides the URL)")
    parser.add_argument(
        "--random-init",
        action="store_true",
        help="skip checkpoint loading; randomly initialized trunk (pipeline testing only)",
    )
    parser.add_argument("--batch", type=int, default=32)
    parser.add_argument("--kernel", default="cubic", choices=KERNELS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fsod-export", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_export = sub.add_parser("export", help="export features from images or a dataset")
    source = p_export.add_mutually_exclusive_group(required=True)
    source.add_argument("--images", help="folder of images")
    source.add_argument("--dataset", choices=DATASETS, help="named benchmark dataset")
    p_export.add_argument("--out", required=True, help="output feature file (.fvec)")
    _add_backbone_flags(p_export)

    p_perturb = sub.add_parser(
        "perturb", help="export features of perturbed inputs (Eq.-3 style step)"
    )
    p_perturb.add_argument("--images", required=True)
    p_perturb.add_argument("--out", required=True)
    p_perturb.add_argument("--model", required=True, help="fitted mahalanobis model dir")
    p_perturb.add_argument("--epsilon", type=float, default=0.01)
    _add_backbone_flags(p_perturb)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        spec = get_spec(args.backbone, args.checkpoint)
        extractor = FeatureExtractor(spec, random_init=args.random_init)
        if args.command == "export":
            if args.images:
                result = export_features(
                    args.images, extractor, args.out, batch_size=args.batch, kernel=args.kernel
                )
            else:
                images, labels = load_dataset(args.dataset)
                result = export_array_features(
                    images, extractor, args.out, batch_size=args.batch, kernel=args.kernel
                )
                if labels is not None:
                    labels_path = f"{args.out}.labels"
                    with open(labels_path, "w") as fh:
                        fh.write("".join(f"{int(v)}\n" for v in labels))
                    print(f"labels {labels_path}")
            print(f"rows {result.rows}")
            print(f"dim {result.dim}")
            print(f"skipped {len(result.skipped)}")
            print(f"checkpoint {result.checkpoint_sha256}")
        else:
            features = export_score_gradients(
                args.images,
                extractor,
                args.model,
                args.epsilon,
                args.out,
                batch_size=args.batch,
                kernel=args.kernel,
            )
            print(f"rows {features.shape[0]}")
            print(f"dim {features.shape[1]}")
            print(f"epsilon {args.epsilon}")
        return 0
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
