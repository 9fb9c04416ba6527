#!/usr/bin/env python3
"""CIFAR-10 (in) vs SVHN (out) OOD benchmark with a pre-trained backbone.

Exports CIFAR-10 train/test and SVHN test features, fits the detector with
the cifar10-ood preset (M=8, tied covariance, bicubic input pipeline)
through the `fsod` CLI, and gates the AUROC at 98.3 +- 1.0.

Needs network access for the datasets, and the converted SimCLRv2 weights
via --checkpoint (the supervised torchvision backbone downloads itself).
Runtime is dominated by the feature export (several CPU-hours; about one
GPU-hour).
"""

import argparse
from pathlib import Path

from common import build_extractor, export_dataset, gate, parse_percent, run_detector


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--backbone", default="simclrv2")
    parser.add_argument("--checkpoint", help="local checkpoint path (converted weights)")
    parser.add_argument("--workdir", default="table1_workdir")
    parser.add_argument("--batch", type=int, default=64)
    parser.add_argument("--expected", type=float, default=98.3)
    parser.add_argument("--tolerance", type=float, default=1.0)
    args = parser.parse_args()

    workdir = Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    extractor = build_extractor(args.backbone, args.checkpoint)

    train_fvec, _ = export_dataset(
        "cifar10-train", extractor, workdir / "cifar10_train.fvec", args.batch
    )
    inlier_fvec, _ = export_dataset(
        "cifar10-test", extractor, workdir / "cifar10_test.fvec", args.batch
    )
    outlier_fvec, _ = export_dataset(
        "svhn-test", extractor, workdir / "svhn_test.fvec", args.batch
    )

    model_dir = workdir / "model"
    run_detector(
        "fit", str(train_fvec), "--out", str(model_dir), "--preset", "cifar10-ood"
    )
    stdout = run_detector(
        "eval-ood", str(model_dir), str(inlier_fvec), str(outlier_fvec)
    )
    value = parse_percent(stdout, "AUROC")
    ok = gate(
        "cifar10-vs-svhn",
        value,
        args.expected - args.tolerance,
        args.expected + args.tolerance,
    )
    raise SystemExit(0 if ok else 1)


if __name__ == "__main__":
    main()
