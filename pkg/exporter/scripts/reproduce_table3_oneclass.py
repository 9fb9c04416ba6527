#!/usr/bin/env python3
"""CIFAR-100 (20 super-classes) one-class anomaly benchmark.

Exports train/test features, runs the detector's one-vs-all protocol with
the oneclass preset (M=4, tied) over 5 runs, and gates the mean AUROC at
92.6 +- 1.5. Needs dataset downloads and pre-trained weights.
"""

import argparse
from pathlib import Path

from common import (
    build_extractor,
    export_dataset,
    gate,
    parse_percent,
    run_detector,
    write_manifest,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--backbone", default="simclrv2")
    parser.add_argument("--checkpoint")
    parser.add_argument("--workdir", default="table3_workdir")
    parser.add_argument("--batch", type=int, default=64)
    parser.add_argument("--runs", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--expected", type=float, default=92.6)
    parser.add_argument("--tolerance", type=float, default=1.5)
    args = parser.parse_args()

    workdir = Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    extractor = build_extractor(args.backbone, args.checkpoint)

    train_fvec, train_labels = export_dataset(
        "cifar100-coarse-train", extractor, workdir / "train.fvec", args.batch
    )
    test_fvec, test_labels = export_dataset(
        "cifar100-coarse-test", extractor, workdir / "test.fvec", args.batch
    )
    manifest = write_manifest(
        workdir / "data.manifest",
        train_fvec,
        train_labels,
        test_fvec,
        test_labels,
        "cifar100-oneclass",
    )

    stdout = run_detector(
        "oneclass",
        str(manifest),
        "--preset",
        "oneclass",
        "--runs",
        str(args.runs),
        "--seed",
        str(args.seed),
    )
    value = parse_percent(stdout, "mean")
    ok = gate(
        "cifar100-oneclass-mean",
        value,
        args.expected - args.tolerance,
        args.expected + args.tolerance,
    )
    raise SystemExit(0 if ok else 1)


if __name__ == "__main__":
    main()
