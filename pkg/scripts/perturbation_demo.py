#!/usr/bin/env python3
"""Gradient-sign perturbation on an analytic linear extractor.

Fits a Mahalanobis model on features of synthetic inlier images under
f(x) = W x, perturbs test inputs against the distance gradient, and shows
the AUROC with and without the perturbation over a sweep of epsilon.
"""

import argparse

import numpy as np

from fsod.evaluation import auroc
from fsod.kmeans import kmeans_fit
from fsod.mahalanobis import fit_gaussian_stats
from fsod.preprocess import linear_score_gradient, perturb_input


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--height", type=int, default=8)
    parser.add_argument("--width", type=int, default=8)
    parser.add_argument("--feature-dim", type=int, default=12)
    parser.add_argument("--n-train", type=int, default=600)
    parser.add_argument("--n-test", type=int, default=300)
    parser.add_argument("--components", type=int, default=2)
    parser.add_argument("--epsilons", type=float, nargs="+", default=[0.0, 0.005, 0.01, 0.02])
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    pixels = args.height * args.width
    weights = rng.normal(size=(args.feature_dim, pixels)) / np.sqrt(pixels)

    def images(n, level):
        # inliers concentrate around mid-gray; outliers around a shifted level
        return np.clip(
            rng.normal(loc=level, scale=0.08, size=(n, args.height, args.width, 1)),
            0.0,
            1.0,
        )

    def extract(batch):
        return batch.reshape(batch.shape[0], -1) @ weights.T

    train_images = images(args.n_train, 0.5)
    inlier_images = images(args.n_test, 0.5)
    outlier_images = images(args.n_test, 0.62)

    features = extract(train_images)
    clusters = kmeans_fit(features, args.components, seed=args.seed)
    model = fit_gaussian_stats(features, clusters)
    provider = linear_score_gradient(weights, model)

    def scores(batch, epsilon):
        if epsilon > 0:
            batch = np.stack([perturb_input(img, provider, epsilon) for img in batch])
        return model.score_batch(extract(batch))

    print(f"{'epsilon':<10} AUROC   mean inlier distance")
    for epsilon in args.epsilons:
        inl = scores(inlier_images, epsilon)
        out = scores(outlier_images, epsilon)
        print(f"{epsilon:<10g} {100 * auroc(inl, out):<7.1f} {inl.mean():.3f}")


if __name__ == "__main__":
    main()
