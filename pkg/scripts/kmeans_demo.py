"""Cluster Gaussian blobs after a JL embedding and compare with clustering in full dimension."""
import argparse
import json

import numpy as np

from jlkit.core import derive_seed, rng_for
from jlkit.kmeans import jl_kmeans


def blobs(n: int, d: int, k: int, spread: float, seed: int) -> np.ndarray:
    rng = rng_for(seed)
    centers = rng.standard_normal((k, d)) * spread
    return centers[rng.integers(0, k, n)] + rng.standard_normal((n, d))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=300)
    ap.add_argument("--d", type=int, default=2000)
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--eps", type=float, default=0.5)
    ap.add_argument("--transform", default="gaussian")
    ap.add_argument("--n-init", type=int, default=5)
    ap.add_argument("--seeds", type=int, default=5)
    a = ap.parse_args()
    # data gets its own stream; reusing a transform seed would correlate A with the centers
    X = blobs(a.n, a.d, a.k, 1.0, derive_seed(9_999, 0))
    for seed in range(a.seeds):
        rep = jl_kmeans(X, a.k, a.eps, a.transform, seed=seed, n_init=a.n_init)
        keep = ("m", "kappa_m", "kappa_d", "kappa_d_direct", "lifted_over_direct", "transfer_ratio",
                "distances_preserved", "worst_distortion")
        print(json.dumps({k: getattr(rep, k) for k in keep}))


if __name__ == "__main__":
    main()
