"""Worst-case inputs for the Kronecker construction and for feature hashing.

Part one compares the measured zero-output rate of the Kronecker map on its
null-space instance with 2^-support and with exact enumeration over sign
patterns.  Part two sweeps the number of ones k in the feature-hashing hard
vector, once with the package's polynomial hashes and once with fully random
bucket/sign choices as a reference.
"""
import argparse

import numpy as np

from jlkit.core import JlParams, rng_for
from jlkit.harness import hard_instance_experiment


def random_hash_rate(k: int, m: int, eps: float, trials: int, seed: int) -> float:
    rng = rng_for(seed)
    fails = 0
    for _ in range(trials):
        h = rng.integers(0, m, k)
        sg = rng.choice([-1.0, 1.0], k)
        y = np.bincount(h, weights=sg, minlength=m)
        fails += abs(y @ y - k) > eps * k
    return fails / trials


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--m", type=int, default=256)
    ap.add_argument("--eps", type=float, default=0.2)
    a = ap.parse_args()

    rep = hard_instance_experiment("lwt", JlParams(16, 4, delta=2.0**-20, seed=10), trials=a.trials)
    e = rep.extra
    print("kronecker null-space instance")
    print(f"  support {e['support']}  2^-support {e['two_pow_neg_support']:.5f}")
    print(f"  measured Pr[f(x)=0] {rep.rate:.5f} +- {3 * e['sigma']:.5f}  exact {e['exact_zero_probability']:.5f}")
    print(f"  Pr[Dx=x] {e['dx_equals_x_rate']:.5f}  (Dx=x but f(x)!=0: {e['dx_equals_x_but_nonzero']})")

    print(f"\nfeature hashing, m={a.m} eps={a.eps}")
    print(f"{'k':>4}{'package':>10}{'random':>10}")
    for k in (2, 4, 8, 16, 32, 64):
        r = hard_instance_experiment("fh", JlParams(1024, a.m, a.eps, 0.01, seed=110 + k), trials=a.trials, k=k)
        print(f"{k:>4}{r.rate:>10.4f}{random_hash_rate(k, a.m, a.eps, a.trials, k):>10.4f}")


if __name__ == "__main__":
    main()
