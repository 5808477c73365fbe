"""Monte Carlo failure rates for every transform at the union-bound dimension.

    python3 scripts/failure_table.py --trials 2000 --d 256
"""
import argparse
import time

from jlkit.core import JlParams, derive_seed, target_dim_union
from jlkit.harness import VectorGen, acceptance_margin, estimate_failure
from jlkit.transforms import default_sparsity

KINDS = ["gaussian", "rademacher", "achlioptas", "feature_hashing", "block", "graph",
         "dks", "fjlt", "srht", "toeplitz", "kacjl"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--d", type=int, default=256)
    ap.add_argument("--eps", type=float, default=0.25)
    ap.add_argument("--delta", type=float, default=0.05)
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()

    m = target_dim_union(a.eps, a.delta)
    s = default_sparsity(a.eps, a.delta)
    opts = {"achlioptas": {"q": 1 / 3}, "block": {"s": s}, "graph": {"s": s}, "dks": {"s": s}}
    bound = a.delta + acceptance_margin(a.delta, a.trials)
    print(f"d={a.d} m={m} eps={a.eps} delta={a.delta} trials={a.trials} bound={bound:.4f}")
    print(f"{'kind':<16}{'rate':>8}{'ci95':>8}{'E ratio':>9}{'sec':>7}")
    for i, kind in enumerate(KINDS):
        t0 = time.perf_counter()
        p = JlParams(a.d, m, a.eps, a.delta, seed=derive_seed(a.seed, i))
        gen = VectorGen("unit_sphere", a.d, derive_seed(a.seed + 1, i))
        st = estimate_failure(kind, p, gen, a.trials, **opts.get(kind, {}))
        print(f"{kind:<16}{st.failure_rate:>8.4f}{st.ci95_halfwidth:>8.4f}"
              f"{st.mean_sq_ratio:>9.4f}{time.perf_counter() - t0:>7.1f}")


if __name__ == "__main__":
    main()
