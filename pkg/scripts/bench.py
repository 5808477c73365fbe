"""Median apply time per kind and dimension, plus doubling ratios.

    python3 scripts/bench.py --kinds rademacher,srht,fjlt,toeplitz --d-list 4096,8192,16384,32768
"""
import argparse

from jlkit.harness import bench_embed


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--kinds", default="rademacher,srht,fjlt,toeplitz,feature_hashing")
    ap.add_argument("--d-list", default="8192,16384,32768,65536")
    ap.add_argument("--m", type=int, default=256)
    ap.add_argument("--reps", type=int, default=9)
    a = ap.parse_args()
    ds = [int(v) for v in a.d_list.split(",")]
    recs = bench_embed(a.kinds.split(","), ds, a.m, a.reps)
    t = {(r.kind, r.d): r.median_ns for r in recs}
    print(f"{'kind':<16}" + "".join(f"{d:>12}" for d in ds) + "   doubling ratios")
    for kind in a.kinds.split(","):
        row = [t[kind, d] / 1e6 for d in ds]
        ratios = ", ".join(f"{t[kind, b] / t[kind, a_]:.2f}" for a_, b in zip(ds, ds[1:]))
        print(f"{kind:<16}" + "".join(f"{v:>10.3f}ms" for v in row) + f"   {ratios}")


if __name__ == "__main__":
    main()
