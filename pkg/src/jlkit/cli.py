"""Command-line interface.

Exit codes: 0 pass, 1 statistical failure, 2 usage, 3 I/O, 4 dimension, 5 parse.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import fileio, harness, kmeans, streaming
from .core import (
    DimensionError,
    DomainError,
    JlParams,
    ParameterError,
    derive_seed,
    rng_for,
    target_dim_union,
)
from .fileio import FormatError
from .sparse import fh_hard_instance
from .transforms import KINDS, make_transform

EXIT_OK, EXIT_STAT, EXIT_USAGE, EXIT_IO, EXIT_DIM, EXIT_PARSE = range(6)


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _Usage(f"{self.prog}: error: {message}")


def _add_transform_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--transform", required=True, help=f"one of: {', '.join(KINDS)}")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--s", type=int, help="column sparsity (block, graph, dks)")
    p.add_argument("--q", type=float, help="nonzero density (achlioptas)")
    p.add_argument("--c-q", dest="c_q", type=float, help="density constant (fjlt)")
    p.add_argument("--inner", help="inner map for lwtjl")
    p.add_argument("--mode", help="Kac angle mode (kacjl)")
    p.add_argument("--orthogonalize", action="store_true", help="orthogonal rows (gaussian)")


def _transform_options(a) -> dict:
    opts = {}
    for name in ("s", "q", "c_q", "inner", "mode"):
        if getattr(a, name, None) is not None:
            opts[name] = getattr(a, name)
    if getattr(a, "orthogonalize", False):
        opts["orthogonalize"] = True
    return opts


def _check_kind(kind: str) -> None:
    if kind not in KINDS:
        raise _Usage(f"unknown transform {kind!r}; choose from {', '.join(KINDS)}")


def _read_input(path: str, fmt: str) -> np.ndarray:
    return fileio.read_vectors_csv(path) if fmt == "csv" else fileio.read_vectors(path)


def cmd_gen(a) -> int:
    rng = rng_for(a.seed)
    if a.d < 1 or a.count < 1:
        raise _Usage("--d and --count must be positive")
    if a.dist == "gaussian":
        X = rng.standard_normal((a.count, a.d))
    elif a.dist == "sphere":
        X = rng.standard_normal((a.count, a.d))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
    else:
        if a.k is None:
            raise _Usage("--dist binary-k needs --k")
        try:
            X = np.tile(fh_hard_instance(a.k, a.d), (a.count, 1))
        except (ParameterError, DomainError) as e:
            raise _Usage(str(e))
    fileio.write_vectors(a.out, X)
    return EXIT_OK


def cmd_embed(a) -> int:
    _check_kind(a.transform)
    X = _read_input(a.input, a.format)
    if X.shape[1] != a.d:
        raise DimensionError(f"input has dim {X.shape[1]}, expected --d {a.d}")
    f = make_transform(a.transform, JlParams(a.d, a.m, a.eps, a.delta, a.seed), **_transform_options(a))
    fileio.write_vectors(a.out, f.embed(X))
    return EXIT_OK


def cmd_verify(a) -> int:
    _check_kind(a.transform)
    if (a.m is None) == (not a.auto_m):
        raise _Usage("give exactly one of --m and --auto-m")
    m = target_dim_union(a.eps, a.delta) if a.auto_m else a.m
    params = JlParams(a.d, m, a.eps, a.delta, a.seed)
    gen_kw = {}
    if a.gen in ("binary_k", "fh_hard"):
        gen_kw["k"] = a.k
    if a.gen == "fixed":
        gen_kw["data"] = _read_input(a.input, a.format)
    gen = harness.VectorGen(a.gen, a.d, derive_seed(a.seed, 0), **gen_kw)
    stats = harness.estimate_failure(a.transform, params, gen, a.trials, **_transform_options(a))
    report = harness.failure_report(a.transform, params, stats)
    text = json.dumps(report, indent=2)
    if a.json:
        with open(a.json, "w") as fh:
            fh.write(text + "\n")
    print(text)
    ok = stats.failure_rate <= a.delta + harness.acceptance_margin(a.delta, a.trials)
    return EXIT_OK if ok else EXIT_STAT


def cmd_sketch(a) -> int:
    shards = [fileio.read_stream(path, a.d) for path in a.stream]
    query = a.query
    if query.startswith("topk:"):
        k = _int_arg(query[5:], "topk")
        idx = np.concatenate([s.indices for s in shards])
        val = np.concatenate([s.values for s in shards])
        heap = streaming.topk_process(idx, val, k, a.eps, a.delta, a.d, a.seed)
        for i, est in heap.items():
            print(f"{i},{est!r}")
        return EXIT_OK
    new = streaming.ams_new if a.kind == "ams" else streaming.cs_new
    sketches = []
    for s in shards:
        sk = new(a.d, a.eps, a.delta, a.seed)
        sk.update_many(s.indices, s.values)
        sketches.append(sk)
    sk = sketches[0]
    for other in sketches[1:]:
        sk = streaming.sketch_merge(sk, other)
    if query == "f2":
        print(repr(sk.f2()))
    elif query.startswith("point:"):
        if a.kind != "cs":
            raise _Usage("point queries need --kind cs")
        print(repr(sk.point(_int_arg(query[6:], "point"))))
    else:
        raise _Usage(f"unknown query {query!r}")
    return EXIT_OK


def _int_arg(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise _Usage(f"{what} query needs an integer, got {text!r}")


def cmd_kmeans(a) -> int:
    _check_kind(a.transform)
    X = _read_input(a.input, a.format)
    rep = kmeans.jl_kmeans(
        X, a.k, a.eps, a.transform, seed=a.seed, m=a.m, n_init=a.n_init, **_transform_options(a)
    )
    text = json.dumps(rep.to_dict(), indent=2)
    if a.json:
        with open(a.json, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


def cmd_bench(a) -> int:
    kinds = a.kinds.split(",")
    for k in kinds:
        _check_kind(k)
    d_list = [int(v) for v in a.d_list.split(",")]
    records = harness.bench_embed(kinds, d_list, a.m, a.reps, seed=a.seed)
    out = open(a.out, "w", newline="") if a.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["kind", "d", "m", "median_ns"])
        for r in records:
            w.writerow([r.kind, r.d, r.m, int(r.median_ns)])
    finally:
        if a.out:
            out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="jlkit", description="Johnson-Lindenstrauss transforms, sketches and checks.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write random vectors")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--dist", choices=["gaussian", "sphere", "binary-k"], default="gaussian")
    g.add_argument("--k", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("embed", help="embed a vector file with one sampled transform")
    _add_transform_flags(e)
    e.add_argument("--m", type=int, required=True)
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--format", choices=["bin", "csv"], default="bin")
    e.set_defaults(func=cmd_embed)

    v = sub.add_parser("verify", help="Monte Carlo failure-rate check")
    _add_transform_flags(v)
    v.add_argument("--m", type=int)
    v.add_argument("--auto-m", action="store_true")
    v.add_argument("--gen", choices=list(harness.VECTOR_KINDS), default="unit_sphere")
    v.add_argument("--k", type=int)
    v.add_argument("--in", dest="input", help="vectors for --gen fixed")
    v.add_argument("--format", choices=["bin", "csv"], default="bin")
    v.add_argument("--trials", type=int, default=10_000)
    v.add_argument("--json")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sketch", help="AMS / Count Sketch queries on a turnstile stream")
    s.add_argument("--kind", choices=["ams", "cs"], default="cs")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--eps", type=float, default=0.25)
    s.add_argument("--delta", type=float, default=0.05)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--stream", action="append", required=True, help="stream file; repeat for shards")
    s.add_argument("--query", default="f2", help="f2 | point:<i> | topk:<k>")
    s.set_defaults(func=cmd_sketch)

    k = sub.add_parser("kmeans", help="cluster in the embedded space and compare costs")
    k.add_argument("--k", type=int, required=True)
    k.add_argument("--eps", type=float, default=0.25)
    k.add_argument("--transform", default="gaussian")
    k.add_argument("--m", type=int)
    k.add_argument("--in", dest="input", required=True)
    k.add_argument("--format", choices=["bin", "csv"], default="bin")
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--n-init", type=int, default=1, help="shared Lloyd restarts, best kept per space")
    k.add_argument("--json")
    k.set_defaults(func=cmd_kmeans)

    b = sub.add_parser("bench", help="time apply across kinds and dimensions")
    b.add_argument("--kinds", default="rademacher,srht,fjlt")
    b.add_argument("--d-list", default="16384,32768,65536")
    b.add_argument("--m", type=int, default=256)
    b.add_argument("--reps", type=int, default=7)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    try:
        a = build_parser().parse_args(argv)
        return a.func(a)
    except _Usage as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except FormatError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except DimensionError as e:
        print(f"dimension error: {e}", file=sys.stderr)
        return EXIT_DIM
    except (ParameterError, DomainError, streaming.IncompatibleSketchError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
