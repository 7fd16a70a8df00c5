"""Command-line interface: ``tensor-ring <command> ...``.

Exit codes: 0 success, 2 invalid arguments or unreadable input,
3 decomposition finished without reaching the requested accuracy.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import algebra
from .bench import ALGOS, rank_spread, run_table1, run_table2, write_csv, write_jsonl
from .functions import FUNCTIONS, FunctionSpec
from .nd_tensor import read_csv_tensor, read_dtns, relative_error, write_dtns
from .tr_bals import BalsConfig, tr_bals
from .tr_core import avg_rank, num_params, read_trz, to_dense, write_trz
from .tr_svd import SvdConfig, tr_svd

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3


class UsageError(Exception):
    pass


def _shape(text: str) -> tuple[int, ...]:
    try:
        shape = tuple(int(s) for s in text.replace("x", ",").split(",") if s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad shape {text!r}")
    if not shape or min(shape) < 1:
        raise argparse.ArgumentTypeError(f"bad shape {text!r}")
    return shape


def _domain(text: str) -> tuple[float, float]:
    try:
        a, b = (float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"domain must be 'a,b', got {text!r}")
    return a, b


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _load_dense(path: str, shape) -> np.ndarray:
    if path.lower().endswith(".csv"):
        if shape is None:
            raise UsageError("CSV input needs --shape")
        return read_csv_tensor(path, shape)
    return read_dtns(path)


def cmd_decompose(args) -> int:
    t = _load_dense(args.input, args.shape)
    converged = True
    if args.algo == "tr-bals":
        cfg = BalsConfig(epsilon_p=args.eps, max_sweeps=args.max_sweeps, rng_seed=args.seed)
        ring, trace = tr_bals(t, cfg)
        converged = trace.converged
        if args.trace:
            trace.to_csv(args.trace)
    else:
        cfg = SvdConfig(epsilon_p=args.eps, start_mode=args.start_mode, force_tt=args.algo == "tt-svd")
        ring = tr_svd(t, cfg)
    write_trz(args.output, ring)
    eps = relative_error(t, to_dense(ring))
    print(f"{args.algo}: eps={eps:.4e} ranks={list(ring.ranks)} N_p={num_params(ring)}")
    if not converged:
        print(f"warning: target {args.eps:g} not reached", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_info(args) -> int:
    ring = read_trz(args.input)
    print(f"shape: {list(ring.shape)}")
    print(f"ranks: {list(ring.ranks)}")
    print(f"N_p: {num_params(ring)}")
    print(f"avg_rank: {avg_rank(ring):.4g}")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    write_dtns(args.output, to_dense(read_trz(args.input)))
    return EXIT_OK


def cmd_ops(args) -> int:
    a = read_trz(args.a)
    if args.op in ("add", "hadamard", "inner"):
        if args.b is None:
            raise UsageError(f"{args.op} needs two rings")
        b = read_trz(args.b)
    if args.op in ("add", "hadamard"):
        if args.output is None:
            raise UsageError(f"{args.op} needs --out")
        result = algebra.add(a, b) if args.op == "add" else algebra.hadamard(a, b)
        write_trz(args.output, result)
        print(f"ranks: {list(result.ranks)}")
    elif args.op == "inner":
        print(repr(algebra.inner_product(a, b)))
    elif args.op == "norm":
        print(repr(algebra.frobenius_norm(a)))
    else:  # dot
        if args.vectors is None:
            vectors = [np.ones(n) for n in a.shape]
        elif len(args.vectors) != a.d:
            raise UsageError(f"dot needs {a.d} vector files, got {len(args.vectors)}")
        else:
            vectors = [np.loadtxt(p, dtype=np.float64, delimiter=",", ndmin=1) for p in args.vectors]
        print(repr(algebra.multilinear_product(a, vectors)))
    return EXIT_OK


def _emit(reports, out: str) -> None:
    write_csv(out, reports)
    write_jsonl(Path(out).with_suffix(".jsonl"), reports)
    for r in reports:
        print(
            f"{r.func:>3} shift={r.shift_k} {r.algo:>7}: eps={r.epsilon:.2e} "
            f"r={r.avg_rank:.2f} N_p={r.num_params} t={r.wall_ms / 1e3:.2f}s"
        )


def cmd_bench(args) -> int:
    algos = args.algos or list(ALGOS)
    if args.table == "table1":
        funcs = [args.func] if args.func else sorted(FUNCTIONS)
        specs = [FunctionSpec(f, n=args.n, d=args.d, domain=args.domain) for f in funcs]
        reports = run_table1(algos, specs, args.eps, args.snr_db, args.seed)
    else:
        spec = FunctionSpec(args.func or "f2", n=args.n, d=args.d, domain=args.domain)
        reports = run_table2(algos, spec, args.eps, seed=args.seed)
        for algo in algos:
            print(f"{algo} avg-rank spread over shifts: {rank_spread(reports, algo):.2f}")
    _emit(reports, args.out)
    if any(r.status != "converged" for r in reports):
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tensor-ring", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decompose", help="decompose a dense tensor into a ring")
    d.add_argument("--algo", choices=ALGOS, default="tr-svd")
    d.add_argument("--eps", type=_positive, default=1e-3)
    d.add_argument("--start-mode", type=int, default=1)
    d.add_argument("--max-sweeps", type=int, default=50)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--in", dest="input", required=True, help="DTNS file, or CSV with --shape")
    d.add_argument("--shape", type=_shape, help="shape for CSV input, e.g. 4,4,4")
    d.add_argument("--out", dest="output", required=True, help="TRZ1 output")
    d.add_argument("--trace", help="TR-BALS trace CSV")
    d.set_defaults(handler=cmd_decompose)

    o = sub.add_parser("ops", help="arithmetic on TRZ1 rings")
    o.add_argument("op", choices=["add", "hadamard", "inner", "norm", "dot"])
    o.add_argument("a")
    o.add_argument("b", nargs="?")
    o.add_argument("--out", dest="output")
    o.add_argument("--vectors", nargs="+", help="one CSV vector per mode for dot (default: all ones)")
    o.set_defaults(handler=cmd_ops)

    i = sub.add_parser("info", help="print shape, ranks and parameter count of a ring")
    i.add_argument("input")
    i.set_defaults(handler=cmd_info)

    r = sub.add_parser("reconstruct", help="expand a ring to a dense DTNS file")
    r.add_argument("--in", dest="input", required=True)
    r.add_argument("--out", dest="output", required=True)
    r.set_defaults(handler=cmd_reconstruct)

    b = sub.add_parser("bench", help="synthetic-function experiments")
    b.add_argument("table", choices=["table1", "table2"])
    b.add_argument("--func", choices=sorted(FUNCTIONS))
    b.add_argument("--algos", nargs="+", choices=ALGOS)
    b.add_argument("--eps", type=_positive, default=1e-3)
    b.add_argument("--snr-db", type=float)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--domain", type=_domain)
    b.add_argument("--n", type=int, default=4)
    b.add_argument("--d", type=int, default=10)
    b.add_argument("--out", required=True, help="CSV report (JSON lines written alongside)")
    b.set_defaults(handler=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.handler(args)
    except (UsageError, ValueError, ArithmeticError, OSError) as exc:
        print(f"tensor-ring: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
