"""Command-line entry point wiring all modules.

Subcommands: gen, memdet, flodance, slq, blockdiag, cost, pipeline.  Every
subcommand accepts --json for machine-readable output on stdout.  Sizes and
byte budgets accept K/M/G suffixes (powers of 1024).  Exit codes: 0 success,
2 usage error, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .baselines import SlqConfig, block_diagonal_logdet, slq_logdet
from .cost import predicted_cost
from .errors import NumericalError, OocdetError, StorageError
from .flodance import fit_prefix, predict, predict_interval, scaling_ratio_trace
from .kernelgen import gen_gram
from .memdet import memdet_cholesky, memdet_ldl, memdet_lu
from .prefixio import read_prefix
from .storage import MatrixFile

SCHEMA_VERSION = 1

ASSUME_TO_DRIVER = {"gen": memdet_lu, "sym": memdet_ldl, "spd": memdet_cholesky}

_SUFFIXES = {"k": 1 << 10, "m": 1 << 20, "g": 1 << 30}


def parse_size(text: str) -> int:
    """Parse a byte count with an optional K/M/G suffix (powers of 1024)."""
    s = text.strip().lower().removesuffix("b")
    if s and s[-1] in _SUFFIXES:
        mult, s = _SUFFIXES[s[-1]], s[:-1]
    else:
        mult = 1
    try:
        value = int(float(s) * mult) if "." in s else int(s) * mult
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse size {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"size must be non-negative: {text!r}")
    return value


def _emit(args, payload: dict, text_lines):
    if args.json:
        json.dump(payload, sys.stdout, sort_keys=True)
        sys.stdout.write("\n")
    else:
        for line in text_lines:
            print(line)


def _report(command: str, inputs: dict, outputs: dict, started: float) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "outputs": outputs,
        "timing": {"wall_seconds": time.perf_counter() - started},
    }


def cmd_gen(args) -> int:
    mf = gen_gram(kind=args.kind, n=args.n, d=args.d, p=args.p,
                  alpha=args.alpha, nu=args.nu, seed=args.seed,
                  out=args.out, jitter=args.jitter, unit_sigma=args.unit_sigma)
    payload = {"schema_version": SCHEMA_VERSION, "path": mf.path, "m": mf.m,
               "dtype": str(mf.dtype), "symmetry": mf.symmetry,
               "kind": args.kind, "seed": args.seed}
    _emit(args, payload, [f"wrote {mf.symmetry} {mf.m}x{mf.m} matrix to {mf.path}"])
    return 0


def cmd_memdet(args) -> int:
    driver = ASSUME_TO_DRIVER[args.assume]
    kwargs = dict(max_mem=args.max_mem, num_blocks=args.num_blocks,
                  scratch_dir=args.scratch_dir)
    if args.assume in ("sym", "spd"):
        kwargs["prefix_out"] = args.prefix_out
    elif args.prefix_out:
        raise ValueError("--prefix-out requires --assume sym or spd")
    result = driver(args.infile, **kwargs)
    info = result.info
    payload = {
        "schema_version": SCHEMA_VERSION,
        "logabsdet": result.logabsdet, "sign": result.sign,
        "n_b": info.n_b, "b": info.b,
        "blocks_read": info.blocks_read, "blocks_written": info.blocks_written,
        "scratch_slots": info.scratch_slots, "wall_seconds": info.wall_seconds,
    }
    _emit(args, payload, [
        f"logabsdet = {result.logabsdet:.12e} (sign {result.sign:+d})",
        f"n_b = {info.n_b}, b = {info.b}, reads = {info.blocks_read}, "
        f"writes = {info.blocks_written}, scratch slots = {info.scratch_slots}",
        f"wall time {info.wall_seconds:.3f} s",
    ])
    return 0


def cmd_flodance(args) -> int:
    ell, _ = read_prefix(args.prefix)
    fit = fit_prefix(ell, args.d, args.n0, args.ns, args.q)
    l_hat, ell_hat = predict(fit, args.predict)
    payload = {"schema_version": SCHEMA_VERSION, **fit.to_json_dict(),
               "n": args.predict, "L_hat": float(l_hat),
               "logdet_hat": float(ell_hat)}
    lines = [f"fit on [{args.n0}, {args.ns}], q = {args.q}: "
             f"c0 = {fit.c0:.6g}, nu = {np.array2string(fit.nu, precision=6)}, "
             f"sigma_hat = {fit.sigma_hat:.6g}",
             f"L_hat({args.predict}) = {float(l_hat):.12e}",
             f"logdet_hat({args.predict}) = {float(ell_hat):.12e}"]
    if args.interval is not None:
        lo, hi = predict_interval(fit, args.predict, args.interval)
        payload["interval"] = {"level": args.interval, "lower": lo, "upper": hi}
        lines.append(f"{args.interval:.0%} interval [{lo:.12e}, {hi:.12e}]")
    if args.trace_out:
        trace = scaling_ratio_trace(ell, args.d)
        with open(args.trace_out, "w") as f:
            f.write("n,log_ratio\n")
            for n, v in enumerate(trace, start=2):
                f.write(f"{n},{v!r}\n")
        lines.append(f"wrote ratio trace to {args.trace_out}")
    _emit(args, payload, lines)
    return 0


def cmd_slq(args) -> int:
    config = SlqConfig(lanczos=args.lanczos, samples=args.samples, seed=args.seed)
    estimate = slq_logdet(args.infile, config)
    payload = {"schema_version": SCHEMA_VERSION, "logdet_estimate": estimate,
               "lanczos": args.lanczos, "samples": args.samples, "seed": args.seed}
    _emit(args, payload, [f"logdet estimate = {estimate:.12e} "
                          f"(l = {args.lanczos}, s = {args.samples})"])
    return 0


def cmd_blockdiag(args) -> int:
    estimate = block_diagonal_logdet(args.infile, args.d)
    payload = {"schema_version": SCHEMA_VERSION, "logabsdet_estimate": estimate,
               "d": args.d}
    _emit(args, payload, [f"block-diagonal logabsdet = {estimate:.12e}"])
    return 0


def cmd_cost(args) -> int:
    case = {"gen": "generic", "sym": "symmetric"}[args.case]
    breakdown = predicted_cost(args.m, args.nb, case)
    payload = {"schema_version": SCHEMA_VERSION, **breakdown.to_json_dict()}
    d = breakdown.to_json_dict()
    lines = [f"case {case}, m = {args.m}, n_b = {args.nb}, b = {d['b']}"]
    for name, op in d["operations"].items():
        if op["count"]:
            lines.append(f"  {name}: {op['count']} ops x {op['flops_per_op']} "
                         f"flops = {op['total']}")
    lines += [f"total flops = {d['total_flops']}",
              f"reads = {d['blocks_read']}, writes = {d['blocks_written']}, "
              f"scratch slots = {d['scratch_slots']}"]
    _emit(args, payload, lines)
    return 0


def cmd_pipeline(args) -> int:
    started = time.perf_counter()
    gen_inputs = {"kind": args.kind, "n": args.n, "d": args.d, "p": args.p,
                  "alpha": args.alpha, "nu": args.nu, "seed": args.seed,
                  "jitter": args.jitter}
    mf = gen_gram(kind=args.kind, n=args.n, d=args.d, p=args.p,
                  alpha=args.alpha, nu=args.nu, seed=args.seed,
                  out=args.out, jitter=args.jitter, unit_sigma=args.unit_sigma)
    driver = ASSUME_TO_DRIVER[args.assume]
    result = driver(mf, max_mem=args.max_mem, num_blocks=args.num_blocks,
                    scratch_dir=args.scratch_dir)
    truth = result.logabsdet
    fit = fit_prefix(result.prefix, args.d, args.n0, args.ns, args.q)
    _, ell_hat = predict(fit, args.n)
    rel_error = abs(float(ell_hat) - truth) / max(1.0, abs(truth))
    outputs = {
        "matrix": {"path": mf.path, "m": mf.m, "symmetry": mf.symmetry},
        "memdet": {"logabsdet": truth, "sign": result.sign,
                   **result.info.to_json_dict()},
        "flodance": {**fit.to_json_dict(), "n": args.n,
                     "logdet_hat": float(ell_hat)},
        "rel_error": rel_error,
    }
    payload = _report("pipeline", gen_inputs, outputs, started)
    _emit(args, payload, [
        f"generated {mf.m}x{mf.m} {args.kind} matrix",
        f"memdet logabsdet = {truth:.12e}",
        f"extrapolated logdet_hat({args.n}) = {float(ell_hat):.12e}",
        f"relative error = {rel_error:.3e}",
    ])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oocdet",
        description="memory-budgeted log-determinants, scaling-law "
                    "extrapolation, generators, and baselines")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_json(p):
        p.add_argument("--json", action="store_true",
                       help="emit machine-readable JSON on stdout")

    def add_gen_args(p):
        p.add_argument("--kind", default="matern-lmc",
                       choices=("matern-lmc", "rbf", "spd-random",
                                "sym-random", "gen-random"))
        p.add_argument("--n", type=int, required=True, help="datapoint count")
        p.add_argument("--d", type=int, default=1, help="outputs per datapoint")
        p.add_argument("--p", type=int, default=2, help="spatial dimension")
        p.add_argument("--alpha", type=float, default=None,
                       help="correlation scale / length scale")
        p.add_argument("--nu", type=float, default=None, help="smoothness")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jitter", type=float, default=0.0,
                       help="added to the diagonal")
        p.add_argument("--unit-sigma", action="store_true",
                       help="identity local covariances instead of Wishart draws")
        p.add_argument("--out", required=True, help="output matrix file")

    p = sub.add_parser("gen", help="generate a kernel Gram or random test matrix")
    add_gen_args(p)
    add_json(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("memdet", help="exact log-determinant under a memory budget")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--assume", choices=("gen", "sym", "spd"), required=True)
    p.add_argument("--max-mem", type=parse_size, default=None,
                   help="tile memory budget in bytes (K/M/G suffixes allowed)")
    p.add_argument("--num-blocks", type=int, default=None,
                   help="override the budget-derived block count")
    p.add_argument("--scratch-dir", default=None)
    p.add_argument("--prefix-out", default=None,
                   help="write prefix log-determinants (sym/spd only)")
    add_json(p)
    p.set_defaults(func=cmd_memdet)

    p = sub.add_parser("flodance", help="fit and extrapolate a prefix sequence")
    p.add_argument("--prefix", required=True, help="prefix sidecar file")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n0", type=int, required=True, help="burn-in start")
    p.add_argument("--ns", type=int, required=True, help="fit window end")
    p.add_argument("--q", type=int, required=True, help="exponent correction order")
    p.add_argument("--predict", type=int, required=True, metavar="N")
    p.add_argument("--interval", type=float, default=None, metavar="LEVEL")
    p.add_argument("--trace-out", default=None,
                   help="write the determinant-ratio trace as CSV")
    add_json(p)
    p.set_defaults(func=cmd_flodance)

    p = sub.add_parser("slq", help="stochastic Lanczos quadrature estimate")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--lanczos", type=int, required=True, metavar="L")
    p.add_argument("--samples", type=int, required=True, metavar="S")
    p.add_argument("--seed", type=int, default=0)
    add_json(p)
    p.set_defaults(func=cmd_slq)

    p = sub.add_parser("blockdiag", help="block-diagonal approximation")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--d", type=int, required=True)
    add_json(p)
    p.set_defaults(func=cmd_blockdiag)

    p = sub.add_parser("cost", help="analytical cost model query")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--nb", type=int, required=True)
    p.add_argument("--case", choices=("gen", "sym"), default="gen")
    add_json(p)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("pipeline",
                       help="generate, factorize, fit, and extrapolate end to end")
    add_gen_args(p)
    p.add_argument("--assume", choices=("sym", "spd"), default="sym")
    p.add_argument("--max-mem", type=parse_size, default=None)
    p.add_argument("--num-blocks", type=int, default=None)
    p.add_argument("--scratch-dir", default=None)
    p.add_argument("--n0", type=int, default=1)
    p.add_argument("--ns", type=int, required=True)
    p.add_argument("--q", type=int, default=0)
    add_json(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (StorageError, OSError) as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return 4
    except OocdetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
