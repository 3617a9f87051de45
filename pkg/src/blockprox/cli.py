"""Command-line driver: ``blockprox {gen,solve,campaign,report}``.

Exit codes: 0 success, 1 solver error, 2 bad arguments, 3 I/O error.

Examples::

    blockprox gen lasso --seed 3 --out data/lasso
    blockprox solve lasso --data data/lasso --variant restart --max-cycles 2000 --out runs/l1
    blockprox gen swimmer --out data/swimmer
    blockprox solve nmf --data data/swimmer --variant modified_shuffled --param p=17 --out runs/nmf
    blockprox campaign nmf_swimmer --runs 20 --serial --out runs/swimmer
    blockprox report runs/swimmer
"""

import argparse
import dataclasses
import inspect
import os
import sys

import numpy as np

from . import bench, datagen
from .config import load_config
from .exceptions import BlockProxError, FormatError
from .problems import relative_error_path
from .problems.lasso import LASSO_VARIANTS, LassoInstance, lasso_config, solve_lasso
from .problems.nmf import NMF_VARIANTS, nmf_config, solve_nmf
from .problems.ntd import NTD_VARIANTS, ntd_config, solve_ntd
from .problems.regression import (
    REGRESSION_ORDERS,
    regression_config,
    solve_penalized_regression,
    standardize,
)
from .prox import PenaltySpec
from .tensor import read_matrix, read_tensor, write_matrix, write_tensor

EXIT_OK, EXIT_SOLVER, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

GENERATORS = {
    "lasso": datagen.gen_lasso,
    "regression": datagen.gen_regression,
    "swimmer": None,
    "ntd": datagen.gen_random_ntd,
}

SOLVE_DEFAULTS = {
    "lasso": dict(variants=LASSO_VARIANTS, params=dict(lam=None)),
    "regression": dict(variants=REGRESSION_ORDERS, params=dict(penalty="mcp", lam=0.1, gamma=3.0)),
    "nmf": dict(variants=NMF_VARIANTS, params=dict(p=17, L_min=1e-3)),
    "ntd": dict(variants=NTD_VARIANTS, params=dict(core_dims=(3, 3, 3), L_min=1e-3)),
}


class UsageError(Exception):
    pass


def _coerce(name, raw, ref):
    try:
        if isinstance(ref, bool):
            return raw.lower() in ("1", "true", "yes", "on")
        if isinstance(ref, tuple):
            return tuple(int(v) for v in raw.split(","))
        if isinstance(ref, int):
            return int(raw)
        if isinstance(ref, float) or ref is None:
            return float(raw)
    except ValueError:
        raise UsageError(f"--param {name}: cannot parse {raw!r}") from None
    return raw


def parse_params(items, defaults):
    """``["k=v", ...]`` -> dict, typed after ``defaults``; unknown keys are an error."""
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise UsageError(f"--param expects KEY=VALUE, got {item!r}")
        if key not in defaults:
            raise UsageError(f"unknown parameter {key!r}; known: {', '.join(sorted(defaults))}")
        out[key] = _coerce(key, value.strip(), defaults[key])
    return out


def _echo(params):
    return " ".join(f"{k}={','.join(map(str, v)) if isinstance(v, tuple) else v}"
                    for k, v in params.items())


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args):
    kind = args.kind
    if kind == "swimmer":
        spec_fields = {f.name: f.default for f in dataclasses.fields(datagen.SwimmerSpec)
                       if f.name in ("image_side", "n_limb_positions", "limb_length", "intensity")}
        params = {**spec_fields, **parse_params(args.param, spec_fields)}
    else:
        sig = inspect.signature(GENERATORS[kind])
        defaults = {n: p.default for n, p in sig.parameters.items() if n != "seed"}
        params = {**defaults, **parse_params(args.param, defaults)}
    header = f"blockprox gen {kind} seed={args.seed} {_echo(params)}".strip()

    def run():
        os.makedirs(args.out, exist_ok=True)
        path = lambda name: os.path.join(args.out, name)  # noqa: E731
        if kind == "lasso":
            inst, x_true = datagen.gen_lasso(seed=args.seed, **params)
            write_matrix(path("A.txt"), inst.A, header)
            write_matrix(path("b.txt"), inst.b[:, None], header)
            write_matrix(path("x_true.txt"), x_true[:, None], header)
        elif kind == "regression":
            X, y, beta = datagen.gen_regression(seed=args.seed, **params)
            write_matrix(path("X.txt"), X, header)
            write_matrix(path("y.txt"), y[:, None], header)
            write_matrix(path("beta_true.txt"), beta[:, None], header)
        elif kind == "swimmer":
            spec = datagen.SwimmerSpec(**params)
            X, Y = datagen.swimmer_witness(spec)
            write_matrix(path("M.txt"), X @ Y.T, header)
            write_matrix(path("X_witness.txt"), X, header)
            write_matrix(path("Y_witness.txt"), Y, header)
        else:
            M, core, factors = datagen.gen_random_ntd(seed=args.seed, **params)
            write_tensor(path("M.txt"), M, header)
            write_tensor(path("core.txt"), core, header)
            for n, A in enumerate(factors, 1):
                write_matrix(path(f"A{n}.txt"), A, header)
        print(f"wrote {kind} data to {args.out}")

    return run


# ---------------------------------------------------------------------------
# solve


def _lasso_lambda(args, params):
    if params.get("lam") is not None:
        return params["lam"]
    # fall back to the value echoed by `gen lasso`
    _, comments = read_matrix(os.path.join(args.data, "A.txt"), with_comments=True)
    for line in comments:
        for token in line.split():
            if token.startswith("lam="):
                return float(token[4:])
    raise UsageError("lasso needs --param lam=... (no lam= in the data header)")


def cmd_solve(args):
    problem = args.problem
    info = SOLVE_DEFAULTS[problem]
    variant = args.variant or info["variants"][0]
    if variant not in info["variants"]:
        raise UsageError(f"unknown {problem} variant {variant!r}; choose from {', '.join(info['variants'])}")
    params = {**info["params"], **parse_params(args.param, info["params"])}
    max_cycles = args.max_cycles
    data = lambda name: os.path.join(args.data, name)  # noqa: E731

    # build the engine configuration first so that bad settings exit with 2
    if problem == "lasso":
        base = lasso_config(variant, max_cycles or 5000)
    elif problem == "regression":
        base = regression_config(variant, max_cycles or 500, args.seed)
        PenaltySpec(params["penalty"], params["lam"], params["gamma"])
    elif problem == "nmf":
        base = nmf_config(variant, params["p"], max_cycles or 100, args.seed)
    else:
        base = ntd_config(variant, len(params["core_dims"]), max_cycles or 500, args.seed)
    if args.config:
        try:
            base = load_config(args.config, base)
        except (KeyError, ValueError) as err:
            raise UsageError(f"{args.config}: {err}") from None
    overrides = dict(seed=args.seed)
    if max_cycles is not None:
        overrides["max_cycles"] = max_cycles
    if args.tol is not None:
        overrides["tol_obj"] = args.tol
    config = dataclasses.replace(base, **overrides)

    def run():
        os.makedirs(args.out, exist_ok=True)
        out = lambda name: os.path.join(args.out, name)  # noqa: E731
        rel = None
        if problem == "lasso":
            inst = LassoInstance(read_matrix(data("A.txt")), read_matrix(data("b.txt")).ravel(),
                                 _lasso_lambda(args, params))
            x, trace = solve_lasso(inst, variant, config=config)
            write_matrix(out("x.txt"), x[:, None])
        elif problem == "regression":
            inst = standardize(read_matrix(data("X.txt")), read_matrix(data("y.txt")).ravel(),
                               PenaltySpec(params["penalty"], params["lam"], params["gamma"]))
            beta, trace = solve_penalized_regression(inst, variant, config=config)
            write_matrix(out("beta.txt"), beta[:, None])
        elif problem == "nmf":
            M = read_matrix(data("M.txt"))
            X, Y, trace = solve_nmf(M, params["p"], variant, params["L_min"], seed=args.seed,
                                    config=config)
            write_matrix(out("X.txt"), X)
            write_matrix(out("Y.txt"), Y)
            rel = relative_error_path(trace, np.linalg.norm(M))
        else:
            M = read_tensor(data("M.txt"))
            core, factors, trace = solve_ntd(M, params["core_dims"], variant, seed=args.seed,
                                             L_min=params["L_min"], config=config)
            write_tensor(out("core.txt"), core)
            for n, A in enumerate(factors, 1):
                write_matrix(out(f"A{n}.txt"), A)
            rel = relative_error_path(trace, np.linalg.norm(M))
        trace.to_csv(out("trace.csv"))
        msg = (f"{problem}/{variant}: {trace.status} after {len(trace)} updates, "
               f"objective {trace.objective[-1]:.10g}")
        if rel is not None:
            msg += f", relative error {rel[-1]:.3e}"
        print(msg)

    return run


# ---------------------------------------------------------------------------
# campaign / report


def cmd_campaign(args):
    spec = bench.EXPERIMENTS[args.experiment]
    options = parse_params(args.param, spec["options"])
    variants = tuple(v for item in (args.variant or ()) for v in item.split(",") if v)
    c = bench.Campaign(args.experiment, n_runs=args.runs, base_seed=args.seed,
                       variants=variants, max_cycles=args.max_cycles,
                       success_threshold=args.tol, options=options)
    workers = 1 if args.serial else max(1, args.workers)

    def run():
        os.makedirs(args.out, exist_ok=True)

        def progress(cell):
            if not args.quiet:
                print(f"  run {cell.run:3d} {cell.variant:<24} {cell.status:<12} "
                      f"final error {cell.final_error:.3e}", file=sys.stderr)

        result = bench.run_campaign(c, workers=workers, progress=progress)
        bench.write_campaign(result, args.out, deterministic=args.serial)
        print(bench.format_report(result))
        if all(x.status == "error" for x in result.cells):
            return EXIT_SOLVER
        return EXIT_OK

    return run


def cmd_report(args):
    def run():
        result = bench.load_campaign(args.dir)
        if args.tol is not None:
            result.campaign.success_threshold = args.tol
            for x in result.cells:
                x.success = x.status != "error" and x.final_error < args.tol
        print(bench.format_report(result))

    return run


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="blockprox", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("gen", help="write a seeded synthetic dataset")
    g.add_argument("kind", choices=sorted(GENERATORS))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, metavar="DIR")
    g.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="generator parameter, e.g. m=100 or dims=20,20,20")

    s = sub.add_parser("solve", help="run one solver on data written by `gen`")
    s.add_argument("problem", choices=sorted(SOLVE_DEFAULTS))
    s.add_argument("--data", required=True, metavar="DIR")
    s.add_argument("--variant")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-cycles", type=int)
    s.add_argument("--tol", type=float, help="relative objective-change stopping tolerance")
    s.add_argument("--config", metavar="FILE", help="key=value solver configuration")
    s.add_argument("--param", action="append", metavar="KEY=VALUE")
    s.add_argument("--out", required=True, metavar="DIR")

    c = sub.add_parser("campaign", help="multi-seed experiment with success accounting")
    c.add_argument("experiment", choices=sorted(bench.EXPERIMENTS))
    c.add_argument("--runs", type=int, default=20)
    c.add_argument("--seed", type=int, default=0, help="base seed; run r uses seed + r")
    c.add_argument("--max-cycles", type=int)
    c.add_argument("--tol", type=float, help="success threshold on the final error")
    c.add_argument("--variant", action="append", help="variant(s), repeatable or comma separated")
    c.add_argument("--param", action="append", metavar="KEY=VALUE")
    c.add_argument("--out", required=True, metavar="DIR")
    c.add_argument("--serial", action="store_true",
                   help="one cell at a time; CSV outputs are byte-reproducible")
    c.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    c.add_argument("--quiet", action="store_true")

    r = sub.add_parser("report", help="summarize a finished campaign directory")
    r.add_argument("dir")
    r.add_argument("--tol", type=float, help="re-evaluate success with this threshold")
    return parser


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "campaign": cmd_campaign, "report": cmd_report}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    try:
        run = COMMANDS[args.verb](args)
    except (UsageError, ValueError, KeyError) as err:
        if isinstance(err, FormatError):
            print(f"blockprox: {err}", file=sys.stderr)
            return EXIT_IO
        print(f"blockprox: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print(f"blockprox: {err}", file=sys.stderr)
        return EXIT_IO

    try:
        code = run()
    except UsageError as err:
        print(f"blockprox: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, FormatError) as err:
        print(f"blockprox: {err}", file=sys.stderr)
        return EXIT_IO
    except (BlockProxError, ValueError, FloatingPointError) as err:
        print(f"blockprox: solver error: {err}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
