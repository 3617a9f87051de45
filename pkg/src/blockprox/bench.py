"""Multi-run experiment campaigns, success accounting and CSV outputs.

A campaign runs every variant of one experiment on ``n_runs`` seeded
instances. Run ``r`` uses seed ``base_seed + r``; within a run every variant
gets the same data and the same starting point and the same cycle budget.

Outputs written by :func:`write_campaign`::

    campaign.cfg       key = value echo of the campaign
    summary.csv        variant,successes,n_runs,median_final_error,median_wall_time_s
    contingency.csv    outcome counts for the experiment's pair of variants
    cells.csv          one row per (run, variant)
    convergence.csv    variant,run,iter,objective,rel_error,time_s
    traces/            the engine trace of every cell

With ``deterministic=True`` (the CLI's ``--serial``) every time column holds
``nan`` so that repeated campaigns give byte-identical CSVs; the measured wall
times then go to ``timing.log`` only.
"""

import csv
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import derive_seed
from .datagen import gen_lasso, gen_random_ntd, gen_regression, gen_swimmer
from .exceptions import BlockProxError
from .problems import relative_error_path
from .problems.lasso import LASSO_VARIANTS, solve_lasso
from .problems.nmf import NMF_VARIANTS, nmf_init, solve_nmf
from .problems.ntd import solve_ntd
from .problems.regression import REGRESSION_ORDERS, solve_penalized_regression, standardize
from .prox import PenaltySpec

# variants, cycle budget, success threshold, contingency pair (A, B), options
EXPERIMENTS = {
    "lasso_fig1": dict(
        variants=LASSO_VARIANTS, max_cycles=5000, threshold=1e-6,
        pair=("backtracked_omega", "fista"),
        options=dict(m=100, n=2000, sparsity=20, noise_sigma=0.1, lam=1.0)),
    "regression": dict(
        variants=REGRESSION_ORDERS, max_cycles=500, threshold=1e-6,
        pair=("shuffled", "cyclic"),
        options=dict(n=100, p=20, sparsity=5, penalty="mcp", lam=0.1, gamma=3.0)),
    "nmf_swimmer": dict(
        variants=NMF_VARIANTS, max_cycles=100, threshold=1e-3,
        pair=("modified_shuffled", "modified_cyclic"),
        options=dict(p=17, L_min=1e-3)),
    "ntd_random": dict(
        variants=("bpg", "bpg_noextrap"), max_cycles=500, threshold=1e-3,
        pair=("bpg", "bpg_noextrap"),
        options=dict(dims=(20, 20, 20), core_dims=(3, 3, 3), L_min=1e-3)),
    "ntd_swimmer": dict(
        variants=("frequent_core_cyclic", "frequent_core_shuffled"), max_cycles=500,
        threshold=1e-3, pair=("frequent_core_shuffled", "frequent_core_cyclic"),
        options=dict(core_dims=(24, 17, 16), L_min=1e-3)),
}

CONVERGENCE_HEADER = ("variant", "run", "iter", "objective", "rel_error", "time_s")
SUMMARY_HEADER = ("variant", "successes", "n_runs", "median_final_error", "median_wall_time_s")
CONTINGENCY_HEADER = ("variant_a", "variant_b", "both_succeed", "only_a", "only_b", "both_fail")
CELLS_HEADER = ("variant", "run", "seed", "status", "iterations", "final_objective",
                "final_error", "success", "wall_time_s", "message")


@dataclass
class Campaign:
    """What to run. Empty/None fields fall back to the experiment defaults."""

    experiment: str
    n_runs: int = 20
    base_seed: int = 0
    variants: tuple = ()
    max_cycles: int = None
    success_threshold: float = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; "
                             f"choose from {', '.join(EXPERIMENTS)}")
        spec = EXPERIMENTS[self.experiment]
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        self.variants = tuple(self.variants) or tuple(spec["variants"])
        unknown = [v for v in self.variants if v not in spec["variants"]]
        if unknown:
            raise ValueError(f"unknown variants for {self.experiment}: {unknown}")
        if self.max_cycles is None:
            self.max_cycles = spec["max_cycles"]
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be >= 1")
        if self.success_threshold is None:
            self.success_threshold = spec["threshold"]
        unknown = set(self.options) - set(spec["options"])
        if unknown:
            raise ValueError(f"unknown options for {self.experiment}: {sorted(unknown)}")
        self.options = {**spec["options"], **self.options}

    def seed(self, run):
        return self.base_seed + run

    @property
    def pair(self):
        a, b = EXPERIMENTS[self.experiment]["pair"]
        if a in self.variants and b in self.variants:
            return a, b
        return tuple(self.variants[:2]) if len(self.variants) >= 2 else None


@dataclass
class CellResult:
    variant: str
    run: int
    seed: int
    status: str
    objective: np.ndarray = None
    time_s: np.ndarray = None
    trace: object = None
    rel_error: np.ndarray = None
    wall_time: float = math.nan
    message: str = ""
    success: bool = False

    @property
    def final_error(self):
        if self.rel_error is None or len(self.rel_error) == 0:
            return math.nan
        return float(self.rel_error[-1])


@dataclass
class CampaignResult:
    campaign: Campaign
    cells: list

    def cell(self, variant, run):
        for c in self.cells:
            if c.variant == variant and c.run == run:
                return c
        raise KeyError((variant, run))

    def summary(self):
        return summarize(self.campaign, self.cells)

    def contingency(self):
        return contingency_table(self.campaign, self.cells)


# ---------------------------------------------------------------------------
# per-run data and solves


def _run_data(c, run):
    """Data shared by all variants of one run."""
    seed, o = c.seed(run), c.options
    if c.experiment == "lasso_fig1":
        inst, _ = gen_lasso(o["m"], o["n"], o["sparsity"], o["noise_sigma"], seed, o["lam"])
        return dict(instance=inst)
    if c.experiment == "regression":
        X, y, _ = gen_regression(o["n"], o["p"], o["sparsity"], seed=seed)
        spec = PenaltySpec(o["penalty"], o["lam"], o["gamma"])
        return dict(instance=standardize(X, y, spec))
    if c.experiment == "nmf_swimmer":
        M = gen_swimmer()
        X0, Y0 = nmf_init(M, o["p"], derive_seed(seed, "start"))
        return dict(M=M, X0=X0, Y0=Y0)
    if c.experiment == "ntd_random":
        M, _, _ = gen_random_ntd(o["dims"], o["core_dims"], seed)
        return dict(M=M)
    M = gen_swimmer()
    side = int(round(math.sqrt(M.shape[0])))
    return dict(M=M.reshape((side, side, M.shape[1]), order="F"))


def _solve_cell(c, run, variant, data):
    seed, o = c.seed(run), c.options
    if c.experiment == "lasso_fig1":
        return solve_lasso(data["instance"], variant, max_iter=c.max_cycles)[1]
    if c.experiment == "regression":
        return solve_penalized_regression(data["instance"], variant, c.max_cycles,
                                          seed=seed, tol_obj=0.0)[1]
    if c.experiment == "nmf_swimmer":
        return solve_nmf(data["M"], o["p"], variant, o["L_min"], c.max_cycles, seed,
                         X0=data["X0"], Y0=data["Y0"])[2]
    return solve_ntd(data["M"], o["core_dims"], variant, c.max_cycles, seed, o["L_min"],
                     core0=data.get("core0"), factors0=data.get("factors0"))[2]


def run_cell(c, run, variant, data=None):
    """Solve one (run, variant) cell; solver failures are captured, not raised."""
    data = _run_data(c, run) if data is None else data
    t0 = time.perf_counter()
    try:
        trace = _solve_cell(c, run, variant, data)
    except (BlockProxError, ValueError, FloatingPointError) as err:
        return CellResult(variant, run, c.seed(run), "error", wall_time=time.perf_counter() - t0,
                          message=f"{type(err).__name__}: {err}")
    cell = CellResult(variant, run, c.seed(run), trace.status, trace=trace,
                      objective=np.asarray(trace.objective, dtype=float),
                      time_s=np.asarray(trace.time_s, dtype=float),
                      wall_time=time.perf_counter() - t0)
    if "M" in data:
        cell.rel_error = relative_error_path(trace, np.linalg.norm(data["M"]))
    return cell


def _finish_run(c, cells):
    """Fill relative errors and success flags of the cells of one run."""
    if c.experiment in ("lasso_fig1", "regression"):
        ok = [x for x in cells if x.objective is not None and len(x.objective)]
        if ok:
            best = min(float(x.objective.min()) for x in ok)
            for x in ok:
                x.rel_error = (x.objective - best) / max(1.0, abs(best))
    for x in cells:
        x.success = x.status != "error" and x.final_error < c.success_threshold


def run_campaign(c, workers=1, progress=None, data_fn=None):
    """Execute all cells (in a thread pool when ``workers > 1``).

    ``progress(cell)`` is called as cells finish. Cells are returned in
    (run, variant) order regardless of completion order. ``data_fn(run)``
    replaces the seeded per-run data (same keys as the built-in generators,
    e.g. ``M, X0, Y0`` for ``nmf_swimmer``).
    """
    data_cache = {}
    make_data = (lambda run: _run_data(c, run)) if data_fn is None else data_fn

    def data_for(run):
        if run not in data_cache:
            data_cache[run] = make_data(run)
        return data_cache[run]

    jobs = [(run, v) for run in range(c.n_runs) for v in c.variants]
    if workers > 1:
        # data are built up front so the workers share read-only inputs
        for run in range(c.n_runs):
            data_for(run)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_cell, c, run, v, data_cache[run]) for run, v in jobs]
            cells = []
            for f in futures:
                cells.append(f.result())
                if progress:
                    progress(cells[-1])
    else:
        cells = []
        for run, v in jobs:
            cells.append(run_cell(c, run, v, data_for(run)))
            data_cache.pop(run - 1, None)
            if progress:
                progress(cells[-1])
    for run in range(c.n_runs):
        _finish_run(c, [x for x in cells if x.run == run])
    return CampaignResult(c, cells)


# ---------------------------------------------------------------------------
# aggregation


def _median(values):
    values = [v for v in values if not math.isnan(v)]
    return float(np.median(values)) if values else math.nan


def summarize(c, cells, with_time=True):
    """Rows ``(variant, successes, n_runs, median_final_error, median_wall_time_s)``."""
    rows = []
    for v in c.variants:
        mine = [x for x in cells if x.variant == v]
        wall = _median([x.wall_time for x in mine]) if with_time else math.nan
        rows.append((v, sum(x.success for x in mine), len(mine),
                     _median([x.final_error for x in mine]), wall))
    return rows


def contingency_table(c, cells):
    """``(A, B, both, only A, only B, neither)`` over runs, or None without a pair."""
    pair = c.pair
    if pair is None:
        return None
    a, b = pair
    ok = {(x.variant, x.run): x.success for x in cells}
    counts = [0, 0, 0, 0]
    for run in sorted({x.run for x in cells}):
        sa, sb = ok.get((a, run), False), ok.get((b, run), False)
        counts[0 if sa and sb else 1 if sa else 2 if sb else 3] += 1
    return (a, b, *counts)


# ---------------------------------------------------------------------------
# files


def _f(x):
    return repr(float(x))


def emit_convergence_csv(cells, path, with_time=True):
    """Long-format ``variant,run,iter,objective,rel_error,time_s`` rows.

    One row per iteration of every successful cell, in the order given.
    Floats are written with ``repr`` so they parse back exactly.
    """
    cells = list(cells)
    if not cells:
        raise ValueError("no traces to write")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CONVERGENCE_HEADER)
        for x in cells:
            if x.objective is None:
                continue
            rel = x.rel_error if x.rel_error is not None else np.full(len(x.objective), math.nan)
            for k, (F, e) in enumerate(zip(x.objective, rel), 1):
                t = x.time_s[k - 1] if with_time else math.nan
                w.writerow((x.variant, x.run, k, _f(F), _f(e), _f(t)))


def read_convergence_csv(path):
    """Parse a convergence CSV into ``{(variant, run): columns}``."""
    out = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CONVERGENCE_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            key = (row["variant"], int(row["run"]))
            cols = out.setdefault(key, {"iter": [], "objective": [], "rel_error": [], "time_s": []})
            cols["iter"].append(int(row["iter"]))
            for name in ("objective", "rel_error", "time_s"):
                cols[name].append(float(row[name]))
    return out


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_f(v) if isinstance(v, float) else v for v in row])


def campaign_to_text(c):
    lines = [f"experiment = {c.experiment}", f"n_runs = {c.n_runs}",
             f"base_seed = {c.base_seed}", f"variants = {','.join(c.variants)}",
             f"max_cycles = {c.max_cycles}", f"success_threshold = {c.success_threshold!r}"]
    for key, value in c.options.items():
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        lines.append(f"option.{key} = {value}")
    return "\n".join(lines) + "\n"


def campaign_from_text(text):
    """Inverse of :func:`campaign_to_text`."""
    raw = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            key, _, value = line.partition("=")
            raw[key.strip()] = value.strip()
    exp = raw.pop("experiment")
    defaults = EXPERIMENTS[exp]["options"]
    options = {}
    for key in [k for k in raw if k.startswith("option.")]:
        name, value = key[len("option."):], raw.pop(key)
        ref = defaults.get(name)
        if isinstance(ref, tuple):
            options[name] = tuple(int(v) for v in value.split(","))
        elif isinstance(ref, int):
            options[name] = int(value)
        elif isinstance(ref, float):
            options[name] = float(value)
        else:
            options[name] = value
    return Campaign(
        experiment=exp,
        n_runs=int(raw["n_runs"]),
        base_seed=int(raw["base_seed"]),
        variants=tuple(raw["variants"].split(",")),
        max_cycles=int(raw["max_cycles"]),
        success_threshold=float(raw["success_threshold"]),
        options=options,
    )


def write_campaign(result, out_dir, deterministic=False):
    """Write all campaign outputs into ``out_dir`` (created if needed)."""
    c, cells = result.campaign, result.cells
    os.makedirs(os.path.join(out_dir, "traces"), exist_ok=True)
    with_time = not deterministic
    with open(os.path.join(out_dir, "campaign.cfg"), "w") as fh:
        fh.write(campaign_to_text(c))
    _write_rows(os.path.join(out_dir, "summary.csv"), SUMMARY_HEADER,
                summarize(c, cells, with_time))
    table = contingency_table(c, cells)
    if table is not None:
        _write_rows(os.path.join(out_dir, "contingency.csv"), CONTINGENCY_HEADER, [table])
    _write_rows(os.path.join(out_dir, "cells.csv"), CELLS_HEADER, [
        (x.variant, x.run, x.seed, x.status,
         len(x.objective) if x.objective is not None else 0,
         float(x.objective[-1]) if x.objective is not None and len(x.objective) else math.nan,
         x.final_error, int(x.success), x.wall_time if with_time else math.nan, x.message)
        for x in cells])
    emit_convergence_csv(cells, os.path.join(out_dir, "convergence.csv"), with_time)
    for x in cells:
        if x.trace is not None:
            x.trace.to_csv(os.path.join(out_dir, "traces", f"{x.variant}_run{x.run}.csv"))
    if deterministic:
        with open(os.path.join(out_dir, "timing.log"), "w") as fh:
            for x in cells:
                fh.write(f"{x.variant} run {x.run}: {x.wall_time:.3f} s\n")


def load_campaign(out_dir):
    """Rebuild a :class:`CampaignResult` from the files of a finished campaign.

    Engine traces are not reloaded; objectives, errors and times come from
    ``convergence.csv`` and the cell statuses from ``cells.csv``.
    """
    with open(os.path.join(out_dir, "campaign.cfg")) as fh:
        c = campaign_from_text(fh.read())
    series = read_convergence_csv(os.path.join(out_dir, "convergence.csv"))
    cells = []
    with open(os.path.join(out_dir, "cells.csv"), newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["variant"], int(row["run"]))
            cell = CellResult(row["variant"], int(row["run"]), int(row["seed"]), row["status"],
                              wall_time=float(row["wall_time_s"]), message=row["message"])
            if key in series:
                cols = series[key]
                cell.objective = np.array(cols["objective"])
                cell.rel_error = np.array(cols["rel_error"])
                cell.time_s = np.array(cols["time_s"])
            cell.success = cell.status != "error" and cell.final_error < c.success_threshold
            cells.append(cell)
    return CampaignResult(c, cells)


def format_report(result):
    """Plain-text summary and contingency table."""
    c = result.campaign
    lines = [f"{c.experiment}: {c.n_runs} runs from seed {c.base_seed}, "
             f"{c.max_cycles} cycles, success if final error < {c.success_threshold:g}", ""]
    lines.append(f"{'variant':<24} {'successes':>9} {'median error':>13} {'median time':>12}")
    for v, succ, n, err, wall in result.summary():
        wall = "-" if math.isnan(wall) else f"{wall:.2f}s"
        lines.append(f"{v:<24} {succ:>5} / {n:<2} {err:>13.3e} {wall:>12}")
    table = result.contingency()
    if table is not None:
        a, b, both, only_a, only_b, neither = table
        lines += ["", f"A = {a}, B = {b}",
                  f"  both succeed {both}, only A {only_a}, only B {only_b}, both fail {neither}"]
    return "\n".join(lines)
