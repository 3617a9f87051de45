"""Sparse regression with nonconvex penalties by coordinate descent.

Each coefficient is one block; its update is the scalar proximal map of the
penalty. We compare the l1 penalty with MCP and SCAD on a seeded problem
where the true coefficient vector has 5 nonzeros, and check that the result
is a coordinatewise minimizer (no single coefficient can be moved to lower
the objective).
"""
import numpy as np

from blockprox.datagen import gen_regression
from blockprox.problems.regression import (coordinate_improvement,
                                           solve_penalized_regression, standardize)
from blockprox.prox import PenaltySpec

X_raw, y_raw, beta_true = gen_regression(n=100, p=20, sparsity=5, noise_sigma=0.5, seed=3)

penalties = {
    "l1": PenaltySpec("l1", 0.1),
    "mcp": PenaltySpec("mcp", 0.1, 3.0),
    "scad": PenaltySpec("scad", 0.1, 3.7),
}

print(f"true support: {np.flatnonzero(beta_true)}")
for name, spec in penalties.items():
    inst = standardize(X_raw, y_raw, spec)
    for order in ("cyclic", "shuffled"):
        beta, trace = solve_penalized_regression(inst, order, max_cycles=500, seed=1)
        coef, _ = inst.to_original_scale(beta)
        gain = coordinate_improvement(inst, beta)
        print(f"{name:>4}/{order:<8} objective {inst.objective(beta):.8f} "
              f"after {len(trace) // inst.p:3d} cycles, support {np.flatnonzero(beta)}, "
              f"coef error {np.linalg.norm(coef - beta_true):.3f}, "
              f"best single-coordinate gain {gain:.1e}")
