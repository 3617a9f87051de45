"""Writing your own block problem.

Nonnegative least squares split into two blocks,

    min_{u >= 0, v >= 0}  0.5 * ||P u + Q v - b||^2,

solved with the generic engine: a gradient per block, projection as the
proximal map, and the block Lipschitz constants ||P||^2 and ||Q||^2. The
second run drops the constants and lets the engine backtrack on the stepsize.
"""
import dataclasses

import numpy as np

from blockprox.core import ExtrapRule, FunctionBlockProblem, Schedule, SolverConfig, StepRule, solve
from blockprox.prox import project_nonneg

rng = np.random.default_rng(7)
P, Q = rng.standard_normal((40, 15)), rng.standard_normal((40, 10))
b = rng.standard_normal(40)
mats = (P, Q)


def residual(x):
    return P @ x[0] + Q @ x[1] - b


problem = FunctionBlockProblem(
    block_dims=(15, 10),
    eval_f=lambda x: 0.5 * float(residual(x) @ residual(x)),
    grad_block=lambda i, x: mats[i].T @ residual(x),
    prox_block=lambda i, point, step: project_nonneg(point),
    lipschitz_block=lambda i, x: np.linalg.norm(mats[i], 2) ** 2,
)
config = SolverConfig(schedule=Schedule("shuffled_per_cycle"),
                      step=StepRule("lipschitz", gamma=1.5),
                      extrap=ExtrapRule("fista_capped", delta=0.99),
                      max_cycles=400, tol_obj=1e-13, seed=0)

x, trace = solve(problem, [np.zeros(15), np.zeros(10)], config)
print(f"known constants: objective {trace.objective[-1]:.10f} after {len(trace)} updates "
      f"({trace.status}); final residual {trace.residual[-1]:.1e}")

no_constants = FunctionBlockProblem((15, 10), problem.eval_f, problem.grad_block,
                                    prox_block=problem.prox_block)
config_bt = dataclasses.replace(config, step=StepRule("backtracking", gamma=1.5))
x_bt, trace_bt = solve(no_constants, [np.zeros(15), np.zeros(10)], config_bt)
print(f"backtracking:    objective {trace_bt.objective[-1]:.10f} after {len(trace_bt)} updates; "
      f"stepsizes used {min(trace_bt.alpha_used):.3g} .. {max(trace_bt.alpha_used):.3g}")
print(f"active constraints: u {int(np.sum(x[0] == 0))}/15, v {int(np.sum(x[1] == 0))}/10")
