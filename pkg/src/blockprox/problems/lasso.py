"""Lasso, ``min 0.5 * ||A x - b||^2 + lam * ||x||_1``, as a one-block problem.

With a single block the engine reduces to the proximal gradient method, and
the three extrapolation variants correspond to plain FISTA, FISTA restarted
whenever the objective goes up, and FISTA whose weight is backtracked until
the objective does not increase.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import BlockProblem, ExtrapRule, Schedule, SolverConfig, StepRule, solve
from ..exceptions import DimensionMismatch
from ..linalg import gram_norm
from ..prox import soft_threshold

LASSO_VARIANTS = ("fista", "restart", "backtracked_omega")


@dataclass
class LassoInstance:
    """Data of a lasso problem.

    ``L_f`` defaults to a power-iteration upper estimate of ``||A^T A||_2``.
    """

    A: np.ndarray
    b: np.ndarray
    lam: float
    L_f: float = field(default=None)

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.b = np.asarray(self.b, dtype=float).ravel()
        if self.A.ndim != 2 or self.A.shape[0] != self.b.size:
            raise DimensionMismatch(f"A is {self.A.shape}, b has {self.b.size} entries")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.L_f is None:
            self.L_f = gram_norm(self.A)

    @property
    def n(self):
        return self.A.shape[1]

    def objective(self, x):
        r = self.A @ x - self.b
        return 0.5 * float(r @ r) + self.lam * float(np.sum(np.abs(x)))


class LassoProblem(BlockProblem):
    def __init__(self, instance):
        super().__init__([instance.n])
        self.inst = instance

    def eval_f(self, x):
        r = self.inst.A @ x[0] - self.inst.b
        return 0.5 * float(r @ r)

    def grad_block(self, i, x):
        A = self.inst.A
        return A.T @ (A @ x[0] - self.inst.b)

    def eval_r(self, i, xi):
        return self.inst.lam * float(np.sum(np.abs(xi)))

    def prox_block(self, i, point, step):
        return soft_threshold(point, self.inst.lam * step)

    def lipschitz_block(self, i, x):
        return self.inst.L_f


def fista_weight_sequence(k_max):
    """``t_1 = 1``, ``t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2``, ``omega_{k+1} = (t_k - 1) / t_{k+1}``.

    Returns
    -------
    t, omega : lists of length ``k_max`` with ``omega[0] = 0``.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    t, omega = [1.0], [0.0]
    for _ in range(k_max - 1):
        t_next = (1.0 + math.sqrt(1.0 + 4.0 * t[-1] ** 2)) / 2.0
        omega.append((t[-1] - 1.0) / t_next)
        t.append(t_next)
    return t, omega


def lasso_config(variant, max_iter, tol_obj=0.0, tol_residual=0.0):
    """Engine configuration for one of :data:`LASSO_VARIANTS` (stepsize ``1/L_f``)."""
    if variant not in LASSO_VARIANTS:
        raise ValueError(f"unknown lasso variant {variant!r}")
    extrap = ExtrapRule(
        "fista_capped",
        cap_scale=1.0,
        monotone=variant != "fista",
        restart=variant == "restart",
    )
    return SolverConfig(
        schedule=Schedule("cyclic"),
        step=StepRule("lipschitz", gamma=1.0),
        extrap=extrap,
        max_cycles=max_iter,
        tol_obj=tol_obj,
        tol_residual=tol_residual,
    )


def solve_lasso(instance, variant="fista", max_iter=5000, x0=None, tol_obj=0.0,
                tol_residual=0.0, config=None):
    """Run one lasso variant for ``max_iter`` iterations (or to tolerance).

    Returns
    -------
    x : ndarray
    trace : Trace
    """
    config = lasso_config(variant, max_iter, tol_obj, tol_residual) if config is None else config
    x0 = np.zeros(instance.n) if x0 is None else np.asarray(x0, dtype=float)
    x, trace = solve(LassoProblem(instance), [x0], config)
    return x[0], trace


def lambda_max(A, b):
    """Smallest ``lam`` for which ``x = 0`` is a lasso solution."""
    return float(np.max(np.abs(np.asarray(A).T @ np.asarray(b))))
