"""Nonnegative Tucker decomposition by block proximal gradient.

``min 0.5 * ||C x_1 A_1 ... x_N A_N - M||_F^2`` over ``C >= 0`` and
``A_n >= 0``. Engine block 0 is the core ``C``; block ``n + 1`` is ``A_n``.

Gradients, with ``E = C x_1 A_1 ... x_N A_N - M`` and
``G_n = unfold(C x_{m != n} A_m, n)``::

    grad_C   = E x_1 A_1^T ... x_N A_N^T          L_C   = prod_m ||A_m^T A_m||_2
    grad_A_n = A_n (G_n G_n^T) - M_(n) G_n^T      L_A_n = ||G_n G_n^T||_2

Constants are power-iteration estimates floored at ``L_min``.

Variants: ``bpg`` updates ``C, A_1, ..., A_N`` cyclically with the
extrapolation weight ``min(omega_FISTA, 0.9999 sqrt(L_prev / L_curr))``;
``bpg_noextrap`` drops the extrapolation; ``frequent_core_cyclic`` runs the
pairs ``(C, A_1), ..., (C, A_N)`` in order and ``frequent_core_shuffled``
permutes the pairs every cycle.
"""

import numpy as np

from ..core import BlockProblem, ExtrapRule, Schedule, SolverConfig, StepRule, derive_seed, make_rng, solve
from ..exceptions import DimensionMismatch
from ..linalg import sym_norm
from ..prox import project_nonneg
from ..tensor import multi_mode_product, unfold

NTD_VARIANTS = ("bpg", "bpg_noextrap", "frequent_core_cyclic", "frequent_core_shuffled")
SUCCESS_THRESHOLD = 1e-3
WEIGHT_CAP = 0.9999


class NTDProblem(BlockProblem):
    """Tucker misfit with a one-entry cache of the residual tensor."""

    def __init__(self, M, core_dims, L_min=1e-3):
        self.M = np.asarray(M, dtype=float)
        self.core_dims = tuple(core_dims)
        if len(self.core_dims) != self.M.ndim:
            raise DimensionMismatch("core order differs from the data order")
        sizes = [int(np.prod(self.core_dims))]
        sizes += [d * r for d, r in zip(self.M.shape, self.core_dims)]
        super().__init__(sizes)
        self.N = self.M.ndim
        self.L_min = L_min
        self._key = None
        self._E = None
        self._f = None

    def residual(self, x):
        if self._key is not None and all(a is b for a, b in zip(x, self._key)):
            return self._E
        E = multi_mode_product(x[0], x[1:]) - self.M
        self._key = list(x)
        self._E = E
        self._f = 0.5 * float(np.vdot(E, E))
        return E

    def eval_f(self, x):
        self.residual(x)
        return self._f

    def _partial(self, x, n):
        """``G_n = unfold(C x_{m != n} A_m, n)``."""
        return unfold(multi_mode_product(x[0], x[1:], skip=n), n)

    def grad_block(self, i, x):
        E = self.residual(x)
        if i == 0:
            return multi_mode_product(E, x[1:], transpose=True)
        n = i - 1
        return unfold(E, n) @ self._partial(x, n).T

    def grad_factor_formula(self, n, x):
        """``A_n (G G^T) - M_(n) G^T`` (same value as ``grad_block(n + 1, x)``)."""
        G = self._partial(x, n)
        return x[n + 1] @ (G @ G.T) - unfold(self.M, n) @ G.T

    def eval_r(self, i, xi):
        return np.inf if np.any(xi < 0) else 0.0

    def prox_block(self, i, point, step):
        return project_nonneg(point)

    def lipschitz_block(self, i, x):
        if i == 0:
            L = 1.0
            for A in x[1:]:
                L *= sym_norm(A.T @ A)
        else:
            G = self._partial(x, i - 1)
            L = sym_norm(G @ G.T)
        return max(self.L_min, L)


def ntd_init(dims, core_dims, seed):
    """Uniform [0, 1) core and factors from the run seed."""
    rng = make_rng(seed)
    core = rng.uniform(size=tuple(core_dims))
    factors = [rng.uniform(size=(d, r)) for d, r in zip(dims, core_dims)]
    return core, factors


def ntd_config(variant, N, max_cycles=500, seed=0, monotone=False, tol_obj=0.0):
    if variant not in NTD_VARIANTS:
        raise ValueError(f"unknown NTD variant {variant!r}")
    if variant.startswith("frequent_core"):
        pairs = tuple((0, n + 1) for n in range(N))
        kind = "shuffled_per_cycle" if variant.endswith("shuffled") else "cyclic"
        schedule = Schedule(kind, groups=pairs)
    else:
        schedule = Schedule("cyclic")
    mode = "none" if variant == "bpg_noextrap" else "fista_capped"
    return SolverConfig(
        schedule=schedule,
        step=StepRule("lipschitz", gamma=1.0),
        extrap=ExtrapRule(mode, cap_scale=WEIGHT_CAP, multiconvex=True, monotone=monotone),
        seed=seed,
        max_cycles=max_cycles,
        tol_obj=tol_obj,
        tol_residual=0.0,
        residual_every=-1,
    )


def solve_ntd(M, core_dims, variant="bpg", max_cycles=500, seed=0, L_min=1e-3,
              core0=None, factors0=None, config=None, callback=None):
    """Run an NTD variant; returns ``(core, factors, trace)``.

    The start is :func:`ntd_init` with a seed derived from ``seed`` unless
    ``core0`` and ``factors0`` are given; ``seed`` itself drives the shuffle.
    """
    M = np.asarray(M, dtype=float)
    if np.any(M < 0):
        raise ValueError("M must be nonnegative")
    core_dims = tuple(core_dims)
    if len(core_dims) != M.ndim or any(r > d for r, d in zip(core_dims, M.shape)):
        raise ValueError("core_dims must not exceed the data dims")
    if core0 is None or factors0 is None:
        core0, factors0 = ntd_init(M.shape, core_dims, derive_seed(seed, "start"))
    if config is None:
        config = ntd_config(variant, M.ndim, max_cycles, seed)
    problem = NTDProblem(M, core_dims, L_min=L_min)
    x0 = [np.array(core0, dtype=float)] + [np.array(A, dtype=float) for A in factors0]
    x, trace = solve(problem, x0, config, callback=callback)
    return x[0], x[1:], trace
