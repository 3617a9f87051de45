"""Nonnegative matrix factorization by rank-one residue iteration (RRI).

``min 0.5 * ||X Y^T - M||_F^2`` over ``X >= 0`` (m x p) and ``Y >= 0``
(n x p). The variables are split into the 2p column blocks
``x_1, y_1, ..., x_p, y_p`` (engine block ``2j`` is ``x_j``, ``2j + 1`` is
``y_j``).

* ``rri``: each column is the exact nonnegative least-squares minimizer,
  i.e. a prox-linear step with stepsize ``1/||y_j||^2`` (resp.
  ``1/||x_j||^2``).
* ``modified_cyclic`` / ``modified_shuffled``: the columns of ``X`` are kept
  on the unit sphere, the ``x_j`` stepsize is ``1/max(L_min, ||y_j||^2)``,
  and the shuffled variant permutes the pairs ``(x_j, y_j)`` every cycle.
"""

import numpy as np

from ..core import BlockProblem, ExtrapRule, Schedule, SolverConfig, StepRule, derive_seed, make_rng, solve
from ..exceptions import DimensionMismatch, ZeroColumn
from ..prox import project_nonneg, sphere_nonneg_argmax

NMF_VARIANTS = ("rri", "modified_cyclic", "modified_shuffled")
SUCCESS_THRESHOLD = 1e-3


def _rest(M, X, Y, i):
    """``M - sum_{j != i} x_j y_j^T``."""
    keep = np.arange(X.shape[1]) != i
    return M - X[:, keep] @ Y[:, keep].T


def rri_step_original(M, X, Y, i):
    """Exact alternating update of the column pair ``(x_i, y_i)``.

    Returns ``(x_i, y_i)``; ``X`` and ``Y`` are not modified.

    Raises
    ------
    ZeroColumn
        If ``y_i`` or the new ``x_i`` is zero.
    """
    R = _rest(M, X, Y, i)
    y = Y[:, i]
    ny = float(y @ y)
    if ny == 0.0:
        raise ZeroColumn(f"y_{i} is zero")
    x = np.maximum(R @ y, 0.0) / ny
    nx = float(x @ x)
    if nx == 0.0:
        raise ZeroColumn(f"x_{i} became zero")
    return x, np.maximum(R.T @ x, 0.0) / nx


def rri_step_modified(M, X, Y, i, L_min=1e-3):
    """Sphere-constrained update of ``(x_i, y_i)``.

    ``x_i`` maximizes ``c^T x`` over ``{x >= 0, ||x|| = 1}`` with
    ``c = L x_i - (X Y^T - M) y_i`` and ``L = max(L_min, ||y_i||^2)``; then
    ``y_i = max(0, (M - sum_{j != i} x_j y_j^T)^T x_i)``.
    """
    if not L_min > 0:
        raise ValueError("L_min must be positive")
    y = Y[:, i]
    L = max(L_min, float(y @ y))
    c = L * X[:, i] - (X @ Y.T - M) @ y
    x = sphere_nonneg_argmax(c)
    return x, np.maximum(_rest(M, X, Y, i).T @ x, 0.0)


class NMFProblem(BlockProblem):
    """Column-block NMF objective with a cached residual ``X Y^T - M``.

    The cache keeps references to the block arrays of the last evaluated
    point. A point that differs from it in exactly one block (by identity)
    is handled by a rank-one correction; the residual is recomputed from
    scratch every ``refresh`` corrections to bound roundoff drift.
    """

    def __init__(self, M, p, modified=True, L_min=1e-3, refresh=64):
        M = np.asarray(M, dtype=float)
        m, n = M.shape
        super().__init__([m, n] * p)
        self.M, self.p, self.modified, self.L_min = M, p, modified, L_min
        self.refresh = refresh
        self._key = None
        self._E = None
        self._f = None
        self._n_inc = 0

    # -- point <-> matrices

    @staticmethod
    def split(x):
        return np.column_stack(x[0::2]), np.column_stack(x[1::2])

    @staticmethod
    def join(X, Y):
        x = []
        for j in range(X.shape[1]):
            x += [X[:, j].copy(), Y[:, j].copy()]
        return x

    # -- residual cache

    def residual(self, x):
        key = self._key
        if key is not None:
            diff = [b for b in range(self.s) if x[b] is not key[b]]
            if not diff:
                return self._E
            if len(diff) == 1 and self._n_inc < self.refresh:
                b = diff[0]
                if b % 2 == 0:
                    E = self._E + np.outer(x[b] - key[b], x[b + 1])
                else:
                    E = self._E + np.outer(x[b - 1], x[b] - key[b])
                self._store(x, E, self._n_inc + 1)
                return E
        X, Y = self.split(x)
        E = X @ Y.T - self.M
        self._store(x, E, 0)
        return E

    def _store(self, x, E, n_inc):
        self._key = list(x)
        self._E = E
        self._f = 0.5 * float(np.vdot(E, E))
        self._n_inc = n_inc

    # -- oracle

    def eval_f(self, x):
        self.residual(x)
        return self._f

    def grad_block(self, i, x):
        E = self.residual(x)
        if i % 2 == 0:
            return E @ x[i + 1]
        return E.T @ x[i - 1]

    def eval_r(self, i, xi):
        if np.any(xi < 0):
            return np.inf
        if self.modified and i % 2 == 0 and abs(float(np.linalg.norm(xi)) - 1.0) > 1e-9:
            return np.inf
        return 0.0

    def prox_block(self, i, point, step):
        if self.modified and i % 2 == 0:
            return sphere_nonneg_argmax(point)
        return project_nonneg(point)

    def lipschitz_block(self, i, x):
        partner = x[i + 1] if i % 2 == 0 else x[i - 1]
        L = float(partner @ partner)
        if self.modified and i % 2 == 0:
            return max(self.L_min, L)
        if L == 0.0:
            raise ZeroColumn(f"block {i}: partner column is zero")
        return L


def nmf_init(M, p, seed):
    """Uniform [0, 1) entries for ``X`` and ``Y``, then unit-norm columns of ``X``.

    The same start feeds every variant, so it must satisfy the sphere
    constraint of the modified updates.
    """
    m, n = np.shape(M)
    rng = make_rng(seed)
    X = rng.uniform(size=(m, p))
    Y = rng.uniform(size=(n, p))
    return X / np.linalg.norm(X, axis=0), Y


def nmf_config(variant, p, max_cycles=100, seed=0, monotone=False):
    if variant not in NMF_VARIANTS:
        raise ValueError(f"unknown NMF variant {variant!r}")
    pairs = tuple((2 * j, 2 * j + 1) for j in range(p))
    kind = "shuffled_per_cycle" if variant == "modified_shuffled" else "cyclic"
    return SolverConfig(
        schedule=Schedule(kind, groups=pairs),
        step=StepRule("lipschitz", gamma=1.0),
        extrap=ExtrapRule("none", monotone=monotone),
        seed=seed,
        max_cycles=max_cycles,
        tol_obj=0.0,
        tol_residual=0.0,
        residual_every=-1,
    )


def solve_nmf(M, p, variant="modified_shuffled", L_min=1e-3, max_cycles=100, seed=0,
              X0=None, Y0=None, config=None, callback=None):
    """Run an RRI variant for ``max_cycles`` cycles.

    The start is :func:`nmf_init` with a seed derived from ``seed`` unless
    ``X0, Y0`` are given; the modified variants then rescale the columns of
    ``X0`` to unit norm (moving the scale into ``Y0``, so ``X0 Y0^T`` is
    kept). ``seed`` itself drives the block shuffle.

    Returns
    -------
    X, Y : ndarray
    trace : Trace
        Objectives are ``0.5 * ||X Y^T - M||_F^2``; see
        :func:`blockprox.problems.relative_error_path`.
    """
    M = np.asarray(M, dtype=float)
    if np.any(M < 0):
        raise ValueError("M must be nonnegative")
    modified = variant != "rri"
    if X0 is None or Y0 is None:
        X0, Y0 = nmf_init(M, p, derive_seed(seed, "start"))
    elif modified:
        norms = np.linalg.norm(X0, axis=0)
        if np.any(norms == 0):
            raise ZeroColumn("initial X has a zero column")
        X0, Y0 = X0 / norms, Y0 * norms
    if X0.shape != (M.shape[0], p) or Y0.shape != (M.shape[1], p):
        raise DimensionMismatch("starting factors do not match M and p")
    if config is None:
        config = nmf_config(variant, p, max_cycles, seed)
    problem = NMFProblem(M, p, modified=modified, L_min=L_min)
    x, trace = solve(problem, NMFProblem.join(X0, Y0), config, callback=callback)
    X, Y = NMFProblem.split(x)
    return X, Y, trace
