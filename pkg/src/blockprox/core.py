"""Block prox-linear (BPL) engine with extrapolation.

The problem is ``min F(x) = f(x_1, ..., x_s) + sum_i r_i(x_i)`` where ``f`` is
smooth and each ``r_i`` is proximable (possibly nonconvex, possibly an
indicator). At iteration ``k`` one block ``i = b_k`` is updated by

    x_i <- prox_{alpha r_i}(xhat_i - alpha * grad_i f(x_{!=i}, xhat_i)),
    xhat_i = xt_i^{j-1} + omega * (xt_i^{j-1} - xt_i^{j-2}),

where ``xt_i^j`` is the value of block ``i`` after its ``j``-th update. Points
are lists of numpy arrays, one per block; blocks may have any shape.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import BacktrackExhausted, DimensionMismatch, NonFiniteObjective

# relative slack used when comparing objective values that are equal in exact
# arithmetic (descent lemma with equality, omega = 0 fallback)
_ROUNDOFF = 1e-12
# the stepsize test compares O(|d|^2) terms, so its slack must stay at machine
# precision or large stepsizes slip through once the steps get small
_STEP_SLACK = 8 * np.finfo(float).eps


class BlockProblem:
    """Composite objective split into blocks.

    Subclasses implement :meth:`eval_f` and :meth:`grad_block`, and override
    :meth:`eval_r`, :meth:`prox_block` and :meth:`lipschitz_block` when the
    block has a regularizer or a known gradient Lipschitz constant. The
    defaults describe ``r_i = 0`` with an unknown constant, which makes the
    solver backtrack on the stepsize.
    """

    def __init__(self, block_dims):
        self.block_dims = [int(d) for d in block_dims]
        if not self.block_dims or min(self.block_dims) < 1:
            raise ValueError("need at least one block of positive dimension")

    @property
    def s(self):
        return len(self.block_dims)

    def eval_f(self, x):
        raise NotImplementedError

    def grad_block(self, i, x):
        raise NotImplementedError

    def eval_r(self, i, xi):
        return 0.0

    def prox_block(self, i, point, step):
        return point

    def lipschitz_block(self, i, x):
        """Lipschitz constant of ``grad_i f`` in block ``i`` at ``x``, or None."""
        return None

    def objective(self, x):
        return self.eval_f(x) + sum(self.eval_r(i, xi) for i, xi in enumerate(x))


class FunctionBlockProblem(BlockProblem):
    """A :class:`BlockProblem` assembled from plain callables."""

    def __init__(self, block_dims, eval_f, grad_block, prox_block=None,
                 eval_r=None, lipschitz_block=None):
        super().__init__(block_dims)
        self._f = eval_f
        self._grad = grad_block
        self._prox = prox_block
        self._r = eval_r
        self._lip = lipschitz_block

    def eval_f(self, x):
        return self._f(x)

    def grad_block(self, i, x):
        return self._grad(i, x)

    def eval_r(self, i, xi):
        return 0.0 if self._r is None else self._r(i, xi)

    def prox_block(self, i, point, step):
        return point if self._prox is None else self._prox(i, point, step)

    def lipschitz_block(self, i, x):
        return None if self._lip is None else self._lip(i, x)


# ---------------------------------------------------------------------------
# configuration

SCHEDULE_KINDS = ("cyclic", "shuffled_per_cycle", "explicit")
EXTRAP_MODES = ("none", "capped", "fista_capped", "custom")


@dataclass
class Schedule:
    """Block selection rule.

    ``cyclic`` visits ``0, 1, ..., s-1`` repeatedly. ``shuffled_per_cycle``
    draws an independent uniform permutation each cycle. ``explicit`` repeats
    ``explicit_order``. When ``groups`` is given, a cycle is the concatenation
    of the groups (in order for ``cyclic``, permuted for
    ``shuffled_per_cycle``), so a block may appear more than once per cycle.
    Block indices are 0-based.
    """

    kind: str = "cyclic"
    explicit_order: tuple = ()
    groups: tuple = ()

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        self.explicit_order = tuple(int(b) for b in self.explicit_order)
        self.groups = tuple(tuple(int(b) for b in g) for g in self.groups)
        if self.kind == "explicit" and not self.explicit_order:
            raise ValueError("explicit schedule needs explicit_order")

    def _groups(self, s):
        return self.groups if self.groups else tuple((b,) for b in range(s))

    def period(self, s):
        """Number of iterations in one cycle."""
        if self.kind == "explicit":
            return len(self.explicit_order)
        return sum(len(g) for g in self._groups(s))

    def window(self, s):
        """A T such that every T consecutive indices cover all blocks.

        Exact for fixed orders and for shuffles of single blocks; for shuffled
        groups it is the bound ``2 * period - 1``.
        """
        if self.kind == "shuffled_per_cycle":
            return 2 * self.period(s) - 1
        order = self.explicit_order if self.kind == "explicit" else \
            tuple(b for g in self._groups(s) for b in g)
        period = len(order)
        worst = 0
        for b in range(s):
            pos = [p for p, v in enumerate(order) if v == b]
            if not pos:
                raise ValueError(f"block {b} never scheduled")
            gaps = [q - p for p, q in zip(pos, pos[1:])] + [pos[0] + period - pos[-1]]
            worst = max(worst, max(gaps))
        return worst

    def validate(self, s):
        for g in self._groups(s):
            for b in g:
                if not 0 <= b < s:
                    raise ValueError(f"block index {b} out of range for s={s}")
        if self.kind == "explicit":
            for b in self.explicit_order:
                if not 0 <= b < s:
                    raise ValueError(f"block index {b} out of range for s={s}")
        covered = set(self.explicit_order) if self.kind == "explicit" else \
            {b for g in self._groups(s) for b in g}
        if covered != set(range(s)):
            raise ValueError("schedule is not essentially cyclic: some block never updated")


def make_rng(seed):
    """The package's random generator: numpy PCG64 seeded with a 64-bit integer."""
    return np.random.Generator(np.random.PCG64(int(seed) % 2**64))


def derive_seed(seed, stream):
    """Independent 64-bit seed for a named purpose (e.g. the start point) of run ``seed``."""
    tag = [ord(ch) for ch in str(stream)]
    state = np.random.SeedSequence([int(seed) % 2**64] + tag).generate_state(1, np.uint64)
    return int(state[0])


def fisher_yates(n, rng):
    """Uniform random permutation of ``range(n)``, swapping from the top down."""
    perm = list(range(n))
    for top in range(n - 1, 0, -1):
        j = int(rng.integers(0, top + 1))
        perm[top], perm[j] = perm[j], perm[top]
    return perm


def iter_blocks(schedule, s, rng=None):
    """Yield the block index for iterations ``k = 1, 2, ...`` forever."""
    schedule.validate(s)
    if schedule.kind == "explicit":
        while True:
            yield from schedule.explicit_order
    groups = schedule._groups(s)
    if schedule.kind == "cyclic":
        order = [b for g in groups for b in g]
        while True:
            yield from order
    if rng is None:
        raise ValueError("shuffled schedule needs a random generator")
    while True:
        for gi in fisher_yates(len(groups), rng):
            yield from groups[gi]


def next_block(blocks):
    """Advance a sequence made by :func:`iter_blocks` by one iteration."""
    return next(blocks)


@dataclass
class StepRule:
    """Stepsize ``alpha = 1 / (gamma * L)``, or backtracking when L is unknown.

    ``gamma = 1`` is admitted for problems whose prox-linear surrogate is
    exact or block convex (coordinate minimization, FISTA, factorizations).
    """

    mode: str = "lipschitz"
    gamma: float = 2.0
    bt_shrink: float = 0.5
    bt_max: int = 60
    alpha_init: float = 1.0

    def __post_init__(self):
        if self.mode not in ("lipschitz", "backtracking"):
            raise ValueError(f"unknown step mode {self.mode!r}")
        if not self.gamma >= 1:
            raise ValueError("gamma must be >= 1")
        if not 0 < self.bt_shrink < 1:
            raise ValueError("bt_shrink must lie in (0, 1)")
        if self.bt_max < 0 or not self.alpha_init > 0:
            raise ValueError("bt_max must be >= 0 and alpha_init > 0")


@dataclass
class ExtrapRule:
    """Extrapolation weight rule.

    The weight used at the ``j``-th update of block ``i`` is
    ``min(candidate, cap)`` with ``cap = cap_scale * sqrt(L_prev / L_curr)``
    clipped to ``[0, 1]``. The candidate is 0 for ``none``, 1 for ``capped``
    (so the cap itself is used), the FISTA sequence for ``fista_capped`` and
    ``custom(i, j)`` for ``custom``.

    When ``cap_scale`` is None it follows from ``delta`` and the step rule:
    ``delta`` for block multi-convex problems, else
    ``delta * (gamma - 1) / (2 * (gamma + 1))`` (``delta / 6`` at gamma = 2).

    With ``monotone`` the weight is backtracked until the objective does not
    increase. ``restart`` replaces the backtracking grid by a single fallback
    to zero weight and resets the block's FISTA sequence.
    """

    mode: str = "none"
    delta: float = 0.9999
    cap_scale: Optional[float] = None
    multiconvex: bool = False
    monotone: bool = False
    omega_bt_shrink: float = 0.5
    omega_bt_max: int = 10
    restart: bool = False
    custom: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in EXTRAP_MODES:
            raise ValueError(f"unknown extrapolation mode {self.mode!r}")
        if not 0 <= self.delta < 1:
            raise ValueError("delta must lie in [0, 1)")
        if self.cap_scale is not None and not self.cap_scale > 0:
            raise ValueError("cap_scale must be positive")
        if not 0 < self.omega_bt_shrink < 1:
            raise ValueError("omega_bt_shrink must lie in (0, 1)")
        if self.mode == "custom" and self.custom is None:
            raise ValueError("custom mode needs a callable")

    def scale(self, gamma=2.0):
        if self.cap_scale is not None:
            return self.cap_scale
        if self.multiconvex:
            return self.delta
        return self.delta * (gamma - 1) / (2 * (gamma + 1))


@dataclass
class SolverConfig:
    """Everything :func:`solve` needs besides the problem and start point.

    ``max_cycles`` counts schedule periods. ``tol_obj`` stops when the
    relative objective change over a cycle drops below it; ``tol_residual``
    stops on the prox-gradient residual. Either tolerance may be 0 to disable
    it. The residual is evaluated every ``residual_every`` iterations, at
    the end of each cycle when ``residual_every`` is 0, and never when it is
    negative (``tol_residual`` is then ignored).
    """

    schedule: Schedule = field(default_factory=Schedule)
    step: StepRule = field(default_factory=StepRule)
    extrap: ExtrapRule = field(default_factory=ExtrapRule)
    seed: int = 0
    max_cycles: int = 1000
    tol_obj: float = 1e-10
    tol_residual: float = 1e-8
    residual_every: int = 0

    def __post_init__(self):
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be >= 1")
        if self.tol_obj < 0 or self.tol_residual < 0:
            raise ValueError("tolerances must be nonnegative")


# ---------------------------------------------------------------------------
# trace


@dataclass
class Trace:
    """Per-iteration record of a run; index ``k - 1`` holds iteration ``k``."""

    n_blocks: int
    initial_objective: float = math.nan
    objective: list = field(default_factory=list)
    block_index: list = field(default_factory=list)
    step_norm: list = field(default_factory=list)
    alpha_used: list = field(default_factory=list)
    omega_used: list = field(default_factory=list)
    omega_cap: list = field(default_factory=list)
    lipschitz: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    time_s: list = field(default_factory=list)
    status: str = ""

    def __len__(self):
        return len(self.objective)

    @property
    def update_counts(self):
        """Array of shape (K, s) whose row k-1 holds d_i^k."""
        K = len(self.block_index)
        counts = np.zeros((K, self.n_blocks), dtype=int)
        if K:
            counts[np.arange(K), self.block_index] = 1
        return np.cumsum(counts, axis=0)

    def objectives_with_initial(self):
        return np.array([self.initial_objective] + list(self.objective))

    def to_csv(self, path):
        """Write ``iter,block,objective,step_norm,alpha,omega,residual`` rows."""
        with open(path, "w", newline="") as fh:
            fh.write("iter,block,objective,step_norm,alpha,omega,residual\n")
            for k in range(len(self)):
                fh.write(",".join([
                    str(k + 1), str(self.block_index[k]),
                    repr(float(self.objective[k])), repr(float(self.step_norm[k])),
                    repr(float(self.alpha_used[k])), repr(float(self.omega_used[k])),
                    repr(float(self.residual[k])),
                ]) + "\n")


def read_trace_csv(path):
    """Read a file written by :meth:`Trace.to_csv` into a dict of columns."""
    import csv

    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    cols = {}
    for key in ("iter", "block"):
        cols[key] = [int(r[key]) for r in rows]
    for key in ("objective", "step_norm", "alpha", "omega", "residual"):
        cols[key] = [float(r[key]) for r in rows]
    return cols


# ---------------------------------------------------------------------------
# primitive operations


def _norm(a):
    return float(np.linalg.norm(np.ravel(a)))


def _replace(x, i, xi):
    y = list(x)
    y[i] = xi
    return y


def extrapolate(x_prev_update, x_prev_prev, omega):
    """``x_prev_update + omega * (x_prev_update - x_prev_prev)``."""
    if np.shape(x_prev_update) != np.shape(x_prev_prev):
        raise DimensionMismatch("extrapolation points differ in shape")
    if omega == 0:
        return x_prev_update
    return x_prev_update + omega * (x_prev_update - x_prev_prev)


def omega_cap(rule, L_prev, L_curr, gamma=2.0):
    """Largest admissible weight ``cap_scale * sqrt(L_prev / L_curr)`` in [0, 1]."""
    if not (L_prev > 0 and L_curr > 0):
        raise ValueError("Lipschitz constants must be positive")
    return float(min(1.0, max(0.0, rule.scale(gamma) * math.sqrt(L_prev / L_curr))))


def block_update(problem, x, i, x_hat_i, alpha):
    """One prox-linear step on block ``i`` from the extrapolated point."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    g = problem.grad_block(i, _replace(x, i, x_hat_i))
    return problem.prox_block(i, x_hat_i - alpha * g, alpha)


def backtrack_alpha(problem, x_old, i, x_hat_i, alpha0, rule):
    """Shrink ``alpha`` from ``alpha0`` until the sufficient-decrease test holds.

    The test is ``f(x_new) <= f(x_old) + <grad_i f(x_old), d> + |d|^2 / (2 gamma alpha)``
    with ``d = x_new_i - x_old_i``.

    Returns
    -------
    alpha, new_block
    """
    f_old = problem.eval_f(x_old)
    g_old = problem.grad_block(i, x_old)
    slack = _STEP_SLACK * (1.0 + abs(f_old))
    alpha = alpha0
    for _ in range(rule.bt_max + 1):
        new = block_update(problem, x_old, i, x_hat_i, alpha)
        d = new - x_old[i]
        bound = f_old + float(np.vdot(g_old, d)) + float(np.vdot(d, d)) / (2 * rule.gamma * alpha)
        if problem.eval_f(_replace(x_old, i, new)) <= bound + slack:
            return alpha, new
        alpha *= rule.bt_shrink
    raise BacktrackExhausted(
        f"block {i}: no stepsize in {rule.bt_max + 1} trials from {alpha0:g} passed")


def backtrack_omega(problem, x_old, i, alpha, omega0, rule, x_prev_i=None,
                    F_old=None, first_trial=None):
    """Largest weight on the grid ``omega0 * shrink^t`` (then 0) keeping F nonincreasing.

    ``x_prev_i`` is the value of block ``i`` before its last update (defaults
    to the current value, which makes every weight a no-op). ``first_trial``
    may carry an already computed update at ``omega0``.

    Returns
    -------
    omega, new_block, F_new
        When even the zero-weight step does not decrease F beyond roundoff the
        block is left unchanged.
    """
    xi = x_old[i]
    if x_prev_i is None:
        x_prev_i = xi
    if F_old is None:
        F_old = problem.objective(x_old)
    r_rest = 0.0
    for b, xb in enumerate(x_old):
        if b != i:
            r_rest += problem.eval_r(b, xb)

    def trial(omega):
        new = block_update(problem, x_old, i, extrapolate(xi, x_prev_i, omega), alpha)
        return new, problem.eval_f(_replace(x_old, i, new)) + r_rest + problem.eval_r(i, new)

    grid = []
    if omega0 > 0:
        grid.append(omega0)
        if not rule.restart:
            grid += [omega0 * rule.omega_bt_shrink ** t for t in range(1, rule.omega_bt_max + 1)]
    for t, omega in enumerate(grid):
        if t == 0 and first_trial is not None:
            new = first_trial
            F_new = problem.eval_f(_replace(x_old, i, new)) + r_rest + problem.eval_r(i, new)
        else:
            new, F_new = trial(omega)
        if F_new <= F_old:
            return omega, new, F_new
    new, F_new = trial(0.0)
    if F_new <= F_old + _ROUNDOFF * (1.0 + abs(F_old)):
        return 0.0, new, F_new
    return 0.0, xi, F_old


def prox_residual(problem, x, steps):
    """``sqrt(sum_i |x_i - prox_{a_i r_i}(x_i - a_i grad_i f(x))|^2 / a_i^2)``."""
    total = 0.0
    for i, xi in enumerate(x):
        a = steps[i]
        g = problem.grad_block(i, x)
        p = problem.prox_block(i, xi - a * g, a)
        total += _norm(xi - p) ** 2 / a**2
    return math.sqrt(total)


def default_steps(problem, x, rule, previous=None):
    """Per-block stepsizes for :func:`prox_residual`."""
    steps = []
    for i in range(problem.s):
        if previous is not None and previous[i] is not None:
            steps.append(previous[i])
            continue
        L = problem.lipschitz_block(i, x)
        steps.append(1.0 / (rule.gamma * L) if L else rule.alpha_init)
    return steps


# ---------------------------------------------------------------------------
# solver


class _Fista:
    """FISTA weight sequence t_1 = 1, omega_1 = 0, advanced per update."""

    __slots__ = ("t", "omega")

    def __init__(self):
        self.reset()

    def reset(self):
        self.t = 1.0
        self.omega = 0.0

    def advance(self):
        t_next = (1.0 + math.sqrt(1.0 + 4.0 * self.t * self.t)) / 2.0
        self.omega = (self.t - 1.0) / t_next
        self.t = t_next


def _check_finite(value, k, what):
    if not np.all(np.isfinite(value)):
        raise NonFiniteObjective(k, what)


def solve(problem, x0, config=None, callback=None):
    """Run the block prox-linear method.

    Parameters
    ----------
    problem : BlockProblem
    x0 : list of arrays
        Starting point; ``F(x0)`` must be finite.
    config : SolverConfig, optional
    callback : callable, optional
        ``callback(k, x, trace)`` after every iteration; returning True stops.

    Returns
    -------
    x : list of arrays
    trace : Trace
    """
    config = SolverConfig() if config is None else config
    step, rule = config.step, config.extrap
    s = problem.s
    x = [np.array(xi, dtype=float) for xi in x0]
    if len(x) != s:
        raise DimensionMismatch(f"expected {s} blocks, got {len(x)}")
    for i, xi in enumerate(x):
        if xi.size != problem.block_dims[i]:
            raise DimensionMismatch(f"block {i} has size {xi.size}, expected {problem.block_dims[i]}")
    prev = list(x)  # xt_i^{j-2}; equals xt_i^{j-1} before the first update
    r_vals = [problem.eval_r(i, xi) for i, xi in enumerate(x)]
    F = problem.eval_f(x) + sum(r_vals)
    if not math.isfinite(F):
        raise NonFiniteObjective(0)

    trace = Trace(n_blocks=s, initial_objective=F)
    rng = make_rng(config.seed)
    blocks = iter_blocks(config.schedule, s, rng)
    period = config.schedule.period(s)
    max_iter = config.max_cycles * period
    L_last = [None] * s
    alpha_last = [None] * s
    fista = [_Fista() for _ in range(s)]
    n_updates = [0] * s
    F_cycle_start = F
    t_start = time.perf_counter()

    for k in range(1, max_iter + 1):
        i = next_block(blocks)
        xi, xi_prev = x[i], prev[i]
        n_updates[i] += 1
        L = problem.lipschitz_block(i, x)
        if L is not None:
            L = float(L)
            if not (L > 0 and math.isfinite(L)):
                raise NonFiniteObjective(k, f"Lipschitz constant {L}")

        if rule.mode == "none":
            cand = 0.0
        elif rule.mode == "capped":
            cand = 1.0
        elif rule.mode == "fista_capped":
            cand = fista[i].omega
        else:
            cand = float(rule.custom(i, n_updates[i]))
        cand = min(max(cand, 0.0), 1.0)

        first = None
        if step.mode == "lipschitz" and L is not None:
            alpha = 1.0 / (step.gamma * L)
            L_cur = L
            cap = omega_cap(rule, L_last[i] or L_cur, L_cur, step.gamma)
            omega = min(cand, cap)
        else:
            # alpha is backtracked at the weight allowed by the last constant
            L_ref = L_last[i] or L or 1.0
            omega = min(cand, omega_cap(rule, L_ref, L_ref, step.gamma))
            x_hat = extrapolate(xi, xi_prev, omega)
            alpha, first = backtrack_alpha(problem, x, i, x_hat, step.alpha_init, step)
            L_cur = 1.0 / (step.gamma * alpha)
            cap = omega_cap(rule, L_last[i] or L_cur, L_cur, step.gamma)
            if cap < omega:
                omega = cap
                first = None

        r_rest = sum(r_vals) - r_vals[i]
        if rule.monotone and omega > 0:
            omega_used, new, F_new = backtrack_omega(
                problem, x, i, alpha, omega, rule, x_prev_i=xi_prev, F_old=F,
                first_trial=first)
            if omega_used < omega and rule.restart:
                fista[i].reset()
            omega = omega_used
            r_new = problem.eval_r(i, new)
        else:
            if first is None:
                first = block_update(problem, x, i, extrapolate(xi, xi_prev, omega), alpha)
            new = first
            r_new = problem.eval_r(i, new)
            F_new = problem.eval_f(_replace(x, i, new)) + r_rest + r_new
        _check_finite(new, k, "block update")
        if not math.isfinite(F_new):
            raise NonFiniteObjective(k)
        fista[i].advance()

        dnorm = _norm(new - xi)
        if new is not xi:
            prev[i] = xi
            x[i] = new
            r_vals[i] = r_new
        F = F_new
        L_last[i] = L_cur
        alpha_last[i] = alpha

        trace.objective.append(F)
        trace.block_index.append(i)
        trace.step_norm.append(dnorm)
        trace.alpha_used.append(alpha)
        trace.omega_used.append(omega)
        trace.omega_cap.append(cap)
        trace.lipschitz.append(L_cur)
        trace.time_s.append(time.perf_counter() - t_start)

        end_of_cycle = k % period == 0
        if config.residual_every > 0:
            want_res = k % config.residual_every == 0
        elif config.residual_every < 0:
            want_res = False
        else:
            want_res = end_of_cycle
        res = math.nan
        if want_res:
            res = prox_residual(problem, x, default_steps(problem, x, step, alpha_last))
        trace.residual.append(res)

        if callback is not None and callback(k, x, trace):
            trace.status = "callback"
            break
        if want_res and config.tol_residual > 0 and res < config.tol_residual:
            trace.status = "tol_residual"
            break
        if end_of_cycle:
            change = abs(F_cycle_start - F)
            if config.tol_obj > 0 and change <= config.tol_obj * max(abs(F_cycle_start), 1e-300):
                trace.status = "tol_obj"
                break
            F_cycle_start = F
    else:
        trace.status = "max_cycles"
    return x, trace
