import math

import numpy as np
import pytest

from blockprox.datagen import gen_lasso
from blockprox.problems.lasso import (
    LASSO_VARIANTS,
    LassoInstance,
    LassoProblem,
    fista_weight_sequence,
    lambda_max,
    solve_lasso,
)
from oracles import block_grad_error, lasso_kkt_gap


def small_instance(seed=0, lam=1.0):
    inst, x_true = gen_lasso(m=40, n=120, sparsity=6, noise_sigma=0.1, seed=seed, lam=lam)
    return inst, x_true


def test_fista_weights():
    t, omega = fista_weight_sequence(100)
    assert t[0] == 1.0 and omega[0] == 0.0
    assert omega[1] == 0.0
    assert t[1] == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-15)
    assert np.all(np.diff(t) > 0)
    assert np.all(np.diff(omega[1:]) > 0)
    assert all(0 <= w < 1 for w in omega)
    with pytest.raises(ValueError):
        fista_weight_sequence(0)


def test_engine_weights_follow_fista_sequence():
    inst, _ = small_instance()
    _, tr = solve_lasso(inst, "fista", max_iter=50)
    _, omega = fista_weight_sequence(50)
    assert np.allclose(tr.omega_used, omega, rtol=0, atol=1e-15)
    assert all(a == 1 / inst.L_f for a in tr.alpha_used)


def test_lipschitz_estimate_is_upper_bound():
    inst, _ = small_instance()
    exact = np.linalg.norm(inst.A, 2) ** 2
    assert exact <= inst.L_f <= 1.01 * exact * (1 + 1e-8)


def test_large_lambda_gives_zero_in_one_step():
    inst, _ = small_instance()
    big = LassoInstance(inst.A, inst.b, lambda_max(inst.A, inst.b) * 1.0001)
    x, tr = solve_lasso(big, "fista", max_iter=1)
    assert np.array_equal(x, np.zeros(inst.n))


@pytest.mark.parametrize("variant", ["restart", "backtracked_omega"])
def test_monotone_variants_nonincreasing(variant):
    inst, _ = small_instance(1)
    _, tr = solve_lasso(inst, variant, max_iter=800)
    F = tr.objectives_with_initial()
    assert np.all(np.diff(F) <= 1e-12 * (1 + np.abs(F[:-1])))


def test_plain_fista_is_not_monotone():
    # shows the monotone variants actually change behaviour
    inst, _ = small_instance(1)
    _, tr = solve_lasso(inst, "fista", max_iter=800)
    assert np.any(np.diff(tr.objectives_with_initial()) > 0)


@pytest.mark.parametrize("variant", LASSO_VARIANTS)
def test_variants_reach_kkt_point(variant):
    inst, _ = small_instance(2)
    x, tr = solve_lasso(inst, variant, max_iter=3000)
    sup, off = lasso_kkt_gap(inst.A, inst.b, inst.lam, x)
    assert sup <= 1e-6 and off <= 1e-6
    assert inst.objective(x) == pytest.approx(tr.objective[-1], rel=1e-12)


def test_variants_agree():
    inst, _ = small_instance(3)
    finals = [solve_lasso(inst, v, max_iter=3000)[1].objective[-1] for v in LASSO_VARIANTS]
    assert max(finals) - min(finals) <= 1e-9


def test_tolerance_stop():
    inst, _ = small_instance(4)
    _, tr = solve_lasso(inst, "backtracked_omega", max_iter=10000, tol_residual=1e-9)
    assert tr.status == "tol_residual" and len(tr) < 10000


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_finite_differences(seed):
    inst, _ = small_instance()
    problem = LassoProblem(inst)
    x = [np.random.default_rng(seed).standard_normal(inst.n)]
    assert block_grad_error(problem, x, 0) <= 1e-5


def test_gen_lasso_shapes_and_determinism():
    a, xa = gen_lasso(seed=7)
    b, xb = gen_lasso(seed=7)
    assert a.A.shape == (100, 2000) and a.b.shape == (100,)
    assert np.count_nonzero(xa) == 20
    assert np.array_equal(a.A, b.A) and np.array_equal(a.b, b.b) and np.array_equal(xa, xb)
    z, xz = gen_lasso(m=10, n=30, sparsity=0, noise_sigma=0.0, seed=1)
    assert np.array_equal(z.b, np.zeros(10)) and not xz.any()
