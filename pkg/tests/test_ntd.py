import numpy as np
import pytest

from blockprox.datagen import gen_random_ntd
from blockprox.problems import relative_error_path
from blockprox.problems.ntd import NTD_VARIANTS, NTDProblem, ntd_config, ntd_init, solve_ntd
from blockprox.tensor import tucker_to_tensor, unfold
from oracles import block_grad_error


def small(seed=0):
    return gen_random_ntd((4, 5, 3), (2, 2, 2), seed)


def point(seed, dims=(4, 5, 3), core=(2, 2, 2)):
    C, A = ntd_init(dims, core, seed)
    return [C] + A


@pytest.mark.parametrize("seed", range(5))
def test_gradients_match_finite_differences(seed):
    M, _, _ = gen_random_ntd((4, 4, 4), (2, 2, 2), seed)
    prob = NTDProblem(M, (2, 2, 2))
    x = point(seed + 10, (4, 4, 4))
    for b in range(4):
        assert block_grad_error(prob, x, b) <= 1e-5


def test_factor_gradient_formula_agrees():
    M, _, _ = small()
    prob = NTDProblem(M, (2, 2, 2))
    x = point(1)
    for n in range(3):
        assert np.allclose(prob.grad_factor_formula(n, x), prob.grad_block(n + 1, x), atol=1e-12)


def test_lipschitz_constants_bound_the_hessian():
    M, _, _ = small()
    prob = NTDProblem(M, (2, 2, 2))
    x = point(2)
    for n in range(3):
        G = unfold(tucker_to_tensor(x[0], [np.eye(r) if m == n else A for m, (A, r) in
                                          enumerate(zip(x[1:], (2, 2, 2)))]), n)
        exact = np.linalg.norm(G @ G.T, 2)
        assert exact <= prob.lipschitz_block(n + 1, x) <= 1.0101 * exact
    # the core Hessian is the Kronecker product of the A_m^T A_m
    K = np.kron(np.kron(x[3].T @ x[3], x[2].T @ x[2]), x[1].T @ x[1])
    exact = np.linalg.norm(K, 2)
    assert exact <= prob.lipschitz_block(0, x) <= 1.01 ** 3 * exact * (1 + 1e-9)


def test_lipschitz_floor():
    M, _, _ = small()
    prob = NTDProblem(M, (2, 2, 2), L_min=1e-3)
    x = point(0)
    x[1] = x[1] * 0
    assert prob.lipschitz_block(0, x) == 1e-3


@pytest.mark.parametrize("variant", NTD_VARIANTS)
def test_truth_is_fixed_point(variant):
    M, C, A = gen_random_ntd((6, 5, 4), (2, 3, 2), 3)
    _, _, tr = solve_ntd(M, (2, 3, 2), variant, max_cycles=3, core0=C, factors0=A)
    assert relative_error_path(tr, np.linalg.norm(M)).max() <= 1e-12


@pytest.mark.parametrize("variant", NTD_VARIANTS)
def test_nonnegative_after_every_update(variant):
    M, _, _ = small(4)

    def check(k, x, trace):
        assert all((xi >= 0).all() for xi in x)

    solve_ntd(M, (2, 2, 2), variant, max_cycles=20, seed=1, callback=check)


@pytest.mark.parametrize("variant", NTD_VARIANTS)
def test_monotone_mode(variant):
    M, _, _ = small(5)
    cfg = ntd_config(variant, 3, max_cycles=60, seed=2, monotone=True)
    _, _, tr = solve_ntd(M, (2, 2, 2), variant, config=cfg, seed=2)
    F = tr.objectives_with_initial()
    assert np.all(np.diff(F) <= 1e-12 * (1 + np.abs(F[:-1])))


def test_noextrap_nonincreasing_unconditionally():
    M, _, _ = small(6)
    _, _, tr = solve_ntd(M, (2, 2, 2), "bpg_noextrap", max_cycles=60, seed=3)
    F = tr.objectives_with_initial()
    assert np.all(np.diff(F) <= 1e-12 * (1 + np.abs(F[:-1])))


def test_schedules():
    assert ntd_config("bpg", 3).schedule.period(4) == 4
    fc = ntd_config("frequent_core_shuffled", 3).schedule
    assert fc.groups == ((0, 1), (0, 2), (0, 3)) and fc.period(4) == 6
    M, _, _ = small()
    _, _, tr = solve_ntd(M, (2, 2, 2), "frequent_core_cyclic", max_cycles=2)
    assert tr.block_index == [0, 1, 0, 2, 0, 3] * 2


def test_weights_respect_cap():
    M, _, _ = gen_random_ntd((8, 8, 8), (2, 2, 2), 0)
    _, _, tr = solve_ntd(M, (2, 2, 2), "bpg", max_cycles=40, seed=0)
    assert all(w <= c for w, c in zip(tr.omega_used, tr.omega_cap))
    assert max(tr.omega_used) > 0.5


def test_extrapolation_accelerates_one_seed():
    M, _, _ = gen_random_ntd(seed=0)
    cycles = {}
    for v in ("bpg", "bpg_noextrap"):
        _, _, tr = solve_ntd(M, (3, 3, 3), v, max_cycles=600, seed=0)
        rel = relative_error_path(tr, np.linalg.norm(M))
        hit = np.flatnonzero(rel <= 1e-3)
        cycles[v] = hit[0] // 4 + 1 if hit.size else np.inf
    assert cycles["bpg"] < cycles["bpg_noextrap"]


def test_bad_core_dims():
    M, _, _ = small()
    with pytest.raises(ValueError):
        solve_ntd(M, (5, 2, 2), "bpg")
