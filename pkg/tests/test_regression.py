import numpy as np
import pytest

from blockprox.datagen import gen_regression
from blockprox.exceptions import DegenerateColumn
from blockprox.prox import PenaltySpec, penalty_prox
from blockprox.problems.regression import (
    RegressionProblem,
    coordinate_improvement,
    solve_penalized_regression,
    standardize,
)
from oracles import argmin_1d, block_grad_error, scalar_penalty

SPECS = [PenaltySpec("mcp", 0.1, 3.0), PenaltySpec("scad", 0.1, 3.7), PenaltySpec("l1", 0.1)]


def instance(spec, seed=0, n=100, p=20):
    X, y, _ = gen_regression(n=n, p=p, seed=seed)
    return standardize(X, y, spec)


def test_standardize_conditions():
    X = np.random.default_rng(0).standard_normal((50, 10)) * 4 + 2
    y = np.random.default_rng(1).standard_normal(50) + 5
    inst = standardize(X, y)
    assert abs(inst.y.sum()) <= 1e-10
    assert np.max(np.abs(inst.X.sum(axis=0))) <= 1e-10
    assert np.max(np.abs((inst.X ** 2).mean(axis=0) - 1)) <= 1e-10


def test_standardize_idempotent():
    inst = standardize(*gen_regression(n=50, p=10, seed=3)[:2])
    again = standardize(inst.X, inst.y)
    assert np.max(np.abs(again.X - inst.X)) <= 1e-12
    assert np.max(np.abs(again.y - inst.y)) <= 1e-12


def test_standardize_constant_column():
    X = np.random.default_rng(0).standard_normal((20, 3))
    X[:, 1] = 7.0
    with pytest.raises(DegenerateColumn):
        standardize(X, np.arange(20.0))


def test_original_scale_predictions():
    X, y, _ = gen_regression(n=60, p=5, seed=2)
    inst = standardize(X, y)
    beta = np.random.default_rng(0).standard_normal(5)
    coef, icpt = inst.to_original_scale(beta)
    assert np.allclose(X @ coef + icpt, inst.X @ beta + inst.y_mean, atol=1e-10)


@pytest.mark.parametrize("spec", SPECS)
def test_large_lambda_zero_after_one_cycle(spec):
    inst = instance(spec)
    lam = float(np.max(np.abs(inst.X.T @ inst.y))) / inst.n * 1.001
    big = standardize(inst.X, inst.y, PenaltySpec(spec.kind, lam, spec.gamma))
    beta, tr = solve_penalized_regression(big, max_cycles=1)
    assert np.array_equal(beta, np.zeros(inst.p))


@pytest.mark.parametrize("spec", SPECS)
def test_orthogonal_design_one_cycle(spec):
    n = 8
    X = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]] * 2, dtype=float)  # centered, orthogonal, x^2 mean 1
    y = np.array([2.0, 0.3, -0.1, -2.2, 1.1, 0.4, -0.5, -1.0])
    y -= y.mean()
    inst = standardize(X, y, spec)
    beta, _ = solve_penalized_regression(inst, max_cycles=1, tol_obj=0)
    # separable: each coefficient minimizes 0.5 (b - x_j.y/n)^2 + r(b) on its own
    r = scalar_penalty(spec.kind, spec.lam, spec.gamma)
    z = inst.X.T @ inst.y / n
    ref = argmin_1d(lambda b, zz: 0.5 * (b - zz) ** 2 + r(b), z)
    assert np.allclose(beta, ref, atol=1e-6)


@pytest.mark.parametrize("spec", SPECS)
def test_cyclic_and_shuffled_reach_coordinatewise_minimizers(spec):
    inst = instance(spec, seed=4)
    for order in ("cyclic", "shuffled"):
        beta, tr = solve_penalized_regression(inst, order, max_cycles=2000, seed=5)
        F = inst.objective(beta)
        # independent certificate: brute-force each coordinate's 1D problem
        r = scalar_penalty(spec.kind, spec.lam, spec.gamma)
        resid = inst.X @ beta - inst.y
        for j in range(inst.p):
            rest = resid - inst.X[:, j] * beta[j]
            xj = inst.X[:, j]
            c0, c1, c2 = rest @ rest, 2 * (xj @ rest), xj @ xj
            best = argmin_1d(lambda b, _: (c0 + c1 * b + c2 * b ** 2) / (2 * inst.n) + r(b),
                             np.zeros(1), lo=beta[j] - 3, hi=beta[j] + 3)[0]
            trial = beta.copy()
            trial[j] = best
            assert inst.objective(trial) >= F - 1e-10
        assert coordinate_improvement(inst, beta) <= 1e-10


@pytest.mark.parametrize("order", ["cyclic", "shuffled"])
@pytest.mark.parametrize("spec", SPECS)
def test_objective_nonincreasing_per_update(spec, order):
    inst = instance(spec, seed=6)
    _, tr = solve_penalized_regression(inst, order, max_cycles=50, seed=1)
    F = tr.objectives_with_initial()
    assert np.all(np.diff(F) <= 1e-12 * (1 + np.abs(F[:-1])))


def test_unit_coordinate_weight():
    inst = instance(SPECS[0])
    assert np.max(np.abs(RegressionProblem(inst).col_sq - 1)) <= 1e-10


def test_coordinate_update_is_scalar_prox():
    inst = instance(SPECS[1], seed=8)
    beta = np.random.default_rng(2).standard_normal(inst.p) * 0.3
    j = 3
    z = beta[j] - inst.X[:, j] @ (inst.X @ beta - inst.y) / inst.n
    prob = RegressionProblem(inst)
    x = [np.array([b]) for b in beta]
    from blockprox.core import block_update
    assert block_update(prob, x, j, x[j], 1.0)[0] == pytest.approx(penalty_prox(inst.spec, z), abs=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_finite_differences(seed):
    inst = instance(SPECS[0])
    prob = RegressionProblem(inst)
    rng = np.random.default_rng(seed)
    x = [np.array([v]) for v in rng.standard_normal(inst.p)]
    for j in rng.choice(inst.p, 4, replace=False):
        assert block_grad_error(prob, x, int(j)) <= 1e-5
