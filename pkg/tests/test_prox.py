import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockprox.exceptions import StrongConvexityViolated, ZeroVector
from blockprox.prox import (
    PenaltySpec,
    penalty_prox,
    penalty_value,
    project_nonneg,
    sphere_nonneg_argmax,
)
from oracles import argmin_1d, scalar_penalty, sphere_mesh_max

SPECS = [
    PenaltySpec("mcp", 1.0, 3.0),
    PenaltySpec("mcp", 0.5, 1.5),
    PenaltySpec("scad", 1.0, 3.7),
    PenaltySpec("scad", 2.0, 2.5),
    PenaltySpec("l1", 1.0),
]


@pytest.mark.parametrize(
    "spec, theta, expected",
    [
        (PenaltySpec("mcp", 1, 3), 5.0, 1.5),
        (PenaltySpec("mcp", 1, 2), 1.0, 0.75),
        (PenaltySpec("scad", 1, 3), 2.0, 1.75),
        (PenaltySpec("scad", 1, 3), 5.0, 2.0),
        (PenaltySpec("l1", 2.0), -1.5, 3.0),
    ],
)
def test_penalty_value_examples(spec, theta, expected):
    assert penalty_value(spec, theta) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("spec", SPECS + [PenaltySpec("indicator_nonneg")])
def test_penalty_zero_at_origin(spec):
    assert penalty_value(spec, 0.0) == 0.0
    assert penalty_prox(spec, 0.0) == 0.0


def test_indicator_value():
    spec = PenaltySpec("indicator_nonneg")
    assert penalty_value(spec, 2.0) == 0.0
    assert penalty_value(spec, -1e-9) == np.inf


@pytest.mark.parametrize("spec", SPECS)
def test_penalty_even_and_monotone(spec):
    theta = np.random.default_rng(1).uniform(-10, 10, 2000)
    assert np.array_equal(penalty_value(spec, theta), penalty_value(spec, -theta))
    grid = np.linspace(0, 10, 5001)
    assert np.all(np.diff(penalty_value(spec, grid)) >= -1e-12)


@pytest.mark.parametrize("spec", SPECS[:4])
def test_penalty_continuous_at_breaks(spec):
    breaks = [spec.gamma * spec.lam]
    if spec.kind == "scad":
        breaks.append(spec.lam)
    eps = 1e-6
    for b in breaks:
        assert abs(penalty_value(spec, b - eps) - penalty_value(spec, b + eps)) <= 1e-9 + 2 * spec.lam * eps


@pytest.mark.parametrize(
    "spec, z, expected",
    [
        (PenaltySpec("l1", 1.0), 3.0, 2.0),
        (PenaltySpec("l1", 1.0), 0.5, 0.0),
        (PenaltySpec("mcp", 1.0, 3.0), 5.0, 5.0),
        (PenaltySpec("mcp", 1.0, 3.0), 2.0, 1.5),
        (PenaltySpec("scad", 1.0, 3.7), 3.0, 4.4 / 1.7),
    ],
)
def test_penalty_prox_examples(spec, z, expected):
    # expected values computed with tests/oracles.argmin_1d
    assert penalty_prox(spec, z) == pytest.approx(expected, abs=1e-12)


def test_scad_sweep_matches_oracle():
    spec = PenaltySpec("scad", 1.0, 3.7)
    zs = np.round(np.arange(-6, 6.0001, 0.01), 10)
    r = scalar_penalty("scad", 1.0, 3.7)
    ref = argmin_1d(lambda b, z: 0.5 * (b - z) ** 2 + r(b), zs)
    assert np.max(np.abs(penalty_prox(spec, zs) - ref)) < 1e-6


@pytest.mark.parametrize("weight", [0.8, 1.0, 2.5])
@pytest.mark.parametrize("spec", SPECS)
def test_weighted_prox_matches_oracle(spec, weight):
    try:
        got = penalty_prox(spec, np.linspace(-6, 6, 97), weight)
    except StrongConvexityViolated:
        pytest.skip("weight outside the strongly convex range")
    r = scalar_penalty(spec.kind, spec.lam, spec.gamma)
    ref = argmin_1d(lambda b, z: 0.5 * weight * (b - z) ** 2 + r(b), np.linspace(-6, 6, 97))
    assert np.max(np.abs(got - ref)) < 1e-6


def test_strong_convexity_guard():
    with pytest.raises(StrongConvexityViolated):
        penalty_prox(PenaltySpec("mcp", 1.0, 1.5), 1.0, weight=0.5)
    with pytest.raises(StrongConvexityViolated):
        penalty_prox(PenaltySpec("scad", 1.0, 2.5), 1.0, weight=0.5)


def test_invalid_specs():
    with pytest.raises(ValueError):
        PenaltySpec("mcp", 1.0, 1.0)
    with pytest.raises(ValueError):
        PenaltySpec("scad", 1.0, 2.0)
    with pytest.raises(ValueError):
        PenaltySpec("lasso", 1.0)


@settings(max_examples=200, deadline=None)
@given(z=st.floats(-50, 50), idx=st.integers(0, len(SPECS) - 1))
def test_prox_is_shrinkage(z, idx):
    p = penalty_prox(SPECS[idx], z)
    assert abs(p) <= abs(z) + 1e-12
    assert np.sign(p) in (0.0, np.sign(z))


def test_project_nonneg():
    assert np.array_equal(project_nonneg(np.array([1.0, -2.0, 0.0])), [1.0, 0.0, 0.0])
    v = np.array([0.5, 3.0])
    assert np.array_equal(project_nonneg(v), v)
    assert np.array_equal(project_nonneg(-np.ones(4)), np.zeros(4))


@pytest.mark.parametrize(
    "c, expected",
    [
        ([-1.0, -2.0], [1.0, 0.0]),
        ([0.0, -1.0], [1.0, 0.0]),
        ([-1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
        ([3.0, 4.0], [0.6, 0.8]),
        ([3.0, -1.0, 4.0], [0.6, 0.0, 0.8]),
        ([-3.0, -1.0, -1.0], [0.0, 1.0, 0.0]),
    ],
)
def test_sphere_argmax_cases(c, expected):
    assert np.allclose(sphere_nonneg_argmax(np.array(c)), expected, atol=1e-15)


def test_sphere_argmax_zero():
    with pytest.raises(ZeroVector):
        sphere_nonneg_argmax(np.zeros(3))


@pytest.mark.parametrize("seed", range(5))
def test_sphere_argmax_beats_random_feasible(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    c = rng.standard_normal(n)
    x = sphere_nonneg_argmax(c)
    assert abs(np.linalg.norm(x) - 1) <= 1e-12
    assert np.all(x >= 0)
    y = np.abs(rng.standard_normal((10_000, n)))
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    assert np.all(c @ x >= y @ c - 1e-12)
    assert c @ x >= sphere_mesh_max(c) - 1e-6
