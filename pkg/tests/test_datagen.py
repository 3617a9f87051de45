import numpy as np
import pytest

from blockprox.datagen import (
    SwimmerSpec,
    gen_random_ntd,
    gen_regression,
    gen_swimmer,
    swimmer_combinations,
    swimmer_parts,
    swimmer_witness,
)
from blockprox.tensor import mode_product


def test_swimmer_shape_and_values():
    M = gen_swimmer()
    assert M.shape == (1024, 256)
    assert set(np.unique(M)) == {0.0, 1.0}


def test_swimmer_witness_exact():
    X, Y = swimmer_witness()
    assert X.shape == (1024, 17) and Y.shape == (256, 17)
    assert set(np.unique(Y)) == {0.0, 1.0}
    assert np.linalg.norm(X @ Y.T - gen_swimmer()) == 0.0


def test_swimmer_every_image_has_body_and_four_limbs():
    M = gen_swimmer()
    parts = swimmer_parts()
    body = parts[:, 0] > 0
    assert np.all(M[body] == 1.0)
    assert np.all(M.sum(axis=0) == body.sum() + 4 * 7)


def test_swimmer_enumerates_all_combinations():
    combos = swimmer_combinations()
    assert len({tuple(c) for c in combos}) == 256
    M = gen_swimmer()
    assert len({M[:, k].tobytes() for k in range(256)}) == 256


def test_swimmer_intensity_and_geometry_errors():
    M = gen_swimmer(SwimmerSpec(intensity=2.5))
    assert set(np.unique(M)) == {0.0, 2.5}
    with pytest.raises(ValueError):
        gen_swimmer(SwimmerSpec(limb_length=20))
    with pytest.raises(ValueError):
        SwimmerSpec(n_limbs=3)


def test_random_ntd():
    M, C, A = gen_random_ntd((5, 6, 7), (2, 3, 2), seed=1)
    assert M.shape == (5, 6, 7) and (M >= 0).all()
    assert (C >= 0).all() and all((a >= 0).all() for a in A)
    direct = mode_product(mode_product(mode_product(C, A[0], 0), A[1], 1), A[2], 2)
    assert np.array_equal(M, direct)
    M2, _, _ = gen_random_ntd((5, 6, 7), (2, 3, 2), seed=1)
    assert np.array_equal(M, M2)
    assert not np.array_equal(M, gen_random_ntd((5, 6, 7), (2, 3, 2), seed=2)[0])
    with pytest.raises(ValueError):
        gen_random_ntd((3, 3), (4, 1))


def test_regression_data_deterministic():
    a = gen_regression(seed=3)
    b = gen_regression(seed=3)
    assert all(np.array_equal(u, v) for u, v in zip(a, b))
    assert np.count_nonzero(a[2]) == 5
