"""Seeded synthetic inputs for the experiments.

Every generator is a pure function of its parameters and seed; the random
stream is :func:`blockprox.core.make_rng` (PCG64).
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .core import make_rng
from .problems.lasso import LassoInstance
from .tensor import tucker_to_tensor


def gen_lasso(m=100, n=2000, sparsity=20, noise_sigma=0.1, seed=0, lam=1.0):
    """Gaussian lasso instance with a sparse ground truth.

    ``A`` has i.i.d. N(0, 1) entries, ``x_true`` has ``sparsity`` N(0, 1)
    nonzeros at uniformly random positions, and
    ``b = A x_true + noise_sigma * N(0, I)``.

    Returns
    -------
    instance : LassoInstance
    x_true : ndarray
    """
    if not 0 <= sparsity <= n:
        raise ValueError("sparsity must lie in [0, n]")
    rng = make_rng(seed)
    A = rng.standard_normal((m, n))
    x_true = np.zeros(n)
    support = rng.choice(n, size=sparsity, replace=False)
    x_true[support] = rng.standard_normal(sparsity)
    b = A @ x_true + noise_sigma * rng.standard_normal(m)
    return LassoInstance(A, b, lam), x_true


def gen_regression(n=100, p=20, sparsity=5, noise_sigma=0.5, seed=0):
    """Raw (unstandardized) sparse linear model data ``y = X beta + noise``.

    Columns get random scales and offsets so that standardization is not a
    no-op. Returns ``X_raw, y_raw, beta_true``.
    """
    rng = make_rng(seed)
    X = rng.standard_normal((n, p)) * rng.uniform(0.5, 3.0, p) + rng.uniform(-2, 2, p)
    beta = np.zeros(p)
    support = rng.choice(p, size=min(sparsity, p), replace=False)
    beta[support] = rng.choice([-1.0, 1.0], size=support.size) * rng.uniform(1.0, 3.0, support.size)
    y = X @ beta + 1.5 + noise_sigma * rng.standard_normal(n)
    return X, y, beta


@dataclass(frozen=True)
class SwimmerSpec:
    """Geometry of the procedural swimmer images.

    The body is a vertical bar of ``torso_cols`` x ``torso_rows`` (inclusive
    ranges). Four limbs are attached next to the bar's top and bottom ends,
    each a straight segment of ``limb_length`` pixels. ``arm_directions``
    lists the (row, col) step of the upper-left limb in each of its
    positions; the other limbs mirror it left-right and/or up-down.
    """

    image_side: int = 32
    n_limb_positions: int = 4
    n_limbs: int = 4
    torso_cols: tuple = (15, 16)
    torso_rows: tuple = (8, 23)
    limb_length: int = 7
    arm_directions: tuple = ((-1, 0), (-1, -1), (0, -1), (1, -1))
    intensity: float = 1.0

    def __post_init__(self):
        if self.n_limbs != 4:
            raise ValueError("the swimmer has exactly four limbs")
        if not 1 <= self.n_limb_positions <= len(self.arm_directions):
            raise ValueError("n_limb_positions exceeds the listed directions")
        if not self.intensity > 0:
            raise ValueError("intensity must be positive")

    @property
    def n_images(self):
        return self.n_limb_positions ** self.n_limbs


def _limb_masks(spec):
    """``masks[limb][pos]`` as boolean images; raises if a limb leaves the frame."""
    side = spec.image_side
    (c0, c1), (r0, r1) = spec.torso_cols, spec.torso_rows
    # upper-left, upper-right, lower-left, lower-right
    anchors = [(r0, c0 - 1, 1, 1), (r0, c1 + 1, 1, -1), (r1, c0 - 1, -1, 1), (r1, c1 + 1, -1, -1)]
    masks = []
    for row, col, flip_r, flip_c in anchors:
        limb = []
        for dr, dc in spec.arm_directions[:spec.n_limb_positions]:
            img = np.zeros((side, side), dtype=bool)
            for t in range(1, spec.limb_length + 1):
                rr, cc = row + t * dr * flip_r, col + t * dc * flip_c
                if not (0 <= rr < side and 0 <= cc < side):
                    raise ValueError(f"limb pixel ({rr}, {cc}) outside the {side}x{side} frame")
                img[rr, cc] = True
            limb.append(img)
        masks.append(limb)
    return masks


def _body_mask(spec):
    side = spec.image_side
    (c0, c1), (r0, r1) = spec.torso_cols, spec.torso_rows
    if not (0 <= r0 <= r1 < side and 0 <= c0 <= c1 < side):
        raise ValueError("torso outside the frame")
    img = np.zeros((side, side), dtype=bool)
    img[r0:r1 + 1, c0:c1 + 1] = True
    return img


def swimmer_parts(spec=SwimmerSpec()):
    """The ``1 + n_limbs * n_limb_positions`` part images as columns.

    Column 0 is the body, column ``1 + limb * n_limb_positions + pos`` the
    given limb in the given position. Images are vectorized column-major.
    """
    images = [_body_mask(spec)] + [m for limb in _limb_masks(spec) for m in limb]
    overlap = np.sum(images, axis=0)
    if overlap.max() > 1:
        raise ValueError("swimmer parts overlap")
    return spec.intensity * np.stack([im.ravel(order="F") for im in images], axis=1).astype(float)


def swimmer_combinations(spec=SwimmerSpec()):
    """Limb positions of every image, ``(n_images, n_limbs)``, last limb fastest."""
    return np.array(list(itertools.product(range(spec.n_limb_positions), repeat=spec.n_limbs)))


def swimmer_witness(spec=SwimmerSpec()):
    """Exact nonnegative factorization ``(X, Y)`` of the swimmer matrix (``M = X Y^T``)."""
    X = swimmer_parts(spec)
    combos = swimmer_combinations(spec)
    Y = np.zeros((len(combos), X.shape[1]))
    Y[:, 0] = 1.0
    for limb in range(spec.n_limbs):
        Y[np.arange(len(combos)), 1 + limb * spec.n_limb_positions + combos[:, limb]] = 1.0
    return X, Y


def gen_swimmer(spec=SwimmerSpec()):
    """Swimmer data matrix, ``(image_side**2, n_images)``, one image per column."""
    X, Y = swimmer_witness(spec)
    return X @ Y.T


def gen_random_ntd(dims=(20, 20, 20), core_dims=(3, 3, 3), seed=0):
    """Nonnegative tensor with an exact Tucker decomposition.

    Core and factors have i.i.d. ``|N(0, 1)|`` entries.

    Returns
    -------
    M : ndarray of shape ``dims``
    core : ndarray of shape ``core_dims``
    factors : list of ``(dims[n], core_dims[n])`` arrays
    """
    dims, core_dims = tuple(dims), tuple(core_dims)
    if len(dims) != len(core_dims) or any(r > d for r, d in zip(core_dims, dims)):
        raise ValueError("core_dims must not exceed dims, mode by mode")
    rng = make_rng(seed)
    core = np.abs(rng.standard_normal(core_dims))
    factors = [np.abs(rng.standard_normal((d, r))) for d, r in zip(dims, core_dims)]
    return tucker_to_tensor(core, factors), core, factors
