"""Proximal operators and penalty functions.

Scalar rules are vectorized over numpy arrays: every function below accepts
either a float or an array and applies elementwise.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import StrongConvexityViolated, ZeroVector

PENALTY_KINDS = ("mcp", "scad", "l1", "indicator_nonneg")


@dataclass(frozen=True)
class PenaltySpec:
    """Separable sparsity penalty ``r(theta)``.

    Parameters
    ----------
    kind : {'mcp', 'scad', 'l1', 'indicator_nonneg'}
    lam : float
        Regularization level, ``lam >= 0``.
    gamma : float
        Concavity parameter. MCP needs ``gamma > 1`` and SCAD ``gamma > 2``;
        ignored for the convex kinds.
    """

    kind: str
    lam: float = 0.0
    gamma: float = 3.0

    def __post_init__(self):
        if self.kind not in PENALTY_KINDS:
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.kind == "mcp" and not self.gamma > 1:
            raise ValueError("MCP requires gamma > 1")
        if self.kind == "scad" and not self.gamma > 2:
            raise ValueError("SCAD requires gamma > 2")


def penalty_value(spec, theta):
    """Evaluate the penalty elementwise."""
    theta = np.asarray(theta, dtype=float)
    a = np.abs(theta)
    lam, g = spec.lam, spec.gamma
    if spec.kind == "l1":
        out = lam * a
    elif spec.kind == "indicator_nonneg":
        out = np.where(theta >= 0, 0.0, np.inf)
    elif spec.kind == "mcp":
        out = np.where(a <= g * lam, lam * a - theta**2 / (2 * g), 0.5 * g * lam**2)
    else:
        inner = lam * a
        middle = (2 * g * lam * a - (theta**2 + lam**2)) / (2 * (g - 1))
        outer = lam**2 * (g**2 - 1) / (2 * (g - 1))
        out = np.where(a <= lam, inner, np.where(a <= g * lam, middle, outer))
    return out[()] if out.ndim == 0 else out


def soft_threshold(z, thresh):
    """``sign(z) * max(|z| - thresh, 0)``."""
    z = np.asarray(z, dtype=float)
    out = np.sign(z) * np.maximum(np.abs(z) - thresh, 0.0)
    return out[()] if out.ndim == 0 else out


def penalty_prox(spec, z, weight=1.0):
    """Minimize ``0.5 * weight * (beta - z)**2 + r(beta)`` elementwise.

    For MCP this is firm thresholding and for SCAD the three-piece rule; both
    are only well defined when the scalar objective is strongly convex, i.e.
    ``weight * gamma > 1`` (MCP) and ``weight * (gamma - 1) > 1`` (SCAD).

    Raises
    ------
    StrongConvexityViolated
        If the weight/gamma condition above fails.
    """
    if not weight > 0:
        raise ValueError("weight must be positive")
    z = np.asarray(z, dtype=float)
    lam, g, w = spec.lam, spec.gamma, weight
    a = np.abs(z)
    sgn = np.sign(z)
    if spec.kind == "l1":
        out = soft_threshold(z, lam / w)
    elif spec.kind == "indicator_nonneg":
        out = np.maximum(z, 0.0)
    elif spec.kind == "mcp":
        if not w * g > 1:
            raise StrongConvexityViolated(
                f"MCP prox needs weight*gamma > 1 (got {w * g})")
        shrunk = sgn * np.maximum(w * a - lam, 0.0) / (w - 1.0 / g)
        out = np.where(a <= g * lam, shrunk, z)
    else:
        if not w * (g - 1) > 1:
            raise StrongConvexityViolated(
                f"SCAD prox needs weight*(gamma-1) > 1 (got {w * (g - 1)})")
        soft = sgn * np.maximum(a - lam / w, 0.0)
        middle = sgn * ((g - 1) * w * a - g * lam) / ((g - 1) * w - 1)
        out = np.where(a <= lam + lam / w, soft, np.where(a <= g * lam, middle, z))
    out = np.asarray(out, dtype=float)
    return out[()] if out.ndim == 0 else out


def project_nonneg(v):
    """Euclidean projection onto the nonnegative orthant."""
    return np.maximum(v, 0.0)


def sphere_nonneg_argmax(c):
    """Maximize ``c @ x`` over ``{x >= 0, ||x|| = 1}``.

    The maximizer is:

    * ``c_+ / ||c_+||`` when some entry is positive (unique);
    * otherwise a unit coordinate vector, at the largest entry of ``c``.
      Ties (including several zeros) go to the smallest index.

    Raises
    ------
    ZeroVector
        If ``c`` is identically zero, where every feasible point is optimal.
    """
    c = np.asarray(c, dtype=float)
    if c.size == 0 or not np.any(c):
        raise ZeroVector("sphere_nonneg_argmax needs a nonzero vector")
    x = np.zeros_like(c)
    pos = c > 0
    if pos.any():
        cp = np.where(pos, c, 0.0)
        x = cp / np.linalg.norm(cp)
    else:
        # np.argmax returns the first occurrence, which is the tie-break we want
        x.flat[int(np.argmax(c))] = 1.0
    return x
