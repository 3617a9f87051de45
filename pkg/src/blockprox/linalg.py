"""Spectral-norm estimates used to set Lipschitz constants."""

import numpy as np

POWER_MAX_ITER = 100
POWER_RTOL = 1e-10
POWER_INFLATE = 1.01


def power_iteration(apply, n, max_iter=POWER_MAX_ITER, rtol=POWER_RTOL, inflate=POWER_INFLATE):
    """Largest eigenvalue of a symmetric positive semidefinite operator.

    Parameters
    ----------
    apply : callable
        ``apply(v) -> B @ v`` for the PSD operator ``B`` of size ``n``.
    n : int
    max_iter, rtol : stopping rule on the Rayleigh quotient.
    inflate : float
        The estimate approaches the top eigenvalue from below, so it is
        multiplied by this factor to serve as an upper bound.

    Returns
    -------
    float
        ``inflate * lambda_max``; 0 for the zero operator.
    """
    # a deterministic, sign-free start vector: never orthogonal to the Perron
    # vector of a nonnegative operator, and generic enough for the others
    v = 1.0 + np.arange(n, dtype=float) / max(n, 1)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = apply(v)
        new = float(v @ w)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(new - est) <= rtol * abs(new):
            est = new
            break
        est = new
    return inflate * est


def gram_norm(A):
    """Upper estimate of ``||A^T A||_2`` (= ``||A||_2^2``)."""
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    if n <= m:
        G = A.T @ A
        return power_iteration(lambda v: G @ v, n)
    G = A @ A.T
    return power_iteration(lambda v: G @ v, m)


def sym_norm(G):
    """Upper estimate of the spectral norm of a PSD matrix ``G``."""
    G = np.asarray(G, dtype=float)
    return power_iteration(lambda v: G @ v, G.shape[0])
