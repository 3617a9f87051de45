"""Application solvers built on the block prox-linear engine."""

import numpy as np


def relative_error_path(trace, data_norm):
    """``||model - data||_F / ||data||_F`` per iteration, from ``f = 0.5 * ||model - data||^2``.

    Only valid for the factorization problems, whose objective is exactly
    that squared misfit.
    """
    f = np.maximum(np.asarray(trace.objective, dtype=float), 0.0)
    return np.sqrt(2.0 * f) / data_norm
