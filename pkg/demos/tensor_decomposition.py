"""Nonnegative Tucker decomposition with and without extrapolation.

A 20 x 20 x 20 tensor is built from a nonnegative 3 x 3 x 3 core and
nonnegative factors. Block prox-gradient steps cycle over the core and the
three factor matrices; the extrapolated version adds an inertial term with
weights capped by the ratio of successive Lipschitz constants.
"""
import numpy as np

from blockprox.datagen import gen_random_ntd
from blockprox.problems import relative_error_path
from blockprox.problems.ntd import solve_ntd

M, core, factors = gen_random_ntd((20, 20, 20), (3, 3, 3), seed=1)
norm = np.linalg.norm(M)

for variant in ("bpg", "bpg_noextrap"):
    C, A, trace = solve_ntd(M, (3, 3, 3), variant, max_cycles=1000, seed=1)
    err = relative_error_path(trace, norm)[3::4]      # one value per cycle
    reached = np.nonzero(err < 1e-3)[0]
    when = f"at cycle {reached[0] + 1}" if reached.size else "not within 1000 cycles"
    marks = ", ".join(f"{k}: {err[k - 1]:.1e}" for k in (10, 100, 500, 1000))
    print(f"{variant:<13} error 1e-3 reached {when}; error by cycle {marks}")
    print(f"{'':13} core min {C.min():.2e}, factor mins "
          f"{', '.join(f'{a.min():.2e}' for a in A)}")
