"""Nonnegative matrix factorization of the swimmer images.

The procedural swimmer matrix has 256 images (32 x 32 pixels, one per
column): a fixed torso plus four limbs, each in one of four positions. It
factors exactly with p = 17 parts. Rank-one residue iterations update one
column pair (x_j, y_j) at a time; the modified version keeps ||x_j|| = 1 and
can visit the pairs in a fresh random order every cycle.

A run counts as a success when the relative error after 100 cycles is below
1e-3. Increase ``N_RUNS`` for a fuller picture (each run takes a few seconds).
"""
import numpy as np

from blockprox import bench

N_RUNS = 4

campaign = bench.Campaign("nmf_swimmer", n_runs=N_RUNS, max_cycles=100)
result = bench.run_campaign(campaign, workers=4,
                            progress=lambda c: print(f"  run {c.run} {c.variant:<18} "
                                                     f"final error {c.final_error:.2e}"))
print()
print(bench.format_report(result))

# the recovered parts of one successful run, as 32 x 32 images
best = min((c for c in result.cells if c.variant == "modified_shuffled"),
           key=lambda c: c.final_error)
print(f"\nbest shuffled run: seed {best.seed}, error {best.final_error:.2e}, "
      f"{int(np.sum(best.rel_error < 1e-3))} of {len(best.rel_error)} iterations below 1e-3")
