"""
Staged reconstruction, one slice at a time
===========================================

Each stage solves on the residual measurements with all samples drawn so
far, keeps a fraction of the result and subtracts it from the residual.
"""

import numpy as np

from nucs import horizontal_slices, plan_horizontal, run_iterative
from nucs.bench import make_signal, preset

cfg = preset("stepwise")
profile, s = make_signal(cfg, seed=2024)
sched = horizontal_slices(profile, 3, cfg.N)
plan = plan_horizontal(sched, cfg.slice_counts, seed=np.random.default_rng(0))

res = run_iterative(s, sched, plan, config=cfg.solver)
print(f"initial energy estimate {res.energy_initial:.3f} "
      f"(true {np.vdot(s.values, s.values).real:.3f})")
for st in res.stages:
    print(f"stage {st.stage}: {len(st.cumulative_samples):2d} samples, rmse {st.rmse:.4f}, "
          f"energy left {st.energy_remaining:.3f}, converged {st.report.converged}")

# With a single slice and f = 1 the staged solver is a plain L1 solve
one = horizontal_slices(profile, 1, cfg.N)
print("single-stage rmse:",
      run_iterative(s, one, plan_horizontal(one, [16], seed=0), [1.0]).stages[0].rmse)
