"""
Chua circuit: when do the realisations part ways?
=================================================

Twenty noisy AB runs of the chaotic Chua system per step count.  The
spread across runs is tiny at first and then blows up to the size of the
attractor; higher-order methods inject less noise and stay together longer.

Pass an output directory to also write the CSV files.
"""

import sys

import numpy as np

from gpadams import attractor_amplitude, divergence_time, run_ensemble, write_ensemble

h, n, t_end = 0.01, 20, 300.0
out = sys.argv[1] if len(sys.argv) > 1 else None

amp = attractor_amplitude("chua", h, t_end)
print(f"attractor half-range in x: {amp:.3f}")

for s in (1, 3, 5):
    rec = run_ensemble("chua", s, h, n, seed=0, t_end=t_end)
    T = divergence_time(rec.times, rec.states, amp)
    sd = np.std(rec.states[:, :, 0], axis=0)
    calls = rec.step_evaluations / (rec.n_steps - rec.warmup_points + 1)
    print(f"s={s}: spread passes 10% of the attractor at t={T:7.2f}; "
          f"sd(x) at t=50: {sd[int(50 / h)]:.2e}; rhs calls per step {calls:.0f}; "
          f"{rec.wall_clock_per_replicate * 1e3:.0f} ms per replicate")
    if out:
        write_ensemble(rec, f"{out}/chua_s{s}", stride=10)
