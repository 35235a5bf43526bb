"""
Convergence of the randomised AB methods
========================================

Lotka-Volterra, 200 noisy realisations per step size, x-error at t = 10.
The noise is scaled to the local truncation error, so the mean absolute
error should still fall off like h^s.  Takes about ten seconds.
"""

import numpy as np

from gpadams import run_convergence

h_list = [0.1, 0.05, 0.025, 0.0125]
report = run_convergence("lotka_volterra", [1, 2, 3, 4, 5], h_list, n=200, seed=0, probe_t=10.0)

print(f"reference x(10) = {report.reference:.12f}  (own error ~ {report.reference_floor:.1e})\n")
print("s   " + "".join(f"h={h:<10}" for h in h_list) + "slope")
for a, s in enumerate(report.s_list):
    row = "".join(f"{e:<12.3e}" for e in report.mean_abs_error[a])
    print(f"{s}   {row}{report.slopes[a]:.2f} +/- {report.slope_stderr[a]:.2f}")

# The signed errors are where the method bias shows up.  For s = 1 they sit
# well away from zero.  For higher s the bias shrinks like h^s but the
# injected noise shrinks faster, so the spread never covers it.
print("\nsigned x-errors at h = 0.025")
for s in (1, 2, 3):
    e = report.signed_errors[(s, 0.025)]
    se = e.std(ddof=1) / np.sqrt(e.size)
    print(f"s={s}: mean {e.mean():+.3e}  sd {e.std(ddof=1):.3e}  mean/se {e.mean() / se:+.1f}")
