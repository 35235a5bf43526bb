"""
Adams methods from a Gaussian process
=====================================

Condition a GP prior over y and its derivative on the last few derivative
values, and the conditional mean of the next step turns out to be the
classical Adams weights.  Adding one extra basis element gives the
conditional variance, which is the local truncation error squared.
"""

from fractions import Fraction

import numpy as np

from gpadams import (
    ab_coefficients,
    build_basis,
    build_prior,
    condition,
    condition_float,
    format_polynomial,
    verify_propositions,
)

# the basis for AB3 lives on the grid offsets 0, -1, -2 (in units of h)
basis = build_basis("ab", 3, augmented=True)
for k, (p, P) in enumerate(zip(basis.phi, basis.Phi)):
    print(f"phi[{k}] = {format_polynomial(p):40s} Phi[{k}] = {format_polynomial(P)}")

# prior covariance of (y_{i+1}, y_i, f_i, f_{i-1}, f_{i-2}); the last
# element carries a = alpha h^3, so entries are polynomials in a
prior = build_prior(basis)
print()
for label, row in zip(prior.labels, prior.entries):
    print(f"{label:8s}", "  ".join(format_polynomial(e, "a") for e in row))

# exact conditioning
law = condition(prior)
print("\nmean weights on f:", [str(w) for w in law.f_weights])
print("classical AB3:     ", [str(w) for w in ab_coefficients(3)])
print("sd constant:", law.sd_constant, "  (variance =", format_polynomial(law.variance, "a") + ")")

# the same thing in floating point, for a few noise scales
for a in (0.0, 0.1, 1.0):
    w, var = condition_float(prior, a)
    print(f"a={a:<4} weights={np.round(w, 12)} var={var:.6g}  expected {float(law.variance(Fraction(a))):.6g}")

# and the full table
print()
print(verify_propositions(5).format_table())
