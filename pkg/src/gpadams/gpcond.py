"""Joint GP prior over (y_{i+1}, y_i, f-window) and exact Gaussian conditioning.

Time is measured in units of the step size (h = 1), so the prior entries and
the resulting weights are pure numbers.  The noise scale enters only through
the augmented basis element and is kept symbolic: every covariance entry is a
:class:`~gpadams.polybasis.Polynomial` in ``a = alpha * h**s`` (degree <= 2).
After conditioning, f-weights are multiplied by ``h`` and the standard
deviation is ``|alpha| * h**(s+1) * sd_constant``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import isqrt

import numpy as np

from .coeffs import ab_coefficients, am_coefficients, truncation_constant
from .polybasis import MAX_AB_STEPS, BasisSet, Family, Polynomial, build_basis


class DerivationError(ArithmeticError):
    """The conditioning could not be carried out exactly (broken basis)."""


@dataclass(frozen=True)
class PriorMatrix:
    family: Family
    s: int
    augmented: bool
    labels: tuple[str, ...]
    entries: tuple[tuple[Polynomial, ...], ...]

    @property
    def size(self) -> int:
        return len(self.labels)

    def block22(self) -> list[list[Polynomial]]:
        return [list(row[1:]) for row in self.entries[1:]]

    def evaluate(self, a: float) -> np.ndarray:
        """Numerical covariance for a given value of ``alpha * h**s``."""
        return np.array([[p(float(a)) for p in row] for row in self.entries], dtype=float)


@dataclass(frozen=True)
class ConditionalLaw:
    """Law of y_{i+1} given y_i and the f-window.

    ``f_weights`` are ordered like the f rows of the prior: most recent first,
    with the weight on f_{i+1} leading for AM.
    """

    family: Family
    s: int
    augmented: bool
    y_weight: Fraction
    f_weights: tuple[Fraction, ...]
    sd_constant: Fraction
    variance: Polynomial = field(repr=False)


def _offset_label(k: int) -> str:
    return "i" if k == 0 else f"i{k:+d}"


def _inner(u: list[Fraction], v: list[Fraction], powers: tuple[int, ...]) -> Polynomial:
    # elements carrying the noise factor contribute to the a**2 coefficient
    coeffs = [Fraction(0)] * 3
    for x, y, p in zip(u, v, powers):
        coeffs[2 * p] += x * y
    return Polynomial(tuple(coeffs))


def build_prior(basis: BasisSet) -> PriorMatrix:
    """Covariance of (y_{i+1}, y_i, f at each basis node) as inner products of basis vectors."""
    vectors = [basis.eval_Phi(1), basis.eval_Phi(0)]
    labels = ["y_{i+1}", "y_i"]
    for k in basis.nodes:
        vectors.append(basis.eval_phi(k))
        labels.append(f"f_{{{_offset_label(k)}}}")
    entries = tuple(
        tuple(_inner(u, v, basis.alpha_powers) for v in vectors) for u in vectors
    )
    return PriorMatrix(basis.family, basis.s, basis.augmented, tuple(labels), entries)


def _solve_polynomial_system(A: list[list[Polynomial]], b: list[Polynomial]) -> list[Polynomial]:
    """Solve ``A x = b`` exactly where pivots must be nonzero constants.

    Entries may be polynomials in the noise scale; elimination only ever
    divides by constant pivots, so the result stays polynomial.
    """
    n = len(A)
    M = [list(row) + [rhs] for row, rhs in zip(A, b)]
    for col in range(n):
        candidates = [
            r for r in range(col, n) if M[r][col].is_constant() and not M[r][col].is_zero()
        ]
        if not candidates:
            raise DerivationError(f"no constant nonzero pivot in column {col}")
        piv = max(candidates, key=lambda r: abs(M[r][col].coeff(0)))
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col].coeff(0)
        M[col] = [x / p for x in M[col]]
        for r in range(n):
            if r != col and not M[r][col].is_zero():
                m = M[r][col]
                M[r] = [x - m * y for x, y in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def _exact_sqrt(q: Fraction) -> Fraction:
    if q < 0:
        raise DerivationError(f"negative variance coefficient {q}")
    num, den = isqrt(q.numerator), isqrt(q.denominator)
    if num * num != q.numerator or den * den != q.denominator:
        raise DerivationError(f"variance coefficient {q} is not a rational square")
    return Fraction(num, den)


def condition(prior: PriorMatrix) -> ConditionalLaw:
    """Condition y_{i+1} on the remaining variables, exactly."""
    S12 = list(prior.entries[0][1:])
    S22 = prior.block22()
    x = _solve_polynomial_system(S22, S12)  # S22 symmetric: weights = S12 S22^{-1}
    for w in x:
        if not w.is_constant():
            raise DerivationError("conditional mean depends on the noise scale")
    weights = [w.coeff(0) for w in x]

    variance = prior.entries[0][0]
    for w, c in zip(x, S12):
        variance = variance - w * c
    if variance.coeff(0) != 0 or variance.coeff(1) != 0 or variance.degree > 2:
        raise DerivationError(f"unexpected variance structure {variance!r}")
    return ConditionalLaw(
        family=prior.family,
        s=prior.s,
        augmented=prior.augmented,
        y_weight=weights[0],
        f_weights=tuple(weights[1:]),
        sd_constant=_exact_sqrt(variance.coeff(2)),
        variance=variance,
    )


def condition_float(prior: PriorMatrix, a: float) -> tuple[np.ndarray, float]:
    """Floating-point conditioning of the numerically evaluated prior.

    Returns (weights on y_i and the f-window, conditional variance).
    """
    K = prior.evaluate(a)
    k12 = K[0, 1:]
    w = np.linalg.solve(K[1:, 1:], k12)
    return w, float(K[0, 0] - k12 @ w)


@lru_cache(maxsize=None)
def conditional_law(family: Family | str, s: int, augmented: bool = True) -> ConditionalLaw:
    """Cached law for (family, s, augmented)."""
    return condition(build_prior(build_basis(Family(family), s, augmented)))


@dataclass(frozen=True)
class CertificationCell:
    family: Family
    s: int
    mean: tuple[Fraction, ...]
    expected_mean: tuple[Fraction, ...]
    deterministic_sd: Fraction
    sd_constant: Fraction
    expected_sd: Fraction
    augmented_mean: tuple[Fraction, ...]

    @property
    def failures(self) -> list[str]:
        out = []
        if self.mean != self.expected_mean:
            out.append("mean")
        if self.augmented_mean != self.mean:
            out.append("augmented-mean")
        if self.deterministic_sd != 0:
            out.append("variance")
        if self.sd_constant != self.expected_sd:
            out.append("sd")
        return out

    @property
    def passed(self) -> bool:
        return not self.failures


@dataclass(frozen=True)
class CertificationReport:
    cells: tuple[CertificationCell, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cells)

    def rows(self) -> list[list[str]]:
        fr = lambda v: " ".join(str(x) for x in v)
        out = []
        for c in self.cells:
            out.append([
                c.family.value.upper(),
                str(c.s),
                fr(c.mean),
                fr(c.expected_mean),
                str(c.deterministic_sd),
                str(c.sd_constant),
                str(c.expected_sd),
                "pass" if c.passed else "FAIL(" + ",".join(c.failures) + ")",
            ])
        return out

    header = ("family", "steps", "mean_weights", "classical_weights",
              "unaugmented_sd", "sd_constant", "truncation_constant", "status")

    def format_table(self) -> str:
        rows = [list(self.header)] + self.rows()
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        return "\n".join(
            "  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows
        )


def _certify(family: Family, s: int) -> CertificationCell:
    det = condition(build_prior(build_basis(family, s, False)))
    aug = condition(build_prior(build_basis(family, s, True)))
    expected = ab_coefficients(s) if family is Family.AB else am_coefficients(s)
    return CertificationCell(
        family=family,
        s=s,
        mean=(det.y_weight,) + det.f_weights,
        expected_mean=(Fraction(1),) + expected,
        deterministic_sd=det.sd_constant,
        sd_constant=aug.sd_constant,
        expected_sd=truncation_constant(family, s),
        augmented_mean=(aug.y_weight,) + aug.f_weights,
    )


def verify_propositions(s_max: int) -> CertificationReport:
    """Certify AB1..AB{s_max} and the matching AM2..AM{s_max+1} derivations."""
    if not isinstance(s_max, int) or not 1 <= s_max <= MAX_AB_STEPS:
        raise ValueError(f"s_max must be in [1, {MAX_AB_STEPS}], got {s_max!r}")
    cells = [_certify(Family.AB, s) for s in range(1, s_max + 1)]
    cells += [_certify(Family.AM, s + 1) for s in range(1, s_max + 1)]
    return CertificationReport(tuple(cells))
