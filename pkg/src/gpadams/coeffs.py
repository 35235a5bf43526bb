"""Classical Adams coefficient tables, error constants and backward differences.

Everything here is computed by direct Lagrange integration or by exact moment
systems; none of it goes through the GP conditioning in :mod:`gpadams.gpcond`,
so the two derivations can be checked against each other.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .polybasis import (
    MAX_AB_STEPS,
    MAX_AM_STEPS,
    Family,
    ab_nodes,
    am_nodes,
    integrate_01,
    lagrange_basis,
)


def _check_steps(s, lo, hi, what="steps"):
    if not isinstance(s, int) or not lo <= s <= hi:
        raise ValueError(f"{what} must be an integer in [{lo}, {hi}], got {s!r}")


@lru_cache(maxsize=None)
def ab_coefficients(s: int) -> tuple[Fraction, ...]:
    """Weights on ``f_i, f_{i-1}, ..., f_{i-s+1}`` for the s-step Adams-Bashforth method."""
    _check_steps(s, 1, MAX_AB_STEPS)
    nodes = ab_nodes(s)
    return tuple(integrate_01(lagrange_basis(j, nodes)) for j in nodes)


@lru_cache(maxsize=None)
def am_coefficients(total_steps: int) -> tuple[Fraction, ...]:
    """Weights on ``f_{i+1}, f_i, ...`` for the Adams-Moulton method using ``total_steps`` values."""
    _check_steps(total_steps, 1, MAX_AM_STEPS, "total_steps")
    nodes = am_nodes(total_steps)
    return tuple(integrate_01(lagrange_basis(j, nodes)) for j in nodes)


def error_constant(family: Family | str, s: int) -> Fraction:
    """Signed local truncation error constant.

    One step of the method applied to the exact solution misses the exact
    increment by ``error_constant * h**(s+1) * y^(s+1)`` to leading order.
    Positive for AB, negative for AM.
    """
    family = Family(family)
    if family is Family.AB:
        _check_steps(s, 1, MAX_AB_STEPS)
        return am_coefficients(s + 1)[0]
    _check_steps(s, 1, MAX_AM_STEPS)
    # interpolate one node further into the future and integrate its basis polynomial
    nodes = am_nodes(s)
    extra = nodes[0] + 1
    return integrate_01(lagrange_basis(extra, (extra,) + nodes))


def truncation_constant(family: Family | str, s: int) -> Fraction:
    """Magnitude of :func:`error_constant`; the noise standard deviation is
    ``truncation_constant * h**(s+1) * |alpha|``."""
    return abs(error_constant(family, s))


def _solve_exact(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(A)
    M = [list(row) + [rhs] for row, rhs in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular moment system")
        M[col], M[piv] = M[piv], M[col]
        for r in range(n):
            if r != col and M[r][col] != 0:
                m = M[r][col] / M[col][col]
                M[r] = [x - m * y for x, y in zip(M[r], M[col])]
    return [M[r][n] / M[r][r] for r in range(n)]


@lru_cache(maxsize=None)
def bd_coefficients(s: int) -> tuple[Fraction, ...]:
    """Backward-difference weights ``delta_k`` for ``f_{i-k}``, k = 0..s.

    ``h**-s * sum_k delta_k f_{i-k}`` approximates the s-th derivative of f
    at ``t_{i+1}`` to first order.  Obtained from the Taylor moment
    conditions about offset +1 at nodes ``0, -1, ..., -s``.
    """
    _check_steps(s, 1, MAX_AM_STEPS)
    # (s+1)-point stencil; s may go one past MAX_AB_STEPS for the AM noise estimate
    offsets = [Fraction(-k - 1) for k in range(s + 1)]
    A = [[x**m / factorial(m) for x in offsets] for m in range(s + 1)]
    b = [Fraction(int(m == s)) for m in range(s + 1)]
    return tuple(_solve_exact(A, b))


@dataclass(frozen=True)
class SchemeTable:
    family: Family
    s: int
    betas: tuple[Fraction, ...]
    lte_constant: Fraction
    bd_coeffs: tuple[Fraction, ...]


def scheme_table(family: Family | str, s: int) -> SchemeTable:
    family = Family(family)
    betas = ab_coefficients(s) if family is Family.AB else am_coefficients(s)
    return SchemeTable(
        family=family,
        s=s,
        betas=betas,
        lte_constant=truncation_constant(family, s),
        bd_coeffs=bd_coefficients(s),
    )


@dataclass(frozen=True)
class IdentityReport:
    s: int
    lhs: tuple[Fraction, ...]
    rhs: tuple[Fraction, ...]

    @property
    def passed(self) -> bool:
        return self.lhs == self.rhs

    def __str__(self) -> str:
        fmt = lambda v: " ".join(str(x) for x in v)
        status = "PASS" if self.passed else "FAIL"
        return f"AB{self.s} + C*delta = [{fmt(self.lhs)}]  AB{self.s + 1} = [{fmt(self.rhs)}]  {status}"


def ab_next_order_identity(s: int) -> IdentityReport:
    """Check that AB(s) plus its backward-difference error estimate is AB(s+1)."""
    _check_steps(s, 1, MAX_AB_STEPS - 1)
    beta = list(ab_coefficients(s)) + [Fraction(0)]
    C = error_constant(Family.AB, s)
    lhs = tuple(b + C * d for b, d in zip(beta, bd_coefficients(s)))
    return IdentityReport(s=s, lhs=lhs, rhs=ab_coefficients(s + 1))
