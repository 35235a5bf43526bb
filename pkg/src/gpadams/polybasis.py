"""Exact polynomial algebra and the Lagrange basis vectors used by the GP prior.

All polynomials live in the dimensionless step variable ``u = omega / h``,
with ``u = 0`` at the current grid point ``t_i``.  Grid points are referred to
by integer offsets: ``+1`` is ``t_{i+1}``, ``-1`` is ``t_{i-1}`` and so on.
Coefficients are :class:`fractions.Fraction`, so nothing here ever rounds.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

MAX_AB_STEPS = 6
MAX_AM_STEPS = MAX_AB_STEPS + 1


class Family(str, Enum):
    AB = "ab"
    AM = "am"


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    raise TypeError(f"exact coefficient required, got {type(value).__name__}")


@dataclass(frozen=True)
class Polynomial:
    """Polynomial with exact rational coefficients; ``coeffs[k]`` multiplies ``u**k``."""

    coeffs: tuple[Fraction, ...] = ()

    def __post_init__(self):
        cs = [_as_fraction(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def constant(cls, c) -> Polynomial:
        return cls((c,))

    @classmethod
    def monomial(cls, k: int, c=1) -> Polynomial:
        return cls((0,) * k + (c,))

    @classmethod
    def from_roots(cls, roots: Iterable, leading=1) -> Polynomial:
        p = cls.constant(leading)
        for r in roots:
            p = p * cls((-_as_fraction(r), 1))
        return p

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def coeff(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __call__(self, x):
        # Horner; exact for int/Fraction arguments, float arithmetic otherwise
        if isinstance(x, (int, Fraction)):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
        else:
            acc = 0.0 * x
            for c in reversed(self.coeffs):
                acc = acc * x + float(c)
        return acc

    def __add__(self, other) -> Polynomial:
        other = _coerce(other)
        if other is NotImplemented:
            return other
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial(tuple(self.coeff(k) + other.coeff(k) for k in range(n)))

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other) -> Polynomial:
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> Polynomial:
        return (-self) + other

    def __mul__(self, other) -> Polynomial:
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(tuple(out))

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> Polynomial:
        scalar = _as_fraction(scalar)
        return Polynomial(tuple(c / scalar for c in self.coeffs))

    def derivative(self) -> Polynomial:
        return Polynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def antiderivative(self, constant=0) -> Polynomial:
        """Antiderivative with the given constant term."""
        return Polynomial((constant,) + tuple(c / (k + 1) for k, c in enumerate(self.coeffs)))

    def integrate(self, a, b) -> Fraction:
        F = self.antiderivative()
        return F(_as_fraction(b)) - F(_as_fraction(a))

    def __repr__(self) -> str:
        return f"Polynomial({format_polynomial(self)})"


def _coerce(other):
    if isinstance(other, Polynomial):
        return other
    try:
        return Polynomial.constant(_as_fraction(other))
    except TypeError:
        return NotImplemented


def format_polynomial(p: Polynomial, var: str = "u") -> str:
    """Human-readable exact form, e.g. ``1 + 3/2*u + 1/2*u^2``."""
    if p.is_zero():
        return "0"
    terms = []
    for k, c in enumerate(p.coeffs):
        if c == 0:
            continue
        power = "" if k == 0 else var if k == 1 else f"{var}^{k}"
        if not power:
            terms.append(str(c))
        elif abs(c) == 1:
            terms.append(power if c > 0 else f"-{power}")
        else:
            terms.append(f"{c}*{power}")
    return " + ".join(terms).replace("+ -", "- ")


def lagrange_basis(j: int, nodes: Sequence[int]) -> Polynomial:
    """Lagrange polynomial equal to 1 at offset ``j`` and 0 at every other node."""
    nodes = list(nodes)
    if len(set(nodes)) != len(nodes):
        raise ValueError(f"duplicate nodes in {nodes}")
    if j not in nodes:
        raise ValueError(f"root index {j} is not one of the nodes {nodes}")
    others = [x for x in nodes if x != j]
    denom = Fraction(1)
    for x in others:
        denom *= j - x
    return Polynomial.from_roots(others) / denom


def integrate_01(p: Polynomial) -> Fraction:
    """Exact integral of ``p`` over one step, ``u`` in [0, 1]."""
    return sum((c / (k + 1) for k, c in enumerate(p.coeffs)), Fraction(0))


def ab_nodes(s: int) -> tuple[int, ...]:
    """Offsets of the derivative values used by the s-step AB method."""
    return tuple(-k for k in range(s))


def am_nodes(s: int) -> tuple[int, ...]:
    """Offsets for the AM method with ``s`` derivative values (including ``t_{i+1}``)."""
    return tuple(1 - k for k in range(s))


@dataclass(frozen=True)
class BasisSet:
    """The vectors phi (derivative basis) and Phi (its antiderivative).

    ``phi[0] = 0`` and ``Phi[0] = 1``.  When ``augmented`` the last element is
    the extra polynomial that carries the noise scale; it is stored with unit
    coefficient and the symbolic factor ``alpha * h**alpha_exponent`` is
    recorded in ``alpha_powers`` (1 for that element, 0 elsewhere).

    ``s`` counts derivative values in the interpolant: AB uses offsets
    ``0..-(s-1)``, AM uses ``+1..-(s-2)``.
    """

    family: Family
    s: int
    augmented: bool
    nodes: tuple[int, ...]
    phi: tuple[Polynomial, ...]
    Phi: tuple[Polynomial, ...]
    alpha_powers: tuple[int, ...]
    alpha_exponent: int

    def __len__(self) -> int:
        return len(self.phi)

    def eval_phi(self, u) -> list:
        return [p(u) for p in self.phi]

    def eval_Phi(self, u) -> list:
        return [p(u) for p in self.Phi]


def build_basis(family: Family | str, s: int, augmented: bool = False) -> BasisSet:
    family = Family(family)
    if not isinstance(s, int) or s < 1:
        raise ValueError(f"step count must be a positive integer, got {s!r}")
    limit = MAX_AB_STEPS if family is Family.AB else MAX_AM_STEPS
    if s > limit:
        raise ValueError(f"{family.value} supports at most {limit} steps, got {s}")

    nodes = ab_nodes(s) if family is Family.AB else am_nodes(s)
    ells = [lagrange_basis(j, nodes) for j in nodes]
    phi = [Polynomial()] + ells
    Phi = [Polynomial.constant(1)] + [p.antiderivative() for p in ells]
    powers = [0] * len(phi)
    if augmented:
        # one node beyond the interpolation set, on the future side
        extra = max(nodes) + 1
        aug = lagrange_basis(extra, (extra,) + nodes)
        phi.append(aug)
        Phi.append(aug.antiderivative())
        powers.append(1)
    return BasisSet(
        family=family,
        s=s,
        augmented=augmented,
        nodes=nodes,
        phi=tuple(phi),
        Phi=tuple(Phi),
        alpha_powers=tuple(powers),
        alpha_exponent=s,
    )
