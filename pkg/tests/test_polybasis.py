from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpadams.polybasis import (
    Family,
    Polynomial,
    build_basis,
    format_polynomial,
    integrate_01,
    lagrange_basis,
)

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=30)
polys = st.lists(fractions, max_size=9).map(lambda cs: Polynomial(tuple(cs)))


def test_trailing_zeros_trimmed():
    assert Polynomial((1, 2, 0, 0)).coeffs == (1, 2)
    assert Polynomial((0, 0)).coeffs == ()
    assert Polynomial(()).degree == -1


def test_float_coefficients_rejected():
    with pytest.raises(TypeError):
        Polynomial((0.5,))


@given(polys, polys)
def test_degree_of_product(a, b):
    if a.is_zero() or b.is_zero():
        assert (a * b).is_zero()
    else:
        assert (a * b).degree == a.degree + b.degree


@settings(max_examples=200)
@given(polys)
def test_antiderivative_roundtrip(p):
    assert p.antiderivative().derivative() == p


@given(polys, fractions)
def test_evaluation_is_exact_and_matches_float(p, x):
    exact = p(x)
    assert isinstance(exact, F)
    assert p(float(x)) == pytest.approx(float(exact), rel=1e-9, abs=1e-6)


def test_lagrange_single_node():
    assert lagrange_basis(0, [0]) == Polynomial.constant(1)


def test_lagrange_ab3_first_basis():
    # (u+1)(u+2)/2
    assert lagrange_basis(0, [0, -1, -2]).coeffs == (F(1), F(3, 2), F(1, 2))


def test_lagrange_am_node():
    ell = lagrange_basis(-1, [-1, 0, 1])
    assert ell(-1) == 1
    assert ell(0) == 0
    assert ell(1) == 0


def test_lagrange_augmented_element():
    # u(u+1)(u+2)/6
    assert lagrange_basis(1, [1, 0, -1, -2]).coeffs == (0, F(1, 3), F(1, 2), F(1, 6))


@pytest.mark.parametrize("j,nodes", [(0, [0, 0, 1]), (3, [0, 1, 2])])
def test_lagrange_invalid(j, nodes):
    with pytest.raises(ValueError):
        lagrange_basis(j, nodes)


@given(st.sets(st.integers(-8, 8), min_size=1, max_size=7))
def test_partition_of_unity(nodes):
    nodes = sorted(nodes)
    total = sum((lagrange_basis(j, nodes) for j in nodes), Polynomial())
    assert total == Polynomial.constant(1)


def test_integrate_01_examples():
    assert integrate_01(Polynomial.constant(1)) == 1
    assert integrate_01(lagrange_basis(0, [0, -1, -2])) == F(23, 12)
    assert integrate_01(lagrange_basis(1, [1, 0, -1, -2])) == F(3, 8)


@given(polys)
def test_integrate_01_matches_antiderivative(p):
    assert integrate_01(p) == p.integrate(0, 1)


def test_euler_basis():
    b = build_basis(Family.AB, 1)
    assert b.phi == (Polynomial(), Polynomial.constant(1))
    assert b.Phi == (Polynomial.constant(1), Polynomial((0, 1)))


def test_ab3_Phi_first_component():
    b = build_basis("ab", 3)
    # u (2u^2 + 9u + 12) / 12
    assert b.Phi[1] == Polynomial((0, 12, 9, 2)) / 12
    assert b.Phi[1](1) == F(23, 12)


def test_ab3_augmented():
    b = build_basis("ab", 3, augmented=True)
    assert len(b.phi) == len(b.Phi) == 5
    assert b.phi[-1].coeffs == (0, F(1, 3), F(1, 2), F(1, 6))
    # u^2 (u + 2)^2 / 24
    assert b.Phi[-1] == Polynomial.from_roots([0, 0, -2, -2]) / 24
    assert b.alpha_powers == (0, 0, 0, 0, 1)
    assert b.alpha_exponent == 3


def test_am4_augmented_basis():
    b = build_basis("am", 4, augmented=True)
    assert b.nodes == (1, 0, -1, -2)
    # node +1 element is u(u+1)(u+2)/6
    assert b.phi[1] == Polynomial.from_roots([0, -1, -2]) / 6
    assert b.Phi[1] == Polynomial.from_roots([0, 0, -2, -2]) / 24
    # -u(3u^3 + 8u^2 - 6u - 24)/24
    assert b.Phi[2] == Polynomial((0, -24, -6, 8, 3)) / -24
    assert b.Phi[3] == Polynomial((0, 0, -12, 4, 3)) / 24
    assert b.Phi[4] == Polynomial((0, 0, -2, 0, 1)) / -24
    # augmented: u(u-1)(u+1)(u+2)/24 and its integral u^2(6u^3 + 15u^2 - 10u - 30)/720
    assert b.phi[-1] == Polynomial.from_roots([0, 1, -1, -2]) / 24
    assert b.Phi[-1] == Polynomial((0, 0, -30, -10, 15, 6)) / 720


@pytest.mark.parametrize("family", ["ab", "am"])
@pytest.mark.parametrize("s", range(1, 7))
@pytest.mark.parametrize("augmented", [False, True])
def test_basis_invariants(family, s, augmented):
    b = build_basis(family, s, augmented)
    assert b.phi[0].is_zero() and b.Phi[0] == Polynomial.constant(1)
    for p, P in zip(b.phi[1:], b.Phi[1:]):
        assert P == p.antiderivative()
    assert b.eval_Phi(0) == [1] + [0] * (len(b) - 1)
    # derivative basis vectors at the nodes are orthonormal
    vecs = [b.eval_phi(k) for k in b.nodes]
    for p, u in enumerate(vecs):
        for q, v in enumerate(vecs):
            assert sum(x * y for x, y in zip(u, v)) == (1 if p == q else 0)
    if augmented:
        assert all(b.phi[-1](k) == 0 for k in b.nodes)


@pytest.mark.parametrize("s", range(1, 7))
def test_weights_sum_to_one(s):
    b = build_basis("ab", s)
    assert sum(integrate_01(p) for p in b.phi[1:]) == 1


@pytest.mark.parametrize("args", [("ab", 0), ("ab", 7), ("am", 8), ("bdf", 2)])
def test_build_basis_rejects(args):
    with pytest.raises(ValueError):
        build_basis(*args)


def test_format_polynomial():
    assert format_polynomial(Polynomial()) == "0"
    assert format_polynomial(Polynomial((1, -1, F(1, 2)))) == "1 - u + 1/2*u^2"
    assert format_polynomial(Polynomial((0, 0, -3)), "a") == "-3*a^2"
