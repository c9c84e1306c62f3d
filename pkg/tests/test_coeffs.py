from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from invsub.coeffs import CoeffRational, Poly, exactify, format_scalar
from invsub.errors import DivisionBySymbolicZero

k0, k1 = Poly.var(0), Poly.var(1)


def test_poly_arithmetic_examples():
    p = (k0 + 1) * (k0 - 1)
    assert p == k0**2 - 1
    assert p.render() == "k0^2 + -1"
    assert (k0 * k1 + k1).evaluate([2.0, 3.0]) == 9.0
    assert (k0 - k0).is_zero()


def test_fraction_coefficients_stay_exact():
    p = k0 * Fraction(1, 3) + k0 * Fraction(2, 3)
    assert p == k0
    assert isinstance(p.leading()[1], Fraction)


def test_float_cancellation_is_exact_zero():
    a = k0 * 0.1 + k0 * 0.2
    assert (a - k0 * 0.30000000000000004).is_zero()


def test_rational_normalisation():
    r = CoeffRational(k0 * 2, k1 * 4)
    assert r.den.leading()[1] == 1
    assert r.render() == "(1/2*k0)/(k1)"
    # a shared monomial factor cancels
    s = CoeffRational(k0 * k1, k1**2)
    assert s == CoeffRational(k0, k1)


def test_rational_arithmetic():
    a = CoeffRational.var(0)
    b = CoeffRational.var(1)
    q = a / b
    assert (q * b) == a
    assert (q + 1).evaluate([3.0, 2.0]) == pytest.approx(2.5)
    assert (q - q).is_zero()
    assert (q**-1) == b / a


def test_zero_denominator_raises():
    with pytest.raises(DivisionBySymbolicZero):
        CoeffRational(k0, Poly())
    with pytest.raises(DivisionBySymbolicZero):
        CoeffRational.const(0).reciprocal()


def test_exactify_and_format():
    assert exactify(0.5) == Fraction(1, 2)
    assert isinstance(exactify(0.1), float)
    assert format_scalar(Fraction(3, 4)) == "3/4"
    assert format_scalar(Fraction(6)) == "6"


ints = st.integers(-5, 5)
polys = st.builds(
    lambda a, b, c: k0 * a + k1 * b + c,
    ints,
    ints,
    ints,
)


@settings(max_examples=100, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms(p, q, r):
    assert p * (q + r) == p * q + p * r
    assert (p * q) * r == p * (q * r)
    assert p + q == q + p


@settings(max_examples=100, deadline=None)
@given(polys, polys, st.floats(-3, 3), st.floats(-3, 3))
def test_evaluation_is_a_homomorphism(p, q, x, y):
    v = [x, y]
    assert (p * q).evaluate(v) == pytest.approx(p.evaluate(v) * q.evaluate(v), abs=1e-9)
    assert (p + q).evaluate(v) == pytest.approx(p.evaluate(v) + q.evaluate(v), abs=1e-9)
