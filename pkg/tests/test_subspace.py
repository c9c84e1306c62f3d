import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _catalog import catalog
from invsub.coeffs import CoeffRational
from invsub.errors import DivisionBySymbolicZero, DomainError, NotInBasisError, NotInvariantError, RecipOnNonConstant
from invsub.fraccalc import FuncExpr, Monomial, snap
from invsub.subspace import (
    Add,
    Const,
    F,
    FracDx,
    IntPow,
    Mul,
    Recip,
    Scale,
    SubspaceBasis,
    TimeOperatorSpec,
    apply_operator,
    check_invariance,
    fit_initial_conditions,
    reduce,
    render_operator,
)


def _psi_values(report, k):
    return [p.evaluate(k) for p in report.psi]


@pytest.mark.parametrize("alpha,beta", [(0.4, 0.6), (0.7, 0.85)])
def test_catalog_psi(alpha, beta):
    rng = random.Random(7)
    for label, op, basis, psi in catalog(alpha, beta):
        rep = check_invariance(op, basis)
        assert rep.invariant, label
        for _ in range(3):
            k = [rng.uniform(0.5, 2.0) for _ in basis.elements]
            got, want = _psi_values(rep, k), psi(k)
            scale = max(1.0, *map(abs, want))
            assert max(abs(g - w) for g, w in zip(got, want)) <= 1e-12 * scale, label


def test_square_on_linear_basis_is_not_invariant():
    rep = check_invariance(IntPow(F(), 2), SubspaceBasis.of(0.0, 1.0))
    assert not rep.invariant
    assert rep.offending_keys == ((2.0, ()),)
    assert "x^2" in rep.render()
    with pytest.raises(NotInvariantError):
        reduce(IntPow(F(), 2), TimeOperatorSpec("A", 0.5, (1,)), SubspaceBasis.of(0.0, 1.0))


def test_recip_on_non_constant_names_operand():
    op = Recip(Add((F(), Const(1.0))))
    with pytest.raises(RecipOnNonConstant) as info:
        check_invariance(op, SubspaceBasis.of(0.0, 0.5))
    assert info.value.operand == "(F + 1)"


def test_recip_of_zero():
    with pytest.raises(DivisionBySymbolicZero):
        apply_operator(Recip(Const(0.0)), FuncExpr.const(1.0))


def test_basis_validation():
    with pytest.raises(DomainError):
        SubspaceBasis(())
    with pytest.raises(DomainError):
        SubspaceBasis.of(1.0, 1.0)
    with pytest.raises(DomainError):
        SubspaceBasis((Monomial(0, 1.0),))


def test_time_operator_spec():
    a = TimeOperatorSpec("A", 0.3, (1, 1, 1))
    assert a.terms() == [(0.3, 1.0), (1.3, 1.0), (2.3, 1.0)]
    assert a.initial_count() == 3
    b = TimeOperatorSpec("B", 0.7, (0, 1))
    assert b.terms() == [(1.4, 1.0)] and b.is_single()
    assert b.initial_count() == 2
    with pytest.raises(DomainError):
        TimeOperatorSpec("C", 0.5, (1,))
    with pytest.raises(DomainError):
        TimeOperatorSpec("A", 0.5, (1, 0))


def test_reduce_examples():
    sys = reduce(Scale(2.0, FracDx(1.5, F())), TimeOperatorSpec("A", 0.5, (1,)), SubspaceBasis.of(0.0, 1.5))
    assert sys.components[0].evaluate([0.0, 1.0]) == pytest.approx(2 * math.gamma(2.5), rel=1e-14)
    assert sys.components[1].is_zero()
    assert "D^0.5 K0" in sys.render()


def test_fit_initial_conditions_examples():
    basis = SubspaceBasis((Monomial(1, 0.0), Monomial(2.0, 0.5)))
    ic = FuncExpr.const(3.0) + FuncExpr.power(0.5, 4.0)
    assert fit_initial_conditions(basis, ic) == (3.0, 2.0)
    with pytest.raises(NotInBasisError):
        fit_initial_conditions(basis, FuncExpr.power(1.0))
    with pytest.raises(DomainError):
        fit_initial_conditions(basis, ic, -1)


def test_render_operator():
    op = Add((FracDx(0.5, F()), Scale(-1.0, IntPow(F(), 2))))
    assert render_operator(op) == "(Dx^0.5[F] + -1*F^2)"


# ------------------------------------------------------------------ properties

betas = st.floats(0.3, 0.95)


@settings(max_examples=40, deadline=None)
@given(betas, st.integers(0, 10**6))
def test_invariance_is_sound_under_substitution(beta, seed):
    # psi evaluated at numbers equals N applied to the numeric element
    rng = random.Random(seed)
    xs = np.linspace(0.2, 2.0, 9)
    for label, op, basis, _ in catalog(0.5, beta):
        if "EX11" in label:
            continue
        rep = check_invariance(op, basis)
        k = [rng.uniform(-1.5, 1.5) for _ in basis.elements]
        direct = apply_operator(op, basis.combine(k)).evaluate(xs)
        via_psi = basis.combine([p.evaluate(k) for p in rep.psi]).evaluate(xs)
        assert np.allclose(direct, via_psi, rtol=1e-9, atol=1e-9), label


@settings(max_examples=40, deadline=None)
@given(betas, st.floats(0.2, 5.0))
def test_invariance_is_scaling_covariant(beta, s):
    # rescaling basis elements keeps the verdict and maps psi accordingly
    for label, op, basis, _ in catalog(0.5, beta)[:6]:
        scaled = SubspaceBasis(tuple(Monomial(s, e.power, e.ml_factors) for e in basis.elements))
        r1, r2 = check_invariance(op, basis), check_invariance(op, scaled)
        assert r1.invariant and r2.invariant, label
        k = [0.7 + 0.1 * j for j in range(len(basis))]
        # N[sum k_j s phi_j] = sum psi2_j(k) s phi_j and N[sum (s k_j) phi_j] = sum psi1_j(s k) phi_j
        v1 = [p.evaluate([s * v for v in k]) for p in r1.psi]
        v2 = [s * p.evaluate(k) for p in r2.psi]
        assert np.allclose(v1, v2, rtol=1e-10, atol=1e-12), label


@settings(max_examples=30, deadline=None)
@given(st.floats(0.3, 0.95), st.integers(2, 4))
def test_higher_power_of_f_leaves_power_basis(beta, p):
    rep = check_invariance(IntPow(F(), p), SubspaceBasis.of(0.0, beta))
    assert not rep.invariant
    assert snap(p * beta) in [k[0] for k in rep.offending_keys]


def test_symbolic_coefficients_are_rational():
    rep = check_invariance(catalog(0.5, 0.6)[11][1], catalog(0.5, 0.6)[11][2])
    assert isinstance(rep.psi[0], CoeffRational) and not rep.psi[0].is_polynomial()
