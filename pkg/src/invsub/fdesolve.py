"""Closed-form solvers for reduced fractional ODE systems, and a numerical oracle.

Systems are solved one component at a time in dependency order.  After the
already-solved components are substituted, each right-hand side is
classified by its shape in the unknown and dispatched to the first matching
strategy:

    Zero -> Constant -> Forcing -> LinearSelf -> LinearSelfPlusForcing
         -> PowerSelf -> ProductCoupling -> multi-term series

Anything else raises :class:`UnsupportedSystemError`; :func:`adams_oracle`
integrates such systems numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce as _fold
from graphlib import CycleError, TopologicalSorter
from typing import Sequence

import numpy as np

from .coeffs import CoeffRational, Poly
from .errors import (
    CommensurabilityError,
    DenominatorBlowupError,
    DomainError,
    NoRealSolutionError,
    PoleError,
    UnsupportedSystemError,
    UnsupportedTermError,
)
from .fraccalc import (
    MLSpec,
    TimeExpr,
    TimeSeries,
    TimeTerm,
    caputo_t,
    frac_integral_t,
)
from .specfun import gamma_ratio, gamma_real, is_pole, rgamma
from .subspace import ReducedSystem, TimeOperatorSpec

__all__ = [
    "InitialData",
    "ScalarFDE",
    "SolveOutcome",
    "classify",
    "solve_sequential",
    "solve_linear_ml",
    "solve_power_ansatz",
    "solve_forced_power",
    "solve_product_coupling",
    "solve_multiterm_series",
    "ex1_homogeneous_block",
    "ex1_forced_block",
    "caputo_t_closed",
    "normalize_ml",
    "rhs_time_expr",
    "back_substitute",
    "OracleResult",
    "adams_oracle",
]

REL_MATCH = 1e-12
DEFAULT_KMAX = 40
SERIES_VARIANTS = ("printed", "corrected")


@dataclass(frozen=True)
class InitialData:
    """Initial data of one component.

    ``values`` are K(0), K'(0), ...; ``free`` is the amplitude of a free
    family (e.g. ``a`` in ``a * t^-alpha``); ``branch`` picks the sign when a
    power-law amplitude has two real roots.
    """

    values: tuple = ()
    free: float | None = None
    branch: int = 1

    def padded(self, n: int) -> tuple:
        vals = tuple(float(v) for v in self.values[:n])
        return vals + (0.0,) * (n - len(vals))


@dataclass(frozen=True)
class ScalarFDE:
    """One reduced equation after substitution, classified by right-hand side shape."""

    time_op: TimeOperatorSpec
    kind: str
    c: float = 0.0
    p: float = 1.0
    forcing: TimeExpr = field(default_factory=TimeExpr)
    exponent: float = 0.0
    indices: tuple = ()


@dataclass(frozen=True)
class SolveOutcome:
    expr: TimeExpr
    validity: tuple = ()
    provenance: str = ""
    alternatives: tuple = ()
    meta: dict = field(default_factory=dict, compare=False)

    def render(self) -> str:
        return self.expr.render()


# ------------------------------------------------------------ classification


def _split_var(exps: tuple, j: int) -> tuple[int, tuple]:
    d = dict(exps)
    e = d.pop(j, 0)
    return e, tuple(sorted(d.items()))


def _product_time(coeff, others: tuple, solved: dict) -> TimeExpr:
    out = TimeExpr.const(float(coeff))
    for v, e in others:
        out = out * (solved[v] ** e)
    return out


def classify(psi: CoeffRational, j: int, time_op: TimeOperatorSpec, solved: dict) -> ScalarFDE:
    """Shape of ``sum lam_i D^(w_i) K_j = psi`` once the components in *solved* are substituted."""
    missing = psi.variables() - {j} - set(solved)
    if missing:
        raise UnsupportedSystemError(f"equation {j} depends on unsolved components {sorted(missing)}", j)
    try:
        den_terms = list(psi.den.terms.items())
        if len(den_terms) != 1:
            raise UnsupportedSystemError(f"equation {j}: denominator {psi.den.render('K')} is not a monomial", j)
        (dexps, dcoef), = den_terms
        den_deg, den_others = _split_var(dexps, j)
        den_scale = _product_time(dcoef, den_others, solved).reciprocal()
        groups: dict[int, TimeExpr] = {}
        indices: set[int] = set()
        for exps, c in psi.num.terms.items():
            d, others = _split_var(exps, j)
            indices.update(v for v, _ in others)
            term = _product_time(c, others, solved) * den_scale
            groups[d - den_deg] = groups[d - den_deg] + term if d - den_deg in groups else term
    except UnsupportedTermError as exc:
        raise UnsupportedSystemError(f"equation {j}: {exc}", j) from exc
    groups = {d: g for d, g in groups.items() if not g.is_zero()}
    idx = tuple(sorted(indices))
    degs = set(groups)
    if not degs:
        return ScalarFDE(time_op, "Zero")
    if degs == {0}:
        g = groups[0]
        if g.is_constant():
            return ScalarFDE(time_op, "Constant", c=g.constant_value())
        if g.is_pure_power():
            return ScalarFDE(time_op, "Forcing", forcing=g, indices=idx)
        return ScalarFDE(time_op, "SeriesForcing", forcing=g, indices=idx)
    if degs == {1}:
        g = groups[1]
        if g.is_constant():
            return ScalarFDE(time_op, "LinearSelf", c=g.constant_value())
        if g.is_pure_power() and len(g.terms) == 1:
            t = g.terms[0]
            return ScalarFDE(time_op, "ProductCoupling", c=t.coeff, exponent=t.power, indices=idx)
    if degs == {0, 1} and groups[1].is_constant() and groups[0].is_pure_power():
        return ScalarFDE(time_op, "LinearSelfPlusForcing", c=groups[1].constant_value(), forcing=groups[0], indices=idx)
    if len(degs) == 1:
        (p,) = degs
        if p not in (0, 1) and groups[p].is_constant():
            return ScalarFDE(time_op, "PowerSelf", c=groups[p].constant_value(), p=float(p))
    raise UnsupportedSystemError(f"equation {j}: right-hand side shape (degrees {sorted(degs)}) has no closed-form strategy", j)


# ---------------------------------------------------------------- strategies


def _single_order(time_op: TimeOperatorSpec) -> tuple[float, float]:
    if not time_op.is_single():
        raise UnsupportedSystemError("multi-term time operator; use the series strategy or the oracle")
    ((order, lam),) = time_op.terms()
    return order, lam


def _initial_polynomial(values: Sequence[float]) -> TimeExpr:
    return TimeExpr.polynomial(values)


def solve_linear_ml(eq: ScalarFDE, values: Sequence[float], lam: float | None = None) -> SolveOutcome:
    """``D^w K = c K``: ``K = sum_i K^(i)(0) t^i E_{w,i+1}(c t^w)``."""
    order, lam0 = _single_order(eq.time_op)
    c = eq.c / (lam0 if lam is None else lam)
    if c == 0:
        return SolveOutcome(_initial_polynomial(values), (), "linear-ml")
    terms = [TimeTerm(float(v), float(i), MLSpec(0, order, i + 1.0, c)) for i, v in enumerate(values)]
    return SolveOutcome(TimeExpr(terms), (), "linear-ml")


def solve_forced_power(eq: ScalarFDE, values: Sequence[float]) -> SolveOutcome:
    """``D^w K = g(t)`` with *g* a constant or pure-power profile: initial polynomial plus ``I^w g``."""
    order, lam = _single_order(eq.time_op)
    if eq.kind == "Constant":
        forcing = TimeExpr.const(eq.c)
    elif eq.kind in ("Forcing", "Zero"):
        forcing = eq.forcing
    else:
        raise UnsupportedSystemError(f"forced-power strategy does not apply to {eq.kind}")
    out = _initial_polynomial(values) + frac_integral_t(forcing.scale(1.0 / lam), order)
    return SolveOutcome(out, (), "forced-power" if eq.kind != "Zero" else "zero")


def solve_linear_plus_forcing(eq: ScalarFDE, values: Sequence[float]) -> SolveOutcome:
    """``D^w K = c K + sum f t^mu``: adds ``f Gamma(mu+1) t^(mu+w) E_{w,mu+w+1}(c t^w)`` per forcing term."""
    order, lam = _single_order(eq.time_op)
    c = eq.c / lam
    base = solve_linear_ml(eq, values).expr
    extra = []
    for t in eq.forcing.terms:
        if t.power <= -1:
            raise DomainError(f"forcing exponent must exceed -1, got {t.power}")
        extra.append(
            TimeTerm(t.coeff / lam * gamma_real(t.power + 1.0), t.power + order, MLSpec(0, order, t.power + order + 1.0, c))
        )
    return SolveOutcome(base + TimeExpr(extra), (), "linear-ml-forced")


def _excluded_orders(slope: float, limit: float = 2.0) -> list[float]:
    """Orders w in (0, limit] where 1 + slope*w hits a Gamma pole."""
    out = []
    if slope >= 0:
        return out
    n = 0
    while True:
        w = -(1.0 + n) / slope
        if w > limit + 1e-12:
            return out
        out.append(w)
        n += 1


def solve_power_ansatz(c: float, p: float, order: float, branch: int = 1) -> SolveOutcome:
    """``D^w K = c K^p`` by ``K = eta t^gamma`` with ``gamma = w/(1-p)``.

    ``eta^(p-1) = Gamma(gamma+1)/Gamma(gamma-w+1)/c``.  When ``p-1`` is even
    both real roots are returned, the one selected by *branch* first.
    """
    if p == 1:
        raise DomainError("power ansatz needs p != 1")
    if c == 0:
        raise DomainError("power ansatz needs a nonzero coefficient")
    gamma = order / (1.0 - p)
    validity = tuple(
        f"order != {w:g}" for w in sorted(set(_excluded_orders(1.0 / (1.0 - p)) + _excluded_orders(p / (1.0 - p))))
    )
    if gamma <= -1 or is_pole(gamma + 1.0):
        raise PoleError(f"exponent {gamma:g} <= -1 at order {order:g}; excluded ({', '.join(validity)})")
    ratio = gamma_ratio(gamma + 1.0, gamma - order + 1.0)
    if ratio == 0.0:
        raise PoleError(
            f"Gamma({gamma - order + 1.0:g}) is a pole at order {order:g}; excluded ({', '.join(validity)})"
        )
    target = ratio / c
    e = p - 1.0
    ei = round(e)
    if abs(e - ei) <= 1e-12 and ei % 2 == 0:
        if target <= 0:
            raise NoRealSolutionError(f"eta^{ei:g} = {target:g} has no real root")
        root = target ** (1.0 / e)
        etas = [root, -root] if branch >= 0 else [-root, root]
    elif abs(e - ei) <= 1e-12:
        etas = [math.copysign(abs(target) ** (1.0 / e), target)]
    else:
        if target <= 0:
            raise NoRealSolutionError(f"eta^{e:g} = {target:g} has no real root")
        etas = [target ** (1.0 / e)]
    exprs = [TimeExpr.power(eta, gamma) for eta in etas]
    return SolveOutcome(exprs[0], validity, "power-ansatz", tuple(exprs[1:]))


def solve_product_coupling(eq: ScalarFDE, free: float | None) -> SolveOutcome:
    """``D^w K = eta t^mu K``: verify the family ``a t^mu`` by exact Gamma-ratio matching."""
    order, lam = _single_order(eq.time_op)
    mu, eta = eq.exponent, eq.c / lam
    if abs(mu + order) > 1e-12:
        raise UnsupportedSystemError(f"coupling exponent {mu:g} does not admit an a*t^mu family at order {order:g}")
    if is_pole(mu + 1.0):
        raise PoleError(f"Gamma({mu + 1.0:g}) is a pole")
    ratio = gamma_ratio(mu + 1.0, mu - order + 1.0)
    if abs(ratio - eta) > REL_MATCH * max(abs(ratio), abs(eta)):
        raise UnsupportedSystemError(
            f"a*t^{mu:g} fails: Gamma ratio {ratio:.15g} differs from coupling {eta:.15g}"
        )
    a = 1.0 if free is None else float(free)
    return SolveOutcome(TimeExpr.power(a, mu), ("free amplitude a",), "scaling-linear")


def ex1_homogeneous_block(i: int, kmax: int = DEFAULT_KMAX) -> TimeExpr:
    """Response to K^(i)(0) = 1 for orders (a, a+1, a+2): ``sum_{l=i}^{2} sum_k (-1)^k/k! t^(2k+l) E^(k)_{1,k+l+1}(-t)``."""
    return TimeExpr([], [TimeSeries(1.0, -1.0, float(l), 2.0, 1.0, l + 1.0, 1.0, -1.0, 0, kmax) for l in range(i, 3)])


def ex1_forced_block(i: int, alpha: float, variant: str = "printed", kmax: int = DEFAULT_KMAX) -> TimeExpr:
    """Response of orders (a, a+1, a+2) to forcing by :func:`ex1_homogeneous_block` ``i``.

    ``sum_{l=i+2}^{4} sum_k (-1)^k/k! t^(2k+a+l) E^(k+s)_{1,k+a+l}(-t)`` with
    derivative shift ``s = 0`` (``printed``) or ``s = 1`` (``corrected``).
    """
    if variant not in SERIES_VARIANTS:
        raise DomainError(f"series variant must be one of {SERIES_VARIANTS}, got {variant!r}")
    off = 0 if variant == "printed" else 1
    return TimeExpr(
        [],
        [TimeSeries(1.0, -1.0, alpha + l, 2.0, 1.0, alpha + l, 1.0, -1.0, off, kmax) for l in range(i + 2, 5)],
    )


def _family(time_op: TimeOperatorSpec) -> str | None:
    if time_op.mode != "A" or not 0 < time_op.alpha <= 1:
        return None
    if time_op.lambdas == (1.0, 1.0, 1.0):
        return "EX1"
    if time_op.lambdas == (1.0, 1.0):
        return "EX4"
    return None


def solve_multiterm_series(
    eq: ScalarFDE,
    values: Sequence[float],
    *,
    source: dict | None = None,
    variant: str = "printed",
    kmax: int = DEFAULT_KMAX,
) -> SolveOutcome:
    """Laplace-series solutions for orders (a, a+1, a+2) and (a, a+1) with unit coefficients.

    *source* describes the component forcing an (a, a+1, a+2) equation:
    ``{"gain": g, "values": initial values of the forcing component}``.
    """
    fam = _family(eq.time_op)
    alpha = eq.time_op.alpha
    if fam == "EX4":
        v0, v1 = (list(values) + [0.0, 0.0])[:2]
        if eq.kind == "Zero":
            expr = TimeExpr([TimeTerm(v0, 0.0), TimeTerm(v1, 1.0, MLSpec(0, 1.0, 2.0, -1.0))])
            return SolveOutcome(expr, (), "series-telegraph", meta={"family": fam, "values": (v0, v1)})
        if eq.kind == "LinearSelf":
            c = eq.c
            blocks = [
                TimeSeries(v0, c, 0.0, alpha + 1.0, 1.0, 1.0, alpha, -1.0, 0, kmax),
                TimeSeries(v0 + v1, c, 1.0, alpha + 1.0, 1.0, 2.0, alpha, -1.0, 0, kmax),
            ]
            return SolveOutcome(TimeExpr([], blocks), (), "series-telegraph", meta={"family": fam, "values": (v0, v1)})
    if fam == "EX1":
        v = (list(values) + [0.0] * 3)[:3]
        hom = TimeExpr()
        for i in range(3):
            hom = hom + ex1_homogeneous_block(i, kmax).scale(v[i])
        if eq.kind == "Zero":
            return SolveOutcome(hom, (), "series-multiterm", meta={"family": fam, "values": tuple(v)})
        if eq.kind == "SeriesForcing" and source is not None:
            gain = float(source["gain"])
            sv = source["values"]
            forced = TimeExpr()
            for i in range(3):
                forced = forced + ex1_forced_block(i, alpha, variant, kmax).scale(gain * sv[i])
            return SolveOutcome(
                hom + forced,
                ("forced block uses derivative shift " + variant,),
                "series-multiterm-forced",
                meta={"family": fam, "values": tuple(v), "source": dict(source), "variant": variant},
            )
    raise UnsupportedSystemError(f"multi-term equation ({eq.time_op.render()}, {eq.kind}) has no shipped series family")


# ------------------------------------------------------------------- driver


def _dependencies(system: ReducedSystem) -> dict[int, set[int]]:
    return {j: psi.variables() - {j} for j, psi in enumerate(system.components)}


def _series_source(psi: CoeffRational, j: int, outcomes: dict) -> dict | None:
    # forcing of the form g * K_m with K_m an (a, a+1, a+2) homogeneous series
    if not psi.is_polynomial() or len(psi.num.terms) != 1:
        return None
    ((exps, c),) = psi.num.terms.items()
    if len(exps) != 1 or exps[0][1] != 1 or exps[0][0] == j:
        return None
    m = exps[0][0]
    out = outcomes.get(m)
    if out is None or out.meta.get("family") != "EX1" or "source" in out.meta:
        return None
    return {"gain": float(c) / psi.den.constant_value(), "values": out.meta["values"], "component": m}


def solve_sequential(
    system: ReducedSystem,
    ics: Sequence[InitialData] | None = None,
    *,
    variant: str = "printed",
    kmax: int = DEFAULT_KMAX,
) -> list[SolveOutcome]:
    """Solve every component, leaves of the dependency graph first."""
    n = len(system.components)
    ics = list(ics) if ics is not None else [InitialData()] * n
    if len(ics) != n:
        raise DomainError(f"expected initial data for {n} components, got {len(ics)}")
    try:
        order = list(TopologicalSorter(_dependencies(system)).static_order())
    except CycleError as exc:
        raise UnsupportedSystemError(f"components are mutually coupled: {exc.args[1]}") from exc
    ninit = system.time_op.initial_count()
    outcomes: dict[int, SolveOutcome] = {}
    solved: dict[int, TimeExpr] = {}
    for j in order:
        psi = system.components[j]
        eq = classify(psi, j, system.time_op, solved)
        vals = ics[j].padded(ninit)
        if system.time_op.is_single():
            out = _solve_single(eq, vals, ics[j])
        else:
            src = _series_source(psi, j, outcomes) if eq.kind == "SeriesForcing" else None
            out = solve_multiterm_series(eq, vals, source=src, variant=variant, kmax=kmax)
        outcomes[j] = out
        solved[j] = out.expr
    return [outcomes[j] for j in range(n)]


def _solve_single(eq: ScalarFDE, vals: tuple, ic: InitialData) -> SolveOutcome:
    kind = eq.kind
    if kind in ("Zero", "Constant", "Forcing"):
        return solve_forced_power(eq, vals)
    if kind == "LinearSelf":
        return solve_linear_ml(eq, vals)
    if kind == "LinearSelfPlusForcing":
        return solve_linear_plus_forcing(eq, vals)
    order, lam = _single_order(eq.time_op)
    if kind == "PowerSelf":
        return solve_power_ansatz(eq.c / lam, eq.p, order, ic.branch)
    if kind == "ProductCoupling":
        return solve_product_coupling(eq, ic.free)
    raise UnsupportedSystemError(f"no single-order strategy for a {kind} right-hand side")


# --------------------------------------------------------- back-substitution


def _ml_term_caputo(t: TimeTerm, order: float) -> list[TimeTerm]:
    m = t.ml
    if m.n != 0 or abs(t.power - (m.b - 1.0)) > 1e-12 or abs(m.a - order) > 1e-12 or m.a > 1:
        raise UnsupportedTermError(f"no closed Caputo rule of order {order:g} for {TimeExpr([t]).render()}")
    if m.rate == 0:
        return list(caputo_t(TimeExpr([TimeTerm(t.coeff * rgamma(m.b), t.power)]), order).terms)
    if abs(m.b - 1.0) <= 1e-12:
        # t^0 E_a(l t^a) is an eigenfunction
        return [TimeTerm(t.coeff * m.rate, 0.0, m)]
    return [TimeTerm(t.coeff, m.b - m.a - 1.0, MLSpec(0, m.a, m.b - m.a, m.rate))]


def caputo_t_closed(expr: TimeExpr, order: float) -> TimeExpr:
    """Caputo derivative of pure powers and eps-form Mittag-Leffler terms of matching order."""
    if expr.series:
        raise UnsupportedTermError("series profiles have no closed Caputo rule")
    out: list[TimeTerm] = []
    for t in expr.terms:
        if t.ml is None:
            out.extend(caputo_t(TimeExpr([t]), order).terms)
        else:
            out.extend(_ml_term_caputo(t, order))
    return TimeExpr(out)


def normalize_ml(expr: TimeExpr) -> TimeExpr:
    """Rewrite eps-form terms ``t^(b-1) E_{a,b}(l t^a)`` so that ``1 <= b < 1 + a``."""
    out: list[TimeTerm] = []
    work = list(expr.terms)
    while work:
        t = work.pop()
        m = t.ml
        if m is None or m.n != 0 or m.rate == 0 or abs(t.power - (m.b - 1.0)) > 1e-12:
            out.append(t)
            continue
        if m.b >= 1.0 + m.a - 1e-12:
            lo = m.b - m.a
            work.append(TimeTerm(t.coeff / m.rate, lo - 1.0, MLSpec(0, m.a, lo, m.rate)))
            if not is_pole(lo):
                work.append(TimeTerm(-t.coeff / m.rate * rgamma(lo), lo - 1.0))
        elif m.b < 1.0 - 1e-12:
            if not is_pole(m.b):
                out.append(TimeTerm(t.coeff * rgamma(m.b), t.power))
            work.append(TimeTerm(t.coeff * m.rate, m.b + m.a - 1.0, MLSpec(0, m.a, m.b + m.a, m.rate)))
        else:
            out.append(t)
    return TimeExpr(out, expr.series)


def rhs_time_expr(psi: CoeffRational, exprs: Sequence[TimeExpr]) -> TimeExpr:
    """Substitute time profiles for the symbols of *psi*."""

    def poly_value(poly: Poly) -> TimeExpr:
        acc = TimeExpr()
        for exps, c in poly.terms.items():
            acc = acc + _product_time(c, exps, dict(enumerate(exprs)))
        return acc

    num = poly_value(psi.num)
    if psi.den.is_constant():
        return num.scale(1.0 / float(psi.den.constant_value()))
    return num * poly_value(psi.den).reciprocal()


def _max_coeff(e: TimeExpr) -> float:
    return max((abs(t.coeff) for t in e.terms), default=0.0)


def back_substitute(system: ReducedSystem, exprs: Sequence[TimeExpr]) -> list[float]:
    """Relative coefficient mismatch of ``LHS - psi_j(K)`` per component, by closed rules."""
    out = []
    for j, psi in enumerate(system.components):
        lhs = TimeExpr()
        for order, lam in system.time_op.terms():
            lhs = lhs + caputo_t_closed(exprs[j], order).scale(lam)
        rhs = rhs_time_expr(psi, exprs)
        lhs_n, rhs_n = normalize_ml(lhs), normalize_ml(rhs)
        diff = {}
        for t in lhs_n.terms:
            diff[t.key] = diff.get(t.key, 0.0) + t.coeff
        for t in rhs_n.terms:
            diff[t.key] = diff.get(t.key, 0.0) - t.coeff
        scale = max(_max_coeff(lhs_n), _max_coeff(rhs_n))
        worst = max((abs(v) for v in diff.values()), default=0.0)
        out.append(0.0 if worst == 0 else worst / scale)
    return out


# -------------------------------------------------------------------- oracle


@dataclass(frozen=True)
class OracleResult:
    t: np.ndarray
    values: np.ndarray  # shape (components, N+1)
    step_order: float
    chain: int


def _common_step(orders: Sequence[float]) -> Fraction:
    fr = []
    for o in list(orders) + ([1.0] if max(orders) > 1 else []):
        f = Fraction(o).limit_denominator(64)
        if abs(float(f) - o) > 1e-9:
            raise CommensurabilityError(f"order {o!r} is not a ratio with denominator <= 64")
        fr.append(f)
    den = _fold(math.lcm, (f.denominator for f in fr))
    num = _fold(math.gcd, (f.numerator * (den // f.denominator) for f in fr))
    return Fraction(num, den)


def adams_oracle(
    system: ReducedSystem,
    ics: Sequence[InitialData],
    T: float,
    N: int,
) -> OracleResult:
    """Fractional Adams-Bashforth-Moulton predictor-corrector (one corrector pass).

    Multi-term or high-order left sides are rewritten as a chain of equations
    of the common order ``h`` of all time orders (and 1, when an order
    exceeds 1).
    """
    if N < 2 or not T > 0:
        raise DomainError("oracle needs T > 0 and N >= 2")
    terms = system.time_op.terms()
    orders = [o for o, _ in terms]
    if len(terms) == 1 and orders[0] <= 1:
        h_fr = Fraction(orders[0]).limit_denominator(10**6)
        h = orders[0]
    else:
        h_fr = _common_step(orders)
        h = float(h_fr)
    top, lam_top = terms[-1]
    M = round(top / h)
    ncomp = len(system.components)
    lower = [(round(o / h), lam) for o, lam in terms[:-1]]
    ninit = system.time_op.initial_count()

    y0 = np.zeros(ncomp * M)
    for j in range(ncomp):
        vals = ics[j].padded(ninit)
        for m in range(M):
            mh = h_fr * m
            if mh.denominator == 1 and int(mh) < len(vals):
                y0[j * M + m] = vals[int(mh)]

    psis = system.components

    def rhs(tn: float, y: np.ndarray) -> np.ndarray:
        ks = [y[j * M] for j in range(ncomp)]
        out = np.empty_like(y)
        for j in range(ncomp):
            base = j * M
            out[base : base + M - 1] = y[base + 1 : base + M]
            psi = psis[j]
            den = psi.den.evaluate(ks)
            num = psi.num.evaluate(ks)
            if not math.isfinite(den) or abs(den) <= 1e-12 * max(1.0, abs(num)):
                raise DenominatorBlowupError(f"denominator of component {j} vanished at t={tn:g}", tn)
            val = num / den
            for idx, lam in lower:
                val -= lam * y[base + idx]
            out[base + M - 1] = val / lam_top
        if not np.all(np.isfinite(out)):
            raise DenominatorBlowupError(f"right-hand side overflowed at t={tn:g}", tn)
        return out

    dt = T / N
    k = np.arange(N + 2, dtype=float)
    wb = (k + 1.0) ** h - k**h
    wa = (k + 2.0) ** (h + 1.0) + k ** (h + 1.0) - 2.0 * (k + 1.0) ** (h + 1.0)
    cp = dt**h / math.gamma(h + 1.0)
    cc = dt**h / math.gamma(h + 2.0)
    ys = np.zeros((N + 1, y0.size))
    fs = np.zeros((N + 1, y0.size))
    ys[0] = y0
    fs[0] = rhs(0.0, y0)
    for n in range(N):
        # predictor weights b_{j,n+1} = w[n-j]; corrector weights a_{j,n+1} = A[n-j]
        bw = wb[n::-1]
        pred = y0 + cp * (bw @ fs[: n + 1])
        a = np.empty(n + 1)
        a[0] = n ** (h + 1.0) - (n - h) * (n + 1.0) ** h
        if n >= 1:
            a[1:] = wa[n - 1 :: -1][:n]
        t1 = (n + 1) * dt
        ys[n + 1] = y0 + cc * (rhs(t1, pred) + a @ fs[: n + 1])
        fs[n + 1] = rhs(t1, ys[n + 1])
    t = np.linspace(0.0, T, N + 1)
    vals = np.stack([ys[:, j * M] for j in range(ncomp)])
    return OracleResult(t, vals, h, M)
