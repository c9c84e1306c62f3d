"""Spatial operators, invariance decisions and reduction to fractional ODE systems.

An operator is a small immutable AST over the unknown ``F``.  Applying it to
the generic element ``sum_j k_j * phi_j`` of a candidate basis gives an
expansion whose coefficients are rational functions of the symbols ``k_j``;
the basis is invariant when every surviving monomial key is a basis key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .coeffs import CoeffRational, exactify
from .errors import (
    DivisionBySymbolicZero,
    DomainError,
    NotInBasisError,
    NotInvariantError,
    RecipOnNonConstant,
)
from .fraccalc import CONST_KEY, FuncExpr, MLFactor, Monomial, caputo_x

__all__ = [
    "F",
    "FracDx",
    "Add",
    "Mul",
    "Scale",
    "IntPow",
    "Const",
    "Recip",
    "OperatorExpr",
    "apply_operator",
    "render_operator",
    "render_key",
    "SubspaceBasis",
    "InvarianceReport",
    "apply_generic",
    "check_invariance",
    "TimeOperatorSpec",
    "ReducedSystem",
    "reduce",
    "fit_initial_conditions",
]


# ------------------------------------------------------------------ operators


@dataclass(frozen=True)
class F:
    """The unknown function."""


@dataclass(frozen=True)
class FracDx:
    order: float
    child: "OperatorExpr"

    def __post_init__(self) -> None:
        if not self.order > 0:
            raise DomainError(f"FracDx order must be positive, got {self.order}")


@dataclass(frozen=True)
class Add:
    children: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise DomainError("Add needs at least one child")


@dataclass(frozen=True)
class Mul:
    children: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise DomainError("Mul needs at least one child")


@dataclass(frozen=True)
class Scale:
    factor: float
    child: "OperatorExpr"


@dataclass(frozen=True)
class IntPow:
    child: "OperatorExpr"
    exponent: int

    def __post_init__(self) -> None:
        if int(self.exponent) != self.exponent or self.exponent < 2:
            raise DomainError(f"IntPow exponent must be an integer >= 2, got {self.exponent}")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Recip:
    child: "OperatorExpr"


OperatorExpr = Union[F, FracDx, Add, Mul, Scale, IntPow, Const, Recip]


def render_operator(op: OperatorExpr) -> str:
    if isinstance(op, F):
        return "F"
    if isinstance(op, FracDx):
        return f"Dx^{op.order:g}[{render_operator(op.child)}]"
    if isinstance(op, Add):
        return "(" + " + ".join(render_operator(c) for c in op.children) + ")"
    if isinstance(op, Mul):
        return "(" + " * ".join(render_operator(c) for c in op.children) + ")"
    if isinstance(op, Scale):
        return f"{op.factor:g}*{render_operator(op.child)}"
    if isinstance(op, IntPow):
        return f"{render_operator(op.child)}^{op.exponent}"
    if isinstance(op, Const):
        return f"{op.value:g}"
    if isinstance(op, Recip):
        return f"1/{render_operator(op.child)}"
    raise TypeError(f"not an operator node: {op!r}")


def _reciprocal_coeff(c):
    if isinstance(c, CoeffRational):
        return c.reciprocal()
    if c == 0:
        raise DivisionBySymbolicZero("reciprocal of an expression that vanishes identically")
    return 1 / c


def apply_operator(op: OperatorExpr, f: FuncExpr) -> FuncExpr:
    """Evaluate ``N[f]`` for a space expression with numeric or symbolic coefficients."""
    if isinstance(op, F):
        return f
    if isinstance(op, FracDx):
        return caputo_x(apply_operator(op.child, f), op.order)
    if isinstance(op, Add):
        out = FuncExpr()
        for c in op.children:
            out = out + apply_operator(c, f)
        return out
    if isinstance(op, Mul):
        out = apply_operator(op.children[0], f)
        for c in op.children[1:]:
            out = out * apply_operator(c, f)
        return out
    if isinstance(op, Scale):
        return apply_operator(op.child, f).scale(exactify(op.factor))
    if isinstance(op, IntPow):
        return apply_operator(op.child, f) ** int(op.exponent)
    if isinstance(op, Const):
        return FuncExpr.const(exactify(op.value))
    if isinstance(op, Recip):
        inner = apply_operator(op.child, f)
        if not inner.is_constant():
            raise RecipOnNonConstant(
                f"reciprocal of {render_operator(op.child)} = {inner.render()} depends on x",
                operand=render_operator(op.child),
            )
        if inner.is_zero():
            raise DivisionBySymbolicZero(f"reciprocal operand {render_operator(op.child)} is identically 0")
        return FuncExpr.const(_reciprocal_coeff(inner.constant_value()))
    raise TypeError(f"not an operator node: {op!r}")


# ---------------------------------------------------------------------- basis


def render_key(key: tuple) -> str:
    """Compact form of a monomial key: ``1``, ``x^2``, ``x^0.5*E_0.7(-1*x^0.7)``."""
    power, mls = key
    parts = []
    if power != 0:
        parts.append(f"x^{power:g}")
    for order, rate, mult in mls:
        f = f"E_{order:g}({rate:g}*x^{order:g})"
        parts.append(f if mult == 1 else f"{f}^{mult}")
    return "*".join(parts) if parts else "1"


@dataclass(frozen=True)
class SubspaceBasis:
    """Ordered basis of single monomials ``phi_0..phi_n``."""

    elements: tuple

    def __post_init__(self) -> None:
        els = tuple(e if isinstance(e, Monomial) else Monomial(1, *e) for e in self.elements)
        if not els:
            raise DomainError("a basis needs at least one element")
        keys = [e.key for e in els]
        if len(set(keys)) != len(keys):
            raise DomainError("basis elements must be structurally distinct")
        for e in els:
            if e.coeff == 0:
                raise DomainError("basis elements must have nonzero coefficients")
        object.__setattr__(self, "elements", els)

    @classmethod
    def of(cls, *specs) -> "SubspaceBasis":
        """Build from ``power`` floats or ``(power, [(order, rate), ...])`` pairs."""
        els = []
        for s in specs:
            if isinstance(s, Monomial):
                els.append(s)
            elif isinstance(s, tuple):
                power, mls = s
                els.append(Monomial(1, power, tuple(MLFactor(*m) for m in mls)))
            else:
                els.append(Monomial(1, float(s)))
        return cls(tuple(els))

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def keys(self) -> list[tuple]:
        return [e.key for e in self.elements]

    def generic_element(self) -> FuncExpr:
        return FuncExpr.from_terms(
            Monomial(CoeffRational.var(j) * exactify(e.coeff), e.power, e.ml_factors)
            for j, e in enumerate(self.elements)
        )

    def combine(self, coeffs: Sequence) -> FuncExpr:
        """``sum_j coeffs[j] * phi_j`` with numeric or symbolic coefficients."""
        if len(coeffs) != len(self.elements):
            raise DomainError("coefficient count does not match the basis size")
        return FuncExpr.from_terms(
            Monomial(c * e.coeff, e.power, e.ml_factors) for c, e in zip(coeffs, self.elements)
        )

    def render(self) -> str:
        return "{" + ", ".join(
            ("" if e.coeff == 1 else f"{float(e.coeff):g}*") + render_key(e.key) for e in self.elements
        ) + "}"


@dataclass(frozen=True)
class InvarianceReport:
    invariant: bool
    psi: tuple = ()
    offending_keys: tuple = ()
    expansion: FuncExpr = field(default_factory=FuncExpr)

    def render(self, symbol: str = "k") -> str:
        if self.invariant:
            return "\n".join(f"psi_{j} = {p.render(symbol)}" for j, p in enumerate(self.psi))
        return "not invariant; offending keys: " + ", ".join(render_key(k) for k in self.offending_keys)


def apply_generic(op: OperatorExpr, basis: SubspaceBasis) -> FuncExpr:
    """``N[sum_j k_j phi_j]`` expanded over monomial keys with :class:`CoeffRational` coefficients."""
    return apply_operator(op, basis.generic_element())


def _as_rational(c) -> CoeffRational:
    return c if isinstance(c, CoeffRational) else CoeffRational.const(c)


def check_invariance(op: OperatorExpr, basis: SubspaceBasis) -> InvarianceReport:
    expansion = apply_generic(op, basis)
    index = {k: j for j, k in enumerate(basis.keys)}
    psi = [CoeffRational.const(0)] * len(basis)
    offending = []
    for key, c in expansion.items.items():
        if key in index:
            j = index[key]
            psi[j] = _as_rational(c) * (1 / exactify(basis.elements[j].coeff))
        else:
            offending.append(key)
    if offending:
        return InvarianceReport(False, (), tuple(offending), expansion)
    return InvarianceReport(True, tuple(psi), (), expansion)


# ------------------------------------------------------------- reduced system


@dataclass(frozen=True)
class TimeOperatorSpec:
    """Left side of the evolution equation.

    Mode ``A``: ``sum_i lambdas[i] * D_t^(alpha+i)``.
    Mode ``B``: ``sum_i lambdas[i] * D_t^((i+1)*alpha)``.
    """

    mode: str
    alpha: float
    lambdas: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        if self.mode not in ("A", "B"):
            raise DomainError(f"time operator mode must be 'A' or 'B', got {self.mode!r}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not self.lambdas or self.lambdas[-1] == 0:
            raise DomainError("the highest-order time coefficient must be nonzero")

    def terms(self) -> list[tuple[float, float]]:
        """Nonzero ``(order, coefficient)`` pairs in increasing order."""
        if self.mode == "A":
            pairs = [(self.alpha + i, lam) for i, lam in enumerate(self.lambdas)]
        else:
            pairs = [((i + 1) * self.alpha, lam) for i, lam in enumerate(self.lambdas)]
        return [(o, lam) for o, lam in pairs if lam != 0]

    @property
    def top_order(self) -> float:
        return self.terms()[-1][0]

    def initial_count(self) -> int:
        """Number of classical initial values K(0), K'(0), ... the top order needs."""
        return max(1, math.ceil(self.top_order - 1e-12))

    def is_single(self) -> bool:
        return len(self.terms()) == 1

    def render(self) -> str:
        return " + ".join(f"{lam:g}*D^{o:g}" for o, lam in self.terms())


@dataclass(frozen=True)
class ReducedSystem:
    time_op: TimeOperatorSpec
    components: tuple
    basis: SubspaceBasis

    def __post_init__(self) -> None:
        if len(self.components) != len(self.basis):
            raise DomainError("component count must equal the basis size")

    def render(self) -> str:
        lines = []
        for j, psi in enumerate(self.components):
            lhs = " + ".join(f"{lam:g}*D^{o:g} K{j}" for o, lam in self.time_op.terms())
            lines.append(f"{lhs} = {psi.render('K')}")
        return "\n".join(lines)


def reduce(op: OperatorExpr, time_op: TimeOperatorSpec, basis: SubspaceBasis) -> ReducedSystem:
    """Collapse the evolution equation onto the coordinates ``K_j(t)`` of an invariant basis."""
    rep = check_invariance(op, basis)
    if not rep.invariant:
        raise NotInvariantError(
            "basis is not invariant; offending keys: " + ", ".join(render_key(k) for k in rep.offending_keys),
            rep.offending_keys,
        )
    return ReducedSystem(time_op, rep.psi, basis)


def fit_initial_conditions(basis: SubspaceBasis, ic: FuncExpr, derivative_level: int = 0) -> tuple:
    """Coordinates of *ic* in the basis, i.e. the values ``K_j^(level)(0)``."""
    if derivative_level < 0:
        raise DomainError("derivative level must be nonnegative")
    index = {k: j for j, k in enumerate(basis.keys)}
    out: list = [0.0] * len(basis)
    bad = [k for k in ic.items if k not in index]
    if bad:
        raise NotInBasisError(
            "initial data has components outside the basis: " + ", ".join(render_key(k) for k in bad),
            tuple(bad),
        )
    for key, c in ic.items.items():
        j = index[key]
        v = c / exactify(basis.elements[j].coeff)
        out[j] = float(v) if isinstance(v, Fraction) else v
    return tuple(out)
