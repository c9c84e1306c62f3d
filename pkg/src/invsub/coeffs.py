"""Sparse multivariate polynomials and rational functions in symbols k_0..k_n.

Coefficients stay :class:`fractions.Fraction` while every input is rational
and degrade to ``float`` as soon as a Gamma value enters.  Float sums that
cancel to within ``ZERO_RTOL`` of their operands are treated as exact zeros,
so an invariance verdict never hinges on rounding noise.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Number
from typing import Mapping, Sequence, Union

from .errors import DivisionBySymbolicZero

__all__ = ["Poly", "CoeffRational", "Scalar", "format_scalar", "exactify"]

Scalar = Union[Fraction, float]
Exps = tuple  # sorted tuple of (variable index, exponent) pairs, exponents > 0

ZERO_RTOL = 1e-12


def _coerce(c) -> Scalar:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, bool):
        return Fraction(int(c))
    if isinstance(c, int):
        return Fraction(c)
    return float(c)


def _add_scalar(x: Scalar, y: Scalar) -> Scalar:
    r = x + y
    if isinstance(r, float) and abs(r) <= ZERO_RTOL * max(abs(x), abs(y)):
        return 0.0
    return r


def _is_zero_scalar(c: Scalar) -> bool:
    return c == 0


def format_scalar(c: Scalar) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return format(c, ".12g")


def _mul_exps(a: Exps, b: Exps) -> Exps:
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted((v, e) for v, e in d.items() if e))


def _grlex_key(exps: Exps) -> tuple:
    # graded lexicographic: higher total degree first, then lex on k_0, k_1, ...
    deg = sum(e for _, e in exps)
    dense = dict(exps)
    width = max((v for v, _ in exps), default=-1) + 1
    return (-deg, tuple(-dense.get(i, 0) for i in range(width)))


class Poly:
    """Immutable sparse polynomial ``{exps: coeff}``."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Exps, Scalar] | None = None) -> None:
        clean: dict[Exps, Scalar] = {}
        for exps, c in (terms or {}).items():
            c = _coerce(c)
            if not _is_zero_scalar(c):
                clean[tuple(sorted(exps))] = c
        self._terms = clean
        self._hash: int | None = None

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(): c})

    @classmethod
    def var(cls, i: int, power: int = 1) -> "Poly":
        return cls({((i, power),): 1})

    @property
    def terms(self) -> Mapping[Exps, Scalar]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not exps for exps in self._terms)

    def constant_value(self) -> Scalar:
        return self._terms.get((), Fraction(0))

    def variables(self) -> set[int]:
        return {v for exps in self._terms for v, _ in exps}

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def sorted_terms(self) -> list[tuple[Exps, Scalar]]:
        return sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]))

    def leading(self) -> tuple[Exps, Scalar]:
        return self.sorted_terms()[0]

    def __add__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.const(other)
        out = dict(self._terms)
        for exps, c in other._terms.items():
            if exps in out:
                r = _add_scalar(out[exps], c)
                if _is_zero_scalar(r):
                    del out[exps]
                else:
                    out[exps] = r
            else:
                out[exps] = c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly({e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = _coerce(other)
            return Poly({e: v * c for e, v in self._terms.items()})
        acc: dict[Exps, Scalar] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = _mul_exps(e1, e2)
                prod = c1 * c2
                if e in acc:
                    acc[e] = _add_scalar(acc[e], prod)
                else:
                    acc[e] = prod
        return Poly(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative polynomial power")
        out = Poly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def evaluate(self, values: Sequence[float]) -> float:
        total = 0.0
        for exps, c in self._terms.items():
            term = float(c)
            for v, e in exps:
                term *= values[v] ** e
            total += term
        return total

    def max_abs_coeff(self) -> float:
        return max((abs(float(c)) for c in self._terms.values()), default=0.0)

    def min_exponents(self) -> Exps:
        """Exponents of the monomial gcd of all terms."""
        if not self._terms:
            return ()
        it = iter(self._terms)
        common = dict(next(it))
        for exps in it:
            d = dict(exps)
            common = {v: min(e, d.get(v, 0)) for v, e in common.items()}
        return tuple(sorted((v, e) for v, e in common.items() if e))

    def divide_monomial(self, exps: Exps) -> "Poly":
        out = {}
        for e, c in self._terms.items():
            d = dict(e)
            for v, p in exps:
                d[v] = d[v] - p
            out[tuple(sorted((v, x) for v, x in d.items() if x))] = c
        return Poly(out)

    def render(self, symbol: str = "k") -> str:
        if not self._terms:
            return "0"
        parts = []
        for exps, c in self.sorted_terms():
            factors = [f"{symbol}{v}" + (f"^{e}" if e != 1 else "") for v, e in exps]
            if not factors:
                parts.append(format_scalar(c))
            elif c == 1:
                parts.append("*".join(factors))
            elif c == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(format_scalar(c) + "*" + "*".join(factors))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"Poly({self.render()})"


class CoeffRational:
    """Rational function ``num/den`` with a monic (graded-lex leading) denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None) -> None:
        if den is None:
            den = Poly.const(1)
        if den.is_zero():
            raise DivisionBySymbolicZero("rational coefficient with zero denominator")
        if num.is_zero():
            den = Poly.const(1)
        elif den.is_monomial() and not den.is_constant():
            # monomial denominators: cancel the shared monomial factor
            common = tuple(
                (v, min(e, dict(num.min_exponents()).get(v, 0))) for v, e in next(iter(den.terms))
            )
            common = tuple((v, e) for v, e in common if e)
            if common:
                num = num.divide_monomial(common)
                den = den.divide_monomial(common)
        _, lead = den.leading()
        if lead != 1:
            inv = 1 / lead
            num = num * inv
            den = den * inv
        self.num = num
        self.den = den

    @classmethod
    def const(cls, c) -> "CoeffRational":
        return cls(Poly.const(c))

    @classmethod
    def var(cls, i: int) -> "CoeffRational":
        return cls(Poly.var(i))

    @staticmethod
    def _lift(other) -> "CoeffRational":
        if isinstance(other, CoeffRational):
            return other
        if isinstance(other, Poly):
            return CoeffRational(other)
        if isinstance(other, Number):
            return CoeffRational.const(other)
        return NotImplemented

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Scalar:
        return self.num.constant_value() / self.den.constant_value()

    def variables(self) -> set[int]:
        return self.num.variables() | self.den.variables()

    def __add__(self, other) -> "CoeffRational":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return CoeffRational(self.num + other.num, self.den)
        return CoeffRational(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "CoeffRational":
        return CoeffRational(-self.num, self.den)

    def __sub__(self, other) -> "CoeffRational":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "CoeffRational":
        return (-self) + other

    def __mul__(self, other) -> "CoeffRational":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return CoeffRational(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "CoeffRational":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self * other.reciprocal()

    def __pow__(self, n: int) -> "CoeffRational":
        if n >= 0:
            return CoeffRational(self.num**n, self.den**n)
        return self.reciprocal() ** (-n)

    def reciprocal(self) -> "CoeffRational":
        if self.num.is_zero():
            raise DivisionBySymbolicZero("reciprocal of the zero polynomial")
        return CoeffRational(self.den, self.num)

    def __eq__(self, other) -> bool:
        other = self._lift(other)
        if other is NotImplemented:
            return False
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def evaluate(self, values: Sequence[float]) -> float:
        return self.num.evaluate(values) / self.den.evaluate(values)

    def denominator_value(self, values: Sequence[float]) -> float:
        return self.den.evaluate(values)

    def max_abs_coeff(self) -> float:
        return self.num.max_abs_coeff()

    def render(self, symbol: str = "k") -> str:
        if self.is_polynomial():
            return self.num.render(symbol)
        return f"({self.num.render(symbol)})/({self.den.render(symbol)})"

    def __repr__(self) -> str:
        return f"CoeffRational({self.render()})"


def exactify(v) -> Scalar:
    """Keep short binary fractions (0.5, -1.0, 6.0, ...) exact; anything else stays float."""
    if isinstance(v, Fraction):
        return v
    fr = Fraction(float(v))
    return fr if fr.denominator <= 2**20 and abs(fr.numerator) <= 2**53 else float(v)
