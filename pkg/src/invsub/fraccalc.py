"""Closed function algebra in one variable and fractional calculus on it.

Two families are handled:

* :class:`FuncExpr` in the space variable, finite sums of
  ``c * x^g * prod E_{b}(l * x^b)^m``;
* :class:`TimeExpr` in the time variable, finite sums of
  ``c * t^g * E^{(n)}_{a,b}(l * t^a)`` plus truncated k-indexed series
  (:class:`TimeSeries`).

All fractional operators have lower limit 0.  The symbolic power rule
``t^g -> Gamma(g+1)/Gamma(g-a+1) t^(g-a)`` is applied for every ``g > -1``
outside the Caputo kernel ``{0, .., ceil(a)-1}``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, replace
from typing import Any, Iterable, Sequence

import numpy as np

from .coeffs import CoeffRational, exactify
from .errors import ConvergenceError, DomainError, UnsupportedTermError
from .specfun import MLParams, gamma_ratio, ml_deriv, ml_deriv_array, _ml_log_coeff

__all__ = [
    "snap",
    "MLFactor",
    "Monomial",
    "FuncExpr",
    "MLSpec",
    "TimeTerm",
    "TimeSeries",
    "TimeExpr",
    "caputo_x",
    "caputo_t",
    "frac_integral_t",
    "eval_x",
    "eval_t",
    "caputo_num",
    "caputo_num_all",
    "caputo_l1_mesh",
    "render_func",
    "render_time",
]

PRUNE_RTOL = 1e-14
INT_ATOL = 1e-12
SNAP_ATOL = 1e-11

_snap_lock = threading.Lock()
_snap_table: dict[int, float] = {}


def snap(v: float) -> float:
    """Canonical representative of a real exponent or parameter.

    Values within ``INT_ATOL`` of an integer become that integer.  Otherwise
    the first value seen within ``SNAP_ATOL`` is reused, so that exponents
    produced by different arithmetic routes (``2b - b`` versus ``b``) share
    one key.  Rounding to a fixed number of digits cannot do this: it does
    not commute with subtraction.
    """
    v = float(v)
    r = round(v)
    if abs(v - r) <= INT_ATOL:
        return float(r) if r != 0 else 0.0
    bucket = round(v / SNAP_ATOL)
    with _snap_lock:
        for b in (bucket, bucket - 1, bucket + 1):
            rep = _snap_table.get(b)
            if rep is not None and abs(rep - v) <= SNAP_ATOL:
                return rep
        _snap_table[bucket] = v
    return v


def _is_int(v: float) -> bool:
    return abs(v - round(v)) <= INT_ATOL


def _kernel_size(order: float) -> int:
    # powers 0..ceil(order)-1 are annihilated by the Caputo derivative
    return math.ceil(order - INT_ATOL)


def _coeff_is_zero(c) -> bool:
    if isinstance(c, CoeffRational):
        return c.is_zero()
    return c == 0


def _coeff_mag(c) -> float:
    if isinstance(c, CoeffRational):
        return c.max_abs_coeff()
    return abs(float(c))


def _prune(items: dict) -> dict:
    floats = [abs(float(c)) for c in items.values() if not isinstance(c, CoeffRational)]
    cut = PRUNE_RTOL * max(floats, default=0.0)
    out = {}
    for key, c in items.items():
        if _coeff_is_zero(c):
            continue
        if not isinstance(c, CoeffRational) and abs(float(c)) < cut:
            continue
        out[key] = c
    return out


# ---------------------------------------------------------------- space side


@dataclass(frozen=True, order=True)
class MLFactor:
    """``E_{order,1}(rate * x^order) ** mult``."""

    order: float
    rate: float
    mult: int = 1


def _canonical_ml(factors: Iterable[MLFactor | tuple]) -> tuple[MLFactor, ...]:
    acc: dict[tuple[float, float], int] = {}
    for f in factors:
        if not isinstance(f, MLFactor):
            f = MLFactor(*f)
        if not f.order > 0:
            raise DomainError(f"Mittag-Leffler factor order must be positive, got {f.order}")
        k = (snap(f.order), snap(f.rate))
        acc[k] = acc.get(k, 0) + int(f.mult)
    return tuple(MLFactor(o, r, m) for (o, r), m in sorted(acc.items()) if m)


@dataclass(frozen=True)
class Monomial:
    """``coeff * x^power * prod E_{order}(rate x^order)^mult``."""

    coeff: Any
    power: float
    ml_factors: tuple[MLFactor, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "power", snap(self.power))
        object.__setattr__(self, "ml_factors", _canonical_ml(self.ml_factors))

    @property
    def key(self) -> tuple:
        return (self.power, tuple((f.order, f.rate, f.mult) for f in self.ml_factors))

    @classmethod
    def from_key(cls, key: tuple, coeff: Any = 1.0) -> "Monomial":
        power, mls = key
        return cls(coeff, power, tuple(MLFactor(*m) for m in mls))


CONST_KEY = (0.0, ())


class FuncExpr:
    """Canonical finite sum of monomials, keyed by ``(power, ml_factors)``."""

    __slots__ = ("_items",)

    def __init__(self, items: dict | None = None) -> None:
        self._items = dict(sorted(_prune(items or {}).items()))

    @classmethod
    def from_terms(cls, terms: Iterable[Monomial]) -> "FuncExpr":
        acc: dict = {}
        for m in terms:
            k = m.key
            acc[k] = acc[k] + m.coeff if k in acc else m.coeff
        return cls(acc)

    @classmethod
    def const(cls, c) -> "FuncExpr":
        return cls({CONST_KEY: c})

    @classmethod
    def power(cls, gamma: float, coeff=1.0) -> "FuncExpr":
        return cls.from_terms([Monomial(coeff, gamma)])

    @property
    def items(self) -> dict:
        return self._items

    @property
    def terms(self) -> list[Monomial]:
        return [Monomial.from_key(k, c) for k, c in self._items.items()]

    def keys(self) -> list[tuple]:
        return list(self._items)

    def coeff(self, key: tuple, default=0.0):
        return self._items.get(key, default)

    def is_zero(self) -> bool:
        return not self._items

    def is_constant(self) -> bool:
        return all(k == CONST_KEY for k in self._items)

    def constant_value(self):
        return self._items.get(CONST_KEY, 0.0)

    def canonical(self) -> "FuncExpr":
        return FuncExpr(self._items)

    def __add__(self, other) -> "FuncExpr":
        if not isinstance(other, FuncExpr):
            other = FuncExpr.const(other)
        acc = dict(self._items)
        for k, c in other._items.items():
            acc[k] = acc[k] + c if k in acc else c
        return FuncExpr(acc)

    __radd__ = __add__

    def __neg__(self) -> "FuncExpr":
        return FuncExpr({k: -c for k, c in self._items.items()})

    def __sub__(self, other) -> "FuncExpr":
        return self + (-other)

    def scale(self, s) -> "FuncExpr":
        return FuncExpr({k: c * s for k, c in self._items.items()})

    def __mul__(self, other) -> "FuncExpr":
        if not isinstance(other, FuncExpr):
            return self.scale(other)
        acc: dict = {}
        for m1 in self.terms:
            for m2 in other.terms:
                prod = Monomial(m1.coeff * m2.coeff, m1.power + m2.power, m1.ml_factors + m2.ml_factors)
                k = prod.key
                acc[k] = acc[k] + prod.coeff if k in acc else prod.coeff
        return FuncExpr(acc)

    def __rmul__(self, other) -> "FuncExpr":
        return self.scale(other)

    def __pow__(self, n: int) -> "FuncExpr":
        if n < 0:
            raise DomainError("negative integer powers are not in the function family")
        if n == 0:
            return FuncExpr.const(1.0)
        out = self
        for _ in range(n - 1):
            out = out * self
        return out

    def map_coeffs(self, fn) -> "FuncExpr":
        return FuncExpr({k: fn(c) for k, c in self._items.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, FuncExpr) and self._items == other._items

    def __hash__(self) -> int:
        return hash(tuple(self._items.items()))

    def evaluate(self, xs) -> np.ndarray:
        """Vectorised :func:`eval_x` over an array of points."""
        xs = np.asarray(xs, dtype=float)
        if np.any(xs < 0):
            raise DomainError("space expressions are evaluated on x >= 0")
        total = np.zeros_like(xs)
        for (power, mls), c in self._items.items():
            if isinstance(c, CoeffRational):
                if not c.is_constant():
                    raise DomainError("cannot evaluate an expression with symbolic coefficients")
                c = c.constant_value()
            if power < 0 and np.any(xs == 0):
                raise DomainError(f"x^{power} is singular at x = 0")
            val = float(c) * np.power(xs, power)
            for order, rate, mult in mls:
                val = val * ml_deriv_array(0, order, 1.0, rate * xs**order) ** mult
            total = total + val
        return total

    def render(self) -> str:
        return render_func(self)

    def __repr__(self) -> str:
        return f"FuncExpr({self.render()})"


def caputo_x(expr: FuncExpr, order: float) -> FuncExpr:
    """Caputo derivative in x of the given order, applied term by term."""
    if not order > 0:
        raise DomainError(f"derivative order must be positive, got {order}")
    kernel = _kernel_size(order)
    acc: dict = {}
    for (power, mls), c in expr.items.items():
        if not mls:
            if power <= -1:
                raise DomainError(f"power rule needs exponent > -1, got x^{power}")
            if _is_int(power) and round(power) < kernel:
                continue
            ratio = gamma_ratio(power + 1.0, power - order + 1.0)
            if ratio == 0.0:
                continue
            k = (snap(power - order), ())
            val = c * ratio
        elif len(mls) == 1 and mls[0][2] == 1 and power == 0.0 and abs(mls[0][0] - order) <= INT_ATOL:
            # E_b(l x^b) is an eigenfunction of the order-b derivative
            k = (0.0, mls)
            val = c * exactify(mls[0][1])
        else:
            raise UnsupportedTermError(
                f"order-{order} derivative of {render_func(FuncExpr({(power, mls): 1.0}))} "
                "is outside the supported family"
            )
        acc[k] = acc[k] + val if k in acc else val
    return FuncExpr(acc)


def eval_x(expr: FuncExpr, x: float) -> float:
    """Evaluate a space expression with numeric coefficients at ``x >= 0``."""
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    total = 0.0
    for (power, mls), c in expr.items.items():
        if isinstance(c, CoeffRational):
            if not c.is_constant():
                raise DomainError("cannot evaluate an expression with symbolic coefficients")
            c = c.constant_value()
        if x == 0 and power < 0:
            raise DomainError(f"x^{power} is singular at x = 0")
        val = float(c) * (x**power if power != 0 else 1.0)
        for order, rate, mult in mls:
            val *= ml_deriv(0, MLParams(order, 1.0), rate * x**order) ** mult
        total += val
    return total


# ----------------------------------------------------------------- time side


@dataclass(frozen=True, order=True)
class MLSpec:
    """``E^{(n)}_{a,b}(rate * t^a)``."""

    n: int
    a: float
    b: float
    rate: float

    def __post_init__(self) -> None:
        if self.n < 0:
            raise DomainError("Mittag-Leffler derivative index must be nonnegative")
        if not self.a > 0:
            raise DomainError("Mittag-Leffler order must be positive")
        object.__setattr__(self, "a", snap(self.a))
        object.__setattr__(self, "b", snap(self.b))
        object.__setattr__(self, "rate", snap(self.rate))


@dataclass(frozen=True)
class TimeTerm:
    """``coeff * t^power`` optionally times ``E^{(n)}_{a,b}(rate * t^a)``."""

    coeff: float
    power: float
    ml: MLSpec | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "power", snap(self.power))

    @property
    def key(self) -> tuple:
        return (self.power, () if self.ml is None else (self.ml.n, self.ml.a, self.ml.b, self.ml.rate))


@dataclass(frozen=True)
class TimeSeries:
    """Truncated series ``front * sum_k ratio^k/k! * t^(p+q k) * E^{(k+offset)}_{a, b0+r k}(rate t^a)``."""

    front: float
    ratio: float
    p: float
    q: float
    a: float
    b0: float
    r: float
    rate: float
    offset: int = 0
    kmax: int = 40

    def __post_init__(self) -> None:
        if not self.q > 0:
            raise DomainError("series power stride must be positive")
        if self.kmax < 10:
            raise DomainError("series truncation must keep at least 10 terms")

    def scaled(self, s: float) -> "TimeSeries":
        return replace(self, front=self.front * s)

    @property
    def key(self) -> tuple:
        return (self.ratio, self.p, self.q, self.a, self.b0, self.r, self.rate, self.offset, self.kmax)

    def is_eps_form(self) -> bool:
        """True when every term is t^(a m + b - 1) E^{(m)}_{a,b}, so d/dt lowers b by one."""
        return (
            abs(self.p - (self.a * self.offset + self.b0 - 1.0)) <= 1e-12
            and abs(self.q - (self.a + self.r)) <= 1e-12
        )


def _merge_series(series: Iterable[TimeSeries]) -> tuple[TimeSeries, ...]:
    acc: dict[tuple, TimeSeries] = {}
    for s in series:
        if s.front == 0:
            continue
        if s.key in acc:
            acc[s.key] = replace(acc[s.key], front=acc[s.key].front + s.front)
        else:
            acc[s.key] = s
    return tuple(v for k, v in sorted(acc.items()) if v.front != 0)


class TimeExpr:
    """Closed-form time profile: merged :class:`TimeTerm` sum plus series blocks."""

    __slots__ = ("_terms", "_series")

    def __init__(self, terms: Iterable[TimeTerm] = (), series: Iterable[TimeSeries] = ()) -> None:
        acc: dict[tuple, float] = {}
        mls: dict[tuple, MLSpec | None] = {}
        for t in terms:
            acc[t.key] = acc.get(t.key, 0.0) + t.coeff
            mls[t.key] = t.ml
        acc = _prune(acc)
        self._terms = tuple(TimeTerm(c, k[0], mls[k]) for k, c in sorted(acc.items()))
        self._series = _merge_series(series)

    @classmethod
    def const(cls, c: float) -> "TimeExpr":
        return cls([TimeTerm(float(c), 0.0)])

    @classmethod
    def power(cls, c: float, gamma: float) -> "TimeExpr":
        return cls([TimeTerm(float(c), gamma)])

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> "TimeExpr":
        """sum_i coeffs[i] t^i / i!"""
        return cls([TimeTerm(float(c) / math.factorial(i), float(i)) for i, c in enumerate(coeffs)])

    @property
    def terms(self) -> tuple[TimeTerm, ...]:
        return self._terms

    @property
    def series(self) -> tuple[TimeSeries, ...]:
        return self._series

    def is_zero(self) -> bool:
        return not self._terms and not self._series

    def is_pure_power(self) -> bool:
        return not self._series and all(t.ml is None for t in self._terms)

    def is_constant(self) -> bool:
        return not self._series and all(t.ml is None and t.power == 0 for t in self._terms)

    def constant_value(self) -> float:
        if not self.is_constant():
            raise DomainError("time expression is not constant")
        return self._terms[0].coeff if self._terms else 0.0

    def coefficient_map(self) -> dict[tuple, float]:
        return {t.key: t.coeff for t in self._terms}

    def __add__(self, other) -> "TimeExpr":
        if not isinstance(other, TimeExpr):
            other = TimeExpr.const(other)
        return TimeExpr(self._terms + other._terms, self._series + other._series)

    __radd__ = __add__

    def scale(self, s: float) -> "TimeExpr":
        s = float(s)
        return TimeExpr(
            [TimeTerm(t.coeff * s, t.power, t.ml) for t in self._terms],
            [x.scaled(s) for x in self._series],
        )

    def __neg__(self) -> "TimeExpr":
        return self.scale(-1.0)

    def __sub__(self, other) -> "TimeExpr":
        return self + (-other)

    def __mul__(self, other) -> "TimeExpr":
        if not isinstance(other, TimeExpr):
            return self.scale(other)
        if self.is_constant():
            return other.scale(self.constant_value())
        if other.is_constant():
            return self.scale(other.constant_value())
        if self._series or other._series:
            raise UnsupportedTermError("products of series profiles are not in the time family")
        out = []
        for t1 in self._terms:
            for t2 in other._terms:
                if t1.ml is not None and t2.ml is not None:
                    raise UnsupportedTermError("product of two Mittag-Leffler time factors")
                out.append(TimeTerm(t1.coeff * t2.coeff, t1.power + t2.power, t1.ml or t2.ml))
        return TimeExpr(out)

    def __rmul__(self, other) -> "TimeExpr":
        return self.scale(other)

    def __pow__(self, n: int) -> "TimeExpr":
        if n < 0:
            return self.reciprocal() ** (-n)
        out = TimeExpr.const(1.0)
        for _ in range(n):
            out = out * self
        return out

    def reciprocal(self) -> "TimeExpr":
        if self._series or len(self._terms) != 1 or self._terms[0].ml is not None:
            raise UnsupportedTermError("only a single power term has a reciprocal in the time family")
        t = self._terms[0]
        if t.coeff == 0:
            raise DomainError("reciprocal of zero")
        return TimeExpr([TimeTerm(1.0 / t.coeff, -t.power)])

    def derivative(self, m: int = 1) -> "TimeExpr":
        """Integer-order derivative, exact term by term."""
        out = self
        for _ in range(m):
            out = out._derivative1()
        return out

    def _derivative1(self) -> "TimeExpr":
        new_terms = []
        for t in self._terms:
            if t.power != 0:
                new_terms.append(TimeTerm(t.coeff * t.power, t.power - 1.0, t.ml))
            if t.ml is not None and t.ml.rate != 0:
                m = t.ml
                new_terms.append(
                    TimeTerm(t.coeff * m.rate * m.a, t.power + m.a - 1.0, MLSpec(m.n + 1, m.a, m.b, m.rate))
                )
        new_series = []
        for s in self._series:
            if not s.is_eps_form():
                raise UnsupportedTermError("series block is not of eps_n form; no termwise derivative")
            new_series.append(replace(s, p=s.p - 1.0, b0=s.b0 - 1.0))
        return TimeExpr(new_terms, new_series)

    def evaluate(self, ts, series_tol: float = 1e-14) -> np.ndarray:
        """Vectorised evaluation; raises :class:`ConvergenceError` if a series is cut short."""
        ts = np.asarray(ts, dtype=float)
        if np.any(ts < 0):
            raise DomainError("time expressions are evaluated on t >= 0")
        total = np.zeros_like(ts)
        for t in self._terms:
            total = total + t.coeff * _time_factor(ts, t.power, t.ml)
        for s in self._series:
            total = total + _eval_series(s, ts, series_tol)[0]
        return total

    def __eq__(self, other) -> bool:
        return isinstance(other, TimeExpr) and self._terms == other._terms and self._series == other._series

    def __hash__(self) -> int:
        return hash((self._terms, self._series))

    def render(self) -> str:
        return render_time(self)

    def __repr__(self) -> str:
        return f"TimeExpr({self.render()})"


def _ml_limit_at_zero(gamma: float, m: MLSpec) -> float:
    """Value of t^gamma E^{(n)}_{a,b}(rate t^a) at t = 0 from its leading series term."""
    for j in range(64):
        lc, sg = _ml_log_coeff(j, m.n, m.a, m.b)
        if sg == 0:
            continue
        if m.rate == 0 and j > 0:
            return 0.0
        e = gamma + m.a * j
        if abs(e) <= 1e-12:
            return sg * math.exp(lc) * m.rate**j
        if e > 0:
            return 0.0
        raise DomainError(f"time term with exponent {gamma} is singular at t = 0")
    return 0.0


def _time_factor(ts: np.ndarray, gamma: float, m: MLSpec | None) -> np.ndarray:
    out = np.empty_like(ts)
    zero = ts == 0
    pos = ~zero
    if m is None:
        if zero.any():
            if gamma < 0:
                raise DomainError(f"t^{gamma} is singular at t = 0")
            out[zero] = 1.0 if gamma == 0 else 0.0
        out[pos] = ts[pos] ** gamma
        return out
    if zero.any():
        out[zero] = _ml_limit_at_zero(gamma, m)
    tp = ts[pos]
    out[pos] = tp**gamma * ml_deriv_array(m.n, m.a, m.b, m.rate * tp**m.a)
    return out


def _eval_series(s: TimeSeries, ts: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    total = np.zeros_like(ts)
    tiny = np.zeros(ts.shape, dtype=int)
    done = np.zeros(ts.shape, dtype=bool)
    last = np.zeros_like(ts)
    for k in range(s.kmax + 1):
        c = s.front * s.ratio**k / math.factorial(k)
        if c == 0:
            term = np.zeros_like(ts)
        else:
            spec = MLSpec(k + s.offset, s.a, s.b0 + s.r * k, s.rate)
            term = c * _time_factor(ts, s.p + s.q * k, spec)
        term = np.where(done, 0.0, term)
        total = total + term
        small = np.abs(term) <= tol * np.abs(total)
        tiny = np.where(small, tiny + 1, 0)
        last = np.where(done, last, np.abs(term))
        done |= tiny >= 3
        if done.all():
            return total, last
    raise ConvergenceError(f"series block did not reach tolerance {tol} within {s.kmax} terms")


@dataclass(frozen=True)
class TimeValue:
    value: float
    error: float


def eval_t(expr: TimeExpr, t: float, series_tol: float = 1e-14) -> TimeValue:
    """Evaluate a time profile at one point with a truncation-error estimate."""
    ts = np.array([float(t)])
    value = 0.0
    err = 0.0
    for term in expr.terms:
        value += term.coeff * float(_time_factor(ts, term.power, term.ml)[0])
    for s in expr.series:
        v, e = _eval_series(s, ts, series_tol)
        value += float(v[0])
        err += float(e[0])
    return TimeValue(value, err)


def _require_pure_power(expr: TimeExpr, what: str) -> None:
    if not expr.is_pure_power():
        raise UnsupportedTermError(f"{what} is defined symbolically on pure powers only")


def caputo_t(expr: TimeExpr, order: float) -> TimeExpr:
    """Caputo derivative in t of a pure-power profile (power rule)."""
    if not order > 0:
        raise DomainError(f"derivative order must be positive, got {order}")
    _require_pure_power(expr, "caputo_t")
    kernel = _kernel_size(order)
    out = []
    for t in expr.terms:
        if t.power <= -1:
            raise DomainError(f"power rule needs exponent > -1, got t^{t.power}")
        if _is_int(t.power) and round(t.power) < kernel:
            continue
        ratio = gamma_ratio(t.power + 1.0, t.power - order + 1.0)
        if ratio != 0.0:
            out.append(TimeTerm(t.coeff * ratio, t.power - order))
    return TimeExpr(out)


def frac_integral_t(expr: TimeExpr, order: float) -> TimeExpr:
    """Riemann-Liouville integral of a pure-power profile."""
    if not order > 0:
        raise DomainError(f"integral order must be positive, got {order}")
    _require_pure_power(expr, "frac_integral_t")
    out = []
    for t in expr.terms:
        if t.power <= -1:
            raise DomainError(f"fractional integral needs exponent > -1, got t^{t.power}")
        out.append(TimeTerm(t.coeff * gamma_ratio(t.power + 1.0, t.power + order + 1.0), t.power + order))
    return TimeExpr(out)


# ------------------------------------------------------------ numerical Caputo


def _l1_weights(n: int, order: float) -> np.ndarray:
    j = np.arange(n, dtype=float)
    return (j + 1.0) ** (1.0 - order) - j ** (1.0 - order)


def caputo_num_all(
    samples: Sequence[float],
    order: float,
    dt: float,
    dsamples: Sequence[float] | None = None,
) -> np.ndarray:
    """Caputo derivative at every node of a uniform grid starting at t = 0.

    Orders in (0, 1) use the L1 scheme.  Orders in (1, 2) apply L1 of order
    ``order - 1`` to nodal first derivatives: the supplied *dsamples* when
    given, otherwise second-order finite differences of *samples*.
    """
    g = np.asarray(samples, dtype=float)
    if g.ndim != 1 or g.size < 32:
        raise DomainError("numerical Caputo derivative needs at least 32 grid points")
    if not dt > 0:
        raise DomainError("grid step must be positive")
    if 0 < order < 1:
        d = np.diff(g)
        b = _l1_weights(d.size, order)
        out = np.zeros_like(g)
        out[1:] = np.convolve(b, d)[: d.size] * dt ** (-order) / math.gamma(2.0 - order)
        return out
    if 1 < order < 2:
        v = np.asarray(dsamples, dtype=float) if dsamples is not None else np.gradient(g, dt, edge_order=2)
        return caputo_num_all(v, order - 1.0, dt)
    raise DomainError(f"numerical Caputo derivative supports orders in (0,1) or (1,2), got {order}")


def caputo_l1_mesh(mesh: Sequence[float], samples: Sequence[float], order: float) -> np.ndarray:
    """L1 Caputo derivative of order in (0, 1) at every node of an increasing mesh starting at 0."""
    t = np.asarray(mesh, dtype=float)
    g = np.asarray(samples, dtype=float)
    if t.ndim != 1 or t.shape != g.shape or t.size < 2:
        raise DomainError("mesh and samples must be 1-d arrays of equal length")
    if t[0] != 0 or np.any(np.diff(t) <= 0):
        raise DomainError("mesh must start at 0 and increase strictly")
    if not 0 < order < 1:
        raise DomainError(f"L1 mesh scheme supports orders in (0,1), got {order}")
    slope = np.diff(g) / np.diff(t)
    e = 1.0 - order
    lag = np.maximum(t[:, None] - t[None, :], 0.0) ** e  # (t_n - t_k)^(1-a), zero for k >= n
    w = lag[:, :-1] - lag[:, 1:]
    return w @ slope / math.gamma(2.0 - order)


def caputo_num(
    samples: Sequence[float],
    order: float,
    t_index: int,
    dt: float,
    dsamples: Sequence[float] | None = None,
) -> float:
    """Caputo derivative of sampled data at grid index *t_index* (see :func:`caputo_num_all`)."""
    g = np.asarray(samples, dtype=float)
    if not 1 <= t_index < g.size:
        raise DomainError(f"t_index must lie in [1, {g.size - 1}], got {t_index}")
    return float(caputo_num_all(g, order, dt, dsamples)[t_index])


# ------------------------------------------------------------------ rendering


def _fmt_coeff(c) -> str:
    if isinstance(c, CoeffRational):
        return f"({c.render()})"
    return f"{float(c):.10f}"


def render_func(expr: FuncExpr, symbol: str = "k") -> str:
    """Deterministic text form, e.g. ``3.0000000000*x^1.5000 + 1.0000000000*ML[b=0.7500,l=-1.0000]``."""
    if expr.is_zero():
        return "0"
    parts = []
    for (power, mls), c in expr.items.items():
        if isinstance(c, CoeffRational):
            factors = [f"({c.render(symbol)})"]
        else:
            factors = [_fmt_coeff(c)]
        if power != 0:
            factors.append(f"x^{power:.4f}")
        for order, rate, mult in mls:
            f = f"ML[b={order:.4f},l={rate:.4f}]"
            factors.append(f if mult == 1 else f"{f}^{mult}")
        parts.append("*".join(factors))
    return " + ".join(parts)


def render_time(expr: TimeExpr) -> str:
    if expr.is_zero():
        return "0"
    parts = []
    for t in expr.terms:
        factors = [_fmt_coeff(t.coeff)]
        if t.power != 0:
            factors.append(f"t^{t.power:.4f}")
        if t.ml is not None:
            m = t.ml
            head = "E" if m.n == 0 else f"E^({m.n})"
            factors.append(f"{head}[a={m.a:.4f},b={m.b:.4f},l={m.rate:.4f}]")
        parts.append("*".join(factors))
    for s in expr.series:
        parts.append(
            f"{_fmt_coeff(s.front)}*SERIES[ratio={s.ratio:.4f},p={s.p:.4f},q={s.q:.4f},"
            f"a={s.a:.4f},b0={s.b0:.4f},r={s.r:.4f},l={s.rate:.4f},o={s.offset},K={s.kmax}]"
        )
    return " + ".join(parts)
