"""Real-valued special functions: Gamma, Mittag-Leffler and the eps_n family.

Gamma comes from :mod:`math` with an explicit pole check.  Mittag-Leffler functions are summed from
their power series with Neumaier compensation; no asymptotic expansions are
used, so arguments are expected to stay at desk scale (``|z| <~ 30``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError, PoleError

__all__ = [
    "MLParams",
    "EpsParams",
    "is_pole",
    "gamma_real",
    "log_gamma",
    "rgamma",
    "gamma_ratio",
    "ml",
    "ml_deriv",
    "ml_deriv_array",
    "eps_fn",
    "laplace_quadrature",
    "QuadratureResult",
]

POLE_ATOL = 1e-12
SERIES_RTOL = 1e-16
CANCELLATION_RTOL = 1e-8
_EPS = 2.220446049250313e-16
SERIES_MAX_TERMS = 10_000
_TINY_RUN = 3

@dataclass(frozen=True)
class MLParams:
    """Parameters ``(a, b)`` of the two-parameter function E_{a,b}."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise DomainError(f"Mittag-Leffler order must be positive, got {self.a}")


@dataclass(frozen=True)
class EpsParams:
    """Parameters of eps_n(t, a; alpha, beta) = t^(alpha*n+beta-1) E^(n)(sign*a*t^alpha)."""

    n: int
    a: float
    alpha: float
    beta: float
    sign: int = -1

    def __post_init__(self) -> None:
        if self.n < 0 or int(self.n) != self.n:
            raise DomainError(f"derivative index must be a nonnegative integer, got {self.n}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.sign not in (1, -1):
            raise DomainError(f"sign must be +1 or -1, got {self.sign}")


def is_pole(x: float) -> bool:
    """True when *x* is a nonpositive integer up to ``POLE_ATOL``."""
    return x <= POLE_ATOL and abs(x - round(x)) <= POLE_ATOL


def _gamma_sign(x: float) -> int:
    # Gamma is positive on (0, inf) and alternates in sign between the poles
    if x > 0:
        return 1
    return -1 if math.floor(x) % 2 else 1


def gamma_real(x: float) -> float:
    """Gamma function on the real line (``math.gamma``), ``inf`` past overflow.

    Raises :class:`PoleError` at nonpositive integers.
    """
    x = float(x)
    if is_pole(x):
        raise PoleError(f"Gamma has a pole at {x}")
    try:
        return math.gamma(x)
    except OverflowError:
        return math.inf


def log_gamma(x: float) -> tuple[float, int]:
    """Return ``(log|Gamma(x)|, sign(Gamma(x)))``."""
    x = float(x)
    if is_pole(x):
        raise PoleError(f"Gamma has a pole at {x}")
    return math.lgamma(x), _gamma_sign(x)


def rgamma(x: float) -> float:
    """Reciprocal Gamma, exactly zero at the poles."""
    if is_pole(x):
        return 0.0
    if x > 171.0:
        lg, sg = log_gamma(x)
        return sg * math.exp(-lg)
    return 1.0 / gamma_real(x)


def gamma_ratio(p: float, q: float) -> float:
    """Gamma(p) / Gamma(q), zero when *q* is a pole.

    Large arguments go through log-Gamma differences so that the ratio stays
    finite when both factors overflow.
    """
    if is_pole(p):
        raise PoleError(f"numerator Gamma({p}) has a pole")
    if is_pole(q):
        return 0.0
    if abs(p) < 150.0 and abs(q) < 150.0:
        return gamma_real(p) / gamma_real(q)
    lp, sp = log_gamma(p)
    lq, sq = log_gamma(q)
    return sp * sq * math.exp(lp - lq)


def _ml_log_coeff(k: int, n: int, a: float, b: float) -> tuple[float, int]:
    """log|c_k| and sign of c_k = (k+n)!/k! / Gamma(a*k + a*n + b); sign 0 marks a pole."""
    arg = a * (k + n) + b
    if is_pole(arg):
        return -math.inf, 0
    lg, sg = log_gamma(arg)
    lf = log_gamma(k + n + 1.0)[0] - log_gamma(k + 1.0)[0]
    return lf - lg, sg


def ml_deriv(n: int, p: MLParams, z: float) -> float:
    """n-th derivative of E_{a,b} at real *z* by its power series.

    The series is truncated once three consecutive terms fall below
    ``1e-16 * |partial sum|``; :class:`ConvergenceError` after 10,000 terms,
    on overflow, or when cancellation pushes the rounding error (estimated as
    ``eps * sum |term|``) above ``1e-8 * max(|sum|, 1)``.
    """
    if n < 0:
        raise DomainError(f"derivative index must be nonnegative, got {n}")
    if p.a == 1.0 and p.b == 1.0:
        # E_{1,1} = exp and so is every derivative; the alternating series
        # would lose ~e^(2|z|) ulps for z < 0
        if z > 709.0:
            raise ConvergenceError(f"Mittag-Leffler series overflows at z={z} (a=1, b=1)")
        return math.exp(z)
    return _ml_series(n, p, z)


def _ml_series(n: int, p: MLParams, z: float) -> float:
    a, b = p.a, p.b
    if z == 0.0:
        lc, sg = _ml_log_coeff(0, n, a, b)
        return 0.0 if sg == 0 else sg * math.exp(lc)
    logz = math.log(abs(z))
    zsign = -1 if z < 0 else 1
    total = 0.0
    comp = 0.0
    mass = 0.0
    tiny = 0
    for k in range(SERIES_MAX_TERMS):
        lc, sg = _ml_log_coeff(k, n, a, b)
        if sg == 0:
            term = 0.0
        else:
            e = lc + k * logz
            if e > 709.0:
                raise ConvergenceError(f"Mittag-Leffler series overflows at z={z} (a={a}, b={b})")
            term = sg * (zsign if k % 2 else 1) * math.exp(e)
        mass += abs(term)
        # Neumaier compensated summation
        s = total + term
        if abs(total) >= abs(term):
            comp += (total - s) + term
        else:
            comp += (term - s) + total
        total = s
        partial = total + comp
        if abs(term) < SERIES_RTOL * abs(partial):
            tiny += 1
            if tiny >= _TINY_RUN:
                if _EPS * mass > CANCELLATION_RTOL * max(abs(partial), 1.0):
                    raise ConvergenceError(
                        f"Mittag-Leffler series loses too many digits to cancellation at z={z} (a={a}, b={b})"
                    )
                return partial
        else:
            tiny = 0
    raise ConvergenceError(
        f"Mittag-Leffler series did not converge in {SERIES_MAX_TERMS} terms (z={z}, a={a}, b={b})"
    )


def ml(p: MLParams, z: float) -> float:
    """Two-parameter Mittag-Leffler function E_{a,b}(z)."""
    return ml_deriv(0, p, z)


def ml_deriv_array(n: int, a: float, b: float, z: np.ndarray) -> np.ndarray:
    """Vectorised :func:`ml_deriv` sharing one coefficient sequence over all *z*."""
    z = np.asarray(z, dtype=float)
    if a == 1.0 and b == 1.0:
        if np.any(z > 709.0):
            raise ConvergenceError("Mittag-Leffler series overflows (a=1, b=1)")
        return np.exp(z)
    flat = z.ravel()
    out = np.zeros_like(flat)
    lc0, sg0 = _ml_log_coeff(0, n, a, b)
    c0 = 0.0 if sg0 == 0 else sg0 * math.exp(lc0)
    zero = flat == 0.0
    out[zero] = c0
    live = ~zero
    if not live.any():
        return out.reshape(z.shape)
    zz = flat[live]
    logz = np.log(np.abs(zz))
    neg = zz < 0
    total = np.zeros_like(zz)
    comp = np.zeros_like(zz)
    mass = np.zeros_like(zz)
    tiny = np.zeros(zz.shape, dtype=int)
    done = np.zeros(zz.shape, dtype=bool)
    for k in range(SERIES_MAX_TERMS):
        lc, sg = _ml_log_coeff(k, n, a, b)
        if sg == 0:
            term = np.zeros_like(zz)
        else:
            e = lc + k * logz
            if np.any(e[~done] > 709.0):
                raise ConvergenceError(f"Mittag-Leffler series overflows (a={a}, b={b})")
            term = sg * np.exp(np.minimum(e, 709.0))
            if k % 2:
                term = np.where(neg, -term, term)
        term = np.where(done, 0.0, term)
        mass += np.abs(term)
        s = total + term
        comp += np.where(np.abs(total) >= np.abs(term), (total - s) + term, (term - s) + total)
        total = s
        partial = total + comp
        small = np.abs(term) < SERIES_RTOL * np.abs(partial)
        tiny = np.where(small, tiny + 1, 0)
        done |= tiny >= _TINY_RUN
        if done.all():
            if np.any(_EPS * mass > CANCELLATION_RTOL * np.maximum(np.abs(total + comp), 1.0)):
                raise ConvergenceError(f"Mittag-Leffler series loses too many digits to cancellation (a={a}, b={b})")
            out[live] = total + comp
            return out.reshape(z.shape)
    raise ConvergenceError(f"Mittag-Leffler series did not converge (a={a}, b={b})")


def eps_fn(e: EpsParams, t: float) -> float:
    """eps_n(t, a; alpha, beta) = t^(alpha*n+beta-1) * E^(n)_{alpha,beta}(sign*a*t^alpha)."""
    if t < 0:
        raise DomainError(f"eps_n is defined for t >= 0, got {t}")
    expo = e.alpha * e.n + e.beta - 1.0
    p = MLParams(e.alpha, e.beta)
    if t == 0:
        if expo > 0:
            return 0.0
        if expo == 0:
            return ml_deriv(e.n, p, 0.0)
        raise DomainError(f"eps_n is singular at t=0 (exponent {expo})")
    return t**expo * ml_deriv(e.n, p, e.sign * e.a * t**e.alpha)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float


def laplace_quadrature(
    f: Callable[[float], float],
    s: float,
    T: float,
    tol: float = 1e-10,
) -> QuadratureResult:
    """Approximate the Laplace transform of *f* at *s* by adaptive quadrature on [0, T].

    The tail beyond *T* is neglected; choose ``s*T >= 25``.
    """
    if not s > 0 or not T > 0:
        raise DomainError("Laplace quadrature needs s > 0 and T > 0")
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(
                lambda t: math.exp(-s * t) * f(t), 0.0, T, epsabs=tol, epsrel=tol, limit=400
            )
        except integrate.IntegrationWarning as exc:
            raise ConvergenceError(f"adaptive quadrature failed: {exc}") from exc
    return QuadratureResult(value, err)
