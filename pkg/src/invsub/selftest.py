"""Built-in invariant suites behind ``invsub selftest [module]``.

Each suite is a list of named checks returning ``(passed, detail)``.  The
suites only use the shipped dependencies; the test tree holds the heavier
oracles (extended precision, property-based sampling).
"""

from __future__ import annotations

import math
import time
from typing import Callable

import numpy as np

from . import specfun as sf
from .fdesolve import back_substitute, solve_sequential
from .fraccalc import FuncExpr, MLFactor, Monomial, TimeExpr, caputo_num_all, caputo_t, caputo_x
from .registry import REGISTRY
from .subspace import check_invariance, reduce
from .verify import GRID_TOL, residual_pde, residual_series

Check = Callable[[], tuple[bool, str]]


def _spec_exp() -> tuple[bool, str]:
    zs = np.linspace(-5, 5, 101)
    err = max(abs(sf.ml(sf.MLParams(1.0, 1.0), z) - math.exp(z)) / math.exp(z) for z in zs)
    return err <= 1e-12, f"max rel {err:.2e}"


def _spec_gamma() -> tuple[bool, str]:
    worst = 0.0
    for x in np.linspace(-5, 5, 2001):
        if min(abs(x - round(x)), abs(x + 1 - round(x + 1))) <= 1e-3 and round(x) <= 0:
            continue
        lhs, rhs = sf.gamma_real(x + 1), x * sf.gamma_real(x)
        worst = max(worst, abs(lhs - rhs) / abs(lhs))
    return worst <= 1e-12, f"max rel {worst:.2e}"


def _spec_deriv() -> tuple[bool, str]:
    # chained central differences: each derivative against the previous one
    h = 1e-5
    worst = 0.0
    for a, b, z in ((0.5, 1.0, 0.7), (0.8, 1.2, -1.5), (1.5, 2.0, 3.0), (2.5, 0.5, -4.0)):
        p = sf.MLParams(a, b)
        for n in range(1, 4):
            fd = (sf.ml_deriv(n - 1, p, z + h) - sf.ml_deriv(n - 1, p, z - h)) / (2 * h)
            exact = sf.ml_deriv(n, p, z)
            worst = max(worst, abs(fd - exact) / max(abs(exact), 1e-300))
    return worst <= 1e-6, f"max rel {worst:.2e}"


def _spec_laplace() -> tuple[bool, str]:
    worst = 0.0
    for n in (0, 1, 2):
        for a in (0.5, 0.8):
            e = sf.EpsParams(n, 1.0, a, 1.0, -1)
            for s in (4.0, 6.0):
                res = sf.laplace_quadrature(lambda t: sf.eps_fn(e, t), s, 30.0 / s)
                exact = math.factorial(n) * s ** (a - 1.0) / (s**a + 1.0) ** (n + 1)
                worst = max(worst, abs(res.value - exact))
    return worst <= 1e-6, f"max abs {worst:.2e}"


def _frac_power_rule() -> tuple[bool, str]:
    # closed power rule against the L1 scheme on t^1.5
    order, n = 0.5, 4000
    ts = np.linspace(0.0, 1.0, n + 1)
    num = caputo_num_all(ts**1.5, order, 1.0 / n)[-1]
    exact = caputo_t(TimeExpr.power(1.0, 1.5), order).evaluate(np.array([1.0]))[0]
    err = abs(num - exact) / abs(exact)
    return err <= 1e-3, f"rel {err:.2e}"


def _frac_ml_eigen() -> tuple[bool, str]:
    f = FuncExpr.from_terms([Monomial(1.0, 0.0, (MLFactor(0.7, -1.0, 1),))])
    d = caputo_x(f, 0.7)
    ok = d.keys() == f.keys() and abs(d.coeff(f.keys()[0]) + 1.0) <= 1e-12
    return ok, d.render()


def _sub_catalog() -> tuple[bool, str]:
    bad = []
    for eid, spec in REGISTRY.items():
        prob = spec.problem(spec.params())
        if not check_invariance(prob.operator, prob.basis).invariant:
            bad.append(eid)
    return not bad, "all invariant" if not bad else "not invariant: " + ", ".join(bad)


def _fde_back_substitution() -> tuple[bool, str]:
    worst = 0.0
    for spec in REGISTRY.values():
        if spec.route == "series":
            continue
        p = spec.params()
        prob = spec.problem(p)
        system = reduce(prob.operator, prob.time_op, prob.basis)
        outs = solve_sequential(system, spec.initial(p, prob))
        worst = max(worst, max(back_substitute(system, [o.expr for o in outs])))
    return worst < 1e-12, f"max mismatch {worst:.2e}"


def _verify_grid() -> tuple[bool, str]:
    worst = 0.0
    for spec in REGISTRY.values():
        if spec.route == "grid":
            worst = max(worst, residual_pde(spec).max_abs)
    return worst <= GRID_TOL, f"max abs residual {worst:.2e}"


def _verify_series() -> tuple[bool, str]:
    # forced (a, a+1, a+2) blocks are reported by verify, not gated here
    worst = 0.0
    for eid in ("EX1", "EX4"):
        rep = residual_series(REGISTRY[eid])
        forced = {k.split(".")[0] for k in rep.blocks if ".forced[" in k}
        gated = [v for k, v in rep.blocks.items() if k not in forced and ".forced[" not in k]
        worst = max(worst, *gated)
    return worst <= 1e-3, f"max residual {worst:.2e}"


SUITES: dict[str, list[tuple[str, Check]]] = {
    "specfun": [
        ("E_{1,1}(z) = exp(z) on [-5, 5]", _spec_exp),
        ("Gamma recurrence on [-5, 5]", _spec_gamma),
        ("ml_deriv against central differences", _spec_deriv),
        ("Laplace pair of eps_n", _spec_laplace),
    ],
    "fraccalc": [
        ("power rule against L1", _frac_power_rule),
        ("Mittag-Leffler eigenfunction rule", _frac_ml_eigen),
    ],
    "subspace": [("registry bases are invariant", _sub_catalog)],
    "fdesolve": [("closed forms satisfy reduced systems", _fde_back_substitution)],
    "verify": [
        ("grid residuals at nt = 400", _verify_grid),
        ("series residuals", _verify_series),
    ],
}


def run_selftest(module: str = "all", out=None) -> bool:
    if module != "all" and module not in SUITES:
        raise KeyError(f"unknown selftest module {module!r}; known: all, {', '.join(SUITES)}")
    names = list(SUITES) if module == "all" else [module]
    ok = True
    for name in names:
        for label, check in SUITES[name]:
            t0 = time.perf_counter()
            try:
                passed, detail = check()
            except Exception as exc:  # a crashing check is a failing check
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            ok &= passed
            print(f"{'PASS' if passed else 'FAIL'}  {name:<9} {label}: {detail} ({time.perf_counter() - t0:.2f}s)", file=out)
    return ok
