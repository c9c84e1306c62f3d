"""One test per acceptance criterion, each at its stated tolerance.

Every test records a single PASS/FAIL line (see ``conftest.py``), shown in
the terminal summary of ``pytest``.
"""

import math
import random
import time

import numpy as np
import pytest

from _catalog import catalog
from invsub.errors import NotInvariantError, PoleError, RecipOnNonConstant
from invsub.fdesolve import back_substitute
from invsub.fraccalc import TimeExpr
from invsub.registry import REGISTRY
from invsub.selftest import SUITES
from invsub.subspace import Add, Const, F, IntPow, Recip, SubspaceBasis, TimeOperatorSpec, check_invariance, reduce
from invsub.verify import (
    GRID_TOL,
    ORACLE_TOL,
    SERIES_TOL,
    oracle_deviation,
    residual_order,
    residual_pde,
    residual_series,
    solve_example,
    time_expr_close,
)

COEFF_TOL = 1e-12


def test_1_invariance_catalog(record):
    t0 = time.perf_counter()
    rng = random.Random(1)
    worst, bad = 0.0, []
    claims = catalog(0.5, 0.7)
    for label, op, basis, psi in claims:
        rep = check_invariance(op, basis)
        if not rep.invariant:
            bad.append(label)
            continue
        for _ in range(3):
            k = [rng.uniform(0.5, 2.0) for _ in basis.elements]
            want = psi(k)
            scale = max(1.0, *map(abs, want))
            err = max(abs(p.evaluate(k) - w) for p, w in zip(rep.psi, want)) / scale
            worst = max(worst, err)
    dt = time.perf_counter() - t0
    ok = not bad and worst <= COEFF_TOL and dt < 5.0 and len(claims) == 18
    record(1, ok, "invariance catalog (13 claims; EX3 n-family expanded to n=1..6)",
           f"max psi err {worst:.1e} <= {COEFF_TOL:g}; {dt:.2f}s < 5s; not invariant: {bad or 'none'}")
    assert ok


def _sampler(eid, rng, i):
    a = rng.uniform(0.15, 0.95)
    b = rng.uniform(0.3, 0.95)
    if eid.startswith("EX3"):
        b = rng.uniform(1.1, 1.9)
    if eid in ("EX2", "EX8"):
        while abs(a - 0.5) < 0.05:
            a = rng.uniform(0.15, 0.95)
    if eid == "EX7-I":
        # alternate the two branches of the piecewise solution
        a = rng.uniform(0.15, 0.5) if i % 2 else rng.uniform(0.55, 1.0)
    if eid == "EX4":
        b = rng.uniform(0.3, 1.9)
    return {"alpha": a, "beta": b}


CLOSED_FORMS = ["EX3a", "EX3b", "EX3c", "EX3-IVP1", "EX3-IVP2", "EX2", "EX6", "EX7-I", "EX7-II", "EX8", "EX9",
                "EX10", "EX11", "EX4"]


def test_2_closed_form_reproduction(record):
    rng = random.Random(2)
    failures = []
    for eid in CLOSED_FORMS:
        spec = REGISTRY[eid]
        for i in range(5):
            p = spec.params(_sampler(eid, rng, i))
            branches = [1, -1] if eid == "EX11" else [None]
            for br in branches:
                q = dict(p) if br is None else {**p, "branch": br}
                _, _, outs = solve_example(spec, q)
                for j, (got, want) in enumerate(zip(outs, spec.reference(q))):
                    if not time_expr_close(got.expr, want, COEFF_TOL):
                        failures.append(f"{eid} K{j} at alpha={q['alpha']:.3f}, beta={q['beta']:.3f}")
            if eid == "EX11":
                # the +/- pair is reported together on the positive branch
                _, _, outs = solve_example(spec, {**p, "branch": 1})
                neg = spec.reference({**p, "branch": -1})[0]
                if not outs[0].alternatives or not time_expr_close(outs[0].alternatives[0], neg, COEFF_TOL):
                    failures.append("EX11 alternative branch")
    ok = not failures
    record(2, ok, "closed forms vs reference, 5 random (alpha, beta) each",
           f"coefficients to {COEFF_TOL:g}; failures: {failures[:3] or 'none'}")
    assert ok, failures


def test_3_symbolic_back_substitution(record):
    worst = 0.0
    for eid, spec in REGISTRY.items():
        if spec.route == "series":
            continue
        p = spec.params()
        _, system, outs = solve_example(spec, p)
        exprs = [o.expr for o in outs]
        worst = max(worst, *back_substitute(system, exprs))
        for k, o in enumerate(outs):
            for alt in o.alternatives:
                worst = max(worst, *back_substitute(system, exprs[:k] + [alt] + exprs[k + 1 :]))
    ok = worst < COEFF_TOL
    record(3, ok, "symbolic back-substitution of all non-series solutions", f"max mismatch {worst:.1e} < {COEFF_TOL:g}")
    assert ok


GRID4 = ["EX3a", "EX3b", "EX3c", "EX6", "EX7-I", "EX7-II", "EX9", "EX10"]


def test_4_grid_residuals(record):
    t0 = time.perf_counter()
    worst, worst_gap, lines = 0.0, math.inf, []
    for eid in GRID4:
        spec = REGISTRY[eid]
        rep = residual_pde(spec)
        worst = max(worst, rep.max_abs)
        _, orders = residual_order(spec)
        need = min(2 - spec.defaults["alpha"], 1.0)
        worst_gap = min(worst_gap, min(orders) - need)
        lines.append(f"{eid} {rep.max_abs:.1e}/{min(orders):.2f}")
    dt = time.perf_counter() - t0
    ok = worst <= GRID_TOL and worst_gap >= 0 and dt < 60
    record(4, ok, "grid residuals at nt=400 and order over nt in {200,400,800}",
           f"max residual {worst:.2e} <= {GRID_TOL:g}; min (order - required) {worst_gap:.2f} >= 0; {dt:.1f}s < 60s")
    assert ok, lines


def test_5_series_residuals(record):
    notes, ok = [], True
    for a in (0.3, 0.7):
        ex4 = residual_series(REGISTRY["EX4"], {"alpha": a})
        ok &= ex4.passed
        notes.append(f"EX4 a={a}: {max(ex4.blocks.values()):.1e}")
        ex1 = residual_series(REGISTRY["EX1"], {"alpha": a})
        hom_ok = all(v <= SERIES_TOL for k, v in ex1.blocks.items() if ".forced[" not in k and k != "K0")
        ok &= hom_ok and (ex1.passed or ex1.detail["failures_isolated_to_forced_blocks"])
        if not ex1.passed:
            notes.append(f"EX1 a={a}: printed forced blocks flagged {[k for k in ex1.flagged if 'forced' in k]}")
        fixed = residual_series(REGISTRY["EX1"], {"alpha": a, "shift": 1})
        notes.append(f"EX1 a={a} corrected: {'pass' if fixed.passed else 'fail'} {max(fixed.blocks.values()):.1e}")
    record(5, ok, "series residuals on t in [0.1, 1], kmax=40",
           f"tol {SERIES_TOL:g}; " + "; ".join(notes))
    assert ok, notes


ORACLE_IDS = ["EX3a", "EX3b", "EX3c", "EX3-IVP1", "EX3-IVP2", "EX6", "EX9", "EX10"]


def test_6_oracle_equivalence(record):
    devs = {eid: oracle_deviation(REGISTRY[eid], N=2000) for eid in ORACLE_IDS}
    worst = max(devs.values())
    ok = worst <= ORACLE_TOL
    record(6, ok, "Adams oracle (N=2000) vs closed forms", f"max rel {worst:.1e} <= {ORACLE_TOL:g}")
    assert ok, devs


def test_7_special_function_suite(record):
    details, ok = [], True
    for label, check in SUITES["specfun"]:
        passed, detail = check()
        ok &= passed
        details.append(f"{label.split(' ')[0]} {detail}")
    record(7, ok, "special-function suite (1e-12 exp/Gamma, 1e-6 ml_deriv and Laplace)", "; ".join(details))
    assert ok, details


def test_8_classical_limit(record):
    a1, a2, b1, b2 = math.e, 1.0, 1.0, -1.0
    quartic = TimeExpr.polynomial([a1, a2, (b1**2 - 1), 2 * b1 * b2, 2 * b2**2])
    # polynomial() divides by i!: (b1^2-1)/2 t^2 + b1 b2/3 t^3 + b2^2/12 t^4
    ok = True
    for eid in ("EX7-I", "EX7-II"):
        spec = REGISTRY[eid]
        _, _, outs = solve_example(spec, spec.params({"alpha": 1.0, "beta": 1.0}))
        ok &= time_expr_close(outs[0].expr, quartic, COEFF_TOL)
        ok &= time_expr_close(outs[1].expr, TimeExpr.polynomial([b1, b2]), COEFF_TOL)
    record(8, ok, "EX7 types I and II coincide at alpha = beta = 1", f"quartic profile to {COEFF_TOL:g}")
    assert ok


def test_9_guard_rails(record):
    checks = []
    for eid in ("EX2", "EX8"):
        spec = REGISTRY[eid]
        with pytest.raises(PoleError):
            solve_example(spec, spec.params({"alpha": 0.5}))
        checks.append(f"{eid} PoleError")
    with pytest.raises(NotInvariantError) as info:
        reduce(IntPow(F(), 2), TimeOperatorSpec("A", 0.5, (1,)), SubspaceBasis.of(0.0, 1.0))
    assert info.value.offending_keys == ((2.0, ()),)
    checks.append("f^2 on {1,x} offends x^2")
    with pytest.raises(RecipOnNonConstant) as rinfo:
        check_invariance(Recip(Add((F(), Const(1.0)))), SubspaceBasis.of(0.0, 0.5))
    assert rinfo.value.operand == "(F + 1)" and "(F + 1)" in str(rinfo.value)
    checks.append("Recip names (F + 1)")
    record(9, True, "guard rails", "; ".join(checks))
