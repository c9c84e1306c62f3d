import json

import numpy as np
import pytest

from invsub.errors import DomainError, PoleError
from invsub.registry import REGISTRY
from invsub.verify import (
    GRID_TOL,
    Grid,
    _grid_residual,
    residual_pde,
    residual_reduced,
    residual_series,
    run_example,
    solve_example,
    write_outputs,
)

GRID_IDS = [k for k, s in REGISTRY.items() if s.route == "grid"]


def test_grid_validation():
    g = Grid()
    assert g.ts[0] == 0.0 and g.ts[-1] == 1.0 and g.ts.size == 401
    assert g.xs.size == 20
    with pytest.raises(DomainError):
        Grid(nx=4)
    with pytest.raises(DomainError):
        Grid(xmin=2.0, xmax=1.0)
    with pytest.raises(DomainError):
        Grid(scheme="crank")


@pytest.mark.parametrize("eid", GRID_IDS)
def test_grid_residuals_at_defaults(eid):
    rep = residual_pde(REGISTRY[eid])
    assert rep.passed, (eid, rep.max_abs)
    assert rep.max_abs <= GRID_TOL


def test_plain_l1_is_coarser_than_richardson():
    spec = REGISTRY["EX3c"]
    fine = residual_pde(spec).max_abs
    plain = residual_pde(spec, grid=Grid(scheme="l1")).max_abs
    assert fine < plain


def test_wrong_solution_is_detected():
    # a rescaled profile no longer balances the two sides
    spec = REGISTRY["EX3c"]
    problem, system, outs = solve_example(spec, spec.params())
    exprs = [o.expr for o in outs]
    good = _grid_residual("EX3c", problem, system, exprs, Grid(), "grid", GRID_TOL)
    bad = _grid_residual("EX3c", problem, system, [exprs[0].scale(1.1), exprs[1]], Grid(), "grid", GRID_TOL)
    assert good.passed and not bad.passed


@pytest.mark.parametrize("eid", ["EX2", "EX8", "EX11"])
def test_reduced_route(eid):
    rep = residual_reduced(REGISTRY[eid])
    assert rep.passed
    assert rep.detail["max_coefficient_mismatch"] < 1e-12


def test_series_route_ex4_and_corrected_ex1():
    for alpha in (0.3, 0.7):
        assert residual_series(REGISTRY["EX4"], {"alpha": alpha}).passed
        assert residual_series(REGISTRY["EX1"], {"alpha": alpha, "shift": 1}).passed


def test_series_route_flags_printed_forced_blocks():
    rep = residual_series(REGISTRY["EX1"])
    assert not rep.passed
    assert rep.flagged and all(".forced[" in k or k == "K0" for k in rep.flagged)
    assert rep.detail["failures_isolated_to_forced_blocks"]
    assert rep.blocks["K1"] <= 1e-3


@pytest.mark.parametrize("alpha", [0.4, 0.9])
@pytest.mark.parametrize("beta", [1.3, 1.9])
def test_ex3_parameter_sweep(alpha, beta):
    for eid in ("EX3a", "EX3b", "EX3c"):
        assert residual_pde(REGISTRY[eid], {"alpha": alpha, "beta": beta}).passed


def test_run_example_and_errors():
    res = run_example("EX10")
    assert res.passed and res.oracle is not None and res.oracle <= 5e-4
    with pytest.raises(PoleError, match="^EX2: "):
        run_example("EX2", {"alpha": 0.5})
    with pytest.raises(KeyError):
        run_example("EX99")


def test_outputs_are_deterministic(tmp_path):
    a = write_outputs(run_example("EX3c", with_oracle=False), tmp_path / "a")
    b = write_outputs(run_example("EX3c", with_oracle=False), tmp_path / "b")
    assert [p.name for p in a] == ["EX3c_0.6_1.5.csv", "EX3c_0.6_1.5.json"]
    assert a[0].read_text() == b[0].read_text()
    ja, jb = (json.loads(p.read_text()) for p in (a[1], b[1]))
    ja["metadata"].pop("runtime_s")
    jb["metadata"].pop("runtime_s")
    assert ja == jb
    assert a[0].read_text().splitlines()[0] == "x,t,lhs,rhs,residual"


def test_zero_solution_has_zero_residual():
    p = {"a": 0.0, "b": 0.0}
    rep = residual_pde(REGISTRY["EX10"], p)
    assert rep.max_abs == 0.0
