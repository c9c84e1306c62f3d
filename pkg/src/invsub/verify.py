"""Independent verification of closed-form solutions.

Three routes:

* ``grid``: the full equation is sampled on an (x, t) grid.  The left side
  comes from the L1 scheme (one Richardson step by default) applied to each
  time profile and spread over x by the basis; the
  right side from applying the operator to the numeric x-expansion at each t.
* ``reduced``: for profiles singular at t = 0 the time derivatives are taken
  by closed rules; the reduced system is checked coefficient by coefficient
  and the equation is still sampled pointwise on the grid.
* ``series``: truncated Laplace series are checked equation by equation with
  the L1 scheme, block by block where a forcing term is present.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, InvsubError, UnsupportedTermError
from .fdesolve import (
    SolveOutcome,
    back_substitute,
    caputo_t_closed,
    adams_oracle,
    ex1_forced_block,
    ex1_homogeneous_block,
    solve_sequential,
)
from .fraccalc import FuncExpr, TimeExpr, caputo_num_all
from .registry import ExampleSpec, get_example
from .subspace import ReducedSystem, SubspaceBasis, apply_operator, reduce, render_key

__all__ = [
    "Grid",
    "ResidualReport",
    "RunResult",
    "time_expr_close",
    "render_solution",
    "residual_pde",
    "residual_reduced",
    "residual_series",
    "residual_order",
    "oracle_deviation",
    "solve_example",
    "run_example",
    "write_outputs",
]

GRID_TOL = 5e-3
REDUCED_TOL = 1e-12
POINTWISE_TOL = 1e-9
SERIES_TOL = 1e-3
ORACLE_TOL = 5e-4
REL_FLOOR = 1e-8
SCHEMES = ("l1-richardson", "l1")


@dataclass(frozen=True)
class Grid:
    nx: int = 20
    nt: int = 400
    xmin: float = 0.2
    xmax: float = 2.0
    tmin: float = 0.05
    tmax: float = 1.0
    scheme: str = "l1-richardson"

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {', '.join(SCHEMES)}")
        if self.nx < 8 or self.nt < 8:
            raise DomainError("grid sizes must be at least 8")
        if not 0 <= self.xmin < self.xmax:
            raise DomainError("x-range must satisfy 0 <= xmin < xmax")
        if not 0 <= self.tmin < self.tmax:
            raise DomainError("t-range must satisfy 0 <= tmin < tmax")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.xmin, self.xmax, self.nx)

    @property
    def ts(self) -> np.ndarray:
        return np.linspace(0.0, self.tmax, self.nt + 1)

    @property
    def dt(self) -> float:
        return self.tmax / self.nt

    def replace(self, **kw) -> "Grid":
        return Grid(**{**asdict(self), **kw})


@dataclass
class ResidualReport:
    example: str
    route: str
    grid: Grid
    max_abs: float
    max_rel: float
    worst: dict
    tolerance: float
    passed: bool
    runtime: float = 0.0
    blocks: dict = field(default_factory=dict)
    flagged: list = field(default_factory=list)
    detail: dict = field(default_factory=dict)
    samples: np.ndarray | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "example": self.example,
            "route": self.route,
            "grid": asdict(self.grid),
            "max_abs_residual": self.max_abs,
            "max_rel_residual": self.max_rel,
            "worst": self.worst,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "blocks": self.blocks,
            "flagged": self.flagged,
            "detail": self.detail,
            "metadata": {"runtime_s": round(self.runtime, 6)},
        }

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "t", "lhs", "rhs", "residual"])
        if self.samples is not None:
            for row in self.samples:
                w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


# ---------------------------------------------------------------- comparison


def time_expr_close(a: TimeExpr, b: TimeExpr, rtol: float = 1e-12) -> bool:
    """Structural equality with coefficients compared to *rtol* relative to the larger side."""
    ca = {t.key: t.coeff for t in a.terms}
    cb = {t.key: t.coeff for t in b.terms}
    scale = max([abs(v) for v in ca.values()] + [abs(v) for v in cb.values()] + [0.0])
    for k in set(ca) | set(cb):
        if abs(ca.get(k, 0.0) - cb.get(k, 0.0)) > rtol * max(scale, 1e-300):
            return False
    sa = {s.key: s.front for s in a.series}
    sb = {s.key: s.front for s in b.series}
    if set(sa) != set(sb):
        return False
    return all(abs(sa[k] - sb[k]) <= rtol * max(abs(sa[k]), abs(sb[k])) for k in sa)


def render_solution(exprs: Sequence[TimeExpr], basis: SubspaceBasis) -> str:
    parts = []
    for e, phi in zip(exprs, basis.elements):
        if e.is_zero():
            continue
        key = render_key(phi.key)
        parts.append(f"[{e.render()}]" + ("" if key == "1" else f"*{key}"))
    return " + ".join(parts) if parts else "0"


# ------------------------------------------------------------------ helpers


def _derivative_samples(expr: TimeExpr, m: int, ts: np.ndarray) -> tuple[np.ndarray, str]:
    """m-th t-derivative at uniform nodes *ts*: exact termwise when possible, else refined differences."""
    if m == 0:
        return expr.evaluate(ts), "exact"
    try:
        return expr.derivative(m).evaluate(ts), "exact"
    except UnsupportedTermError:
        fine = np.linspace(ts[0], ts[-1], 4 * (ts.size - 1) + 1)
        v = expr.evaluate(fine)
        h = fine[1] - fine[0]
        for _ in range(m):
            v = np.gradient(v, h, edge_order=2)
        return v[::4], "refined-differences"


def _time_derivative(expr: TimeExpr, order: float, grid: Grid) -> tuple[np.ndarray, str]:
    """Caputo derivative of *expr* at the grid's t-nodes, split as D^nu of the m-th derivative."""
    m, nu = _split_order(order)
    d, how = _derivative_samples(expr, m, grid.ts)
    if nu == 0:
        return d, how
    coarse = caputo_num_all(d, nu, grid.dt)
    if grid.scheme == "l1":
        return coarse, how
    # one Richardson step against the leading L1 error term h^(2 - nu)
    fine_ts = np.linspace(0.0, grid.tmax, 2 * grid.nt + 1)
    d2, how2 = _derivative_samples(expr, m, fine_ts)
    fine = caputo_num_all(d2, nu, grid.dt / 2)[::2]
    w = 2.0 ** (2.0 - nu)
    return (w * fine - coarse) / (w - 1.0), how if how == how2 else f"{how}/{how2}"


def _basis_values(basis: SubspaceBasis, xs: np.ndarray) -> np.ndarray:
    return np.array([np.asarray(FuncExpr.from_terms([phi]).evaluate(xs), dtype=float) for phi in basis.elements])


def _split_order(order: float) -> tuple[int, float]:
    m = math.floor(order + 1e-12)
    nu = order - m
    return m, (0.0 if nu < 1e-12 else nu)


def _lhs_columns(system: ReducedSystem, exprs: Sequence[TimeExpr], grid: Grid) -> tuple[np.ndarray, dict]:
    """Left side on the (x, t) grid.

    The time operator is linear, so each component's derivative is computed
    once and spread over x by the basis values.
    """
    phis = _basis_values(system.basis, grid.xs)
    out = np.zeros((grid.nx, grid.nt + 1))
    how = {}
    for order, lam in system.time_op.terms():
        for j, e in enumerate(exprs):
            d, h = _time_derivative(e, order, grid)
            how[f"K{j}:order {order:g}"] = h
            out += lam * np.outer(phis[j], d)
    return out, how


def _rhs_grid(system_op, basis: SubspaceBasis, exprs: Sequence[TimeExpr], grid: Grid, t_idx: np.ndarray) -> np.ndarray:
    xs = grid.xs
    ts = grid.ts
    kvals = np.array([e.evaluate(ts[t_idx]) for e in exprs])
    out = np.zeros((xs.size, t_idx.size))
    for n in range(t_idx.size):
        f = basis.combine([float(v) for v in kvals[:, n]])
        out[:, n] = apply_operator(system_op, f).evaluate(xs)
    return out


def _assemble(example: str, route: str, grid: Grid, lhs: np.ndarray, rhs: np.ndarray, t_idx: np.ndarray, tol: float) -> ResidualReport:
    xs, ts = grid.xs, grid.ts
    res = lhs - rhs
    absres = np.abs(res)
    rel = absres / np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), REL_FLOOR)
    i, n = np.unravel_index(int(np.argmax(absres)), absres.shape)
    worst = {"x": float(xs[i]), "t": float(ts[t_idx[n]]), "lhs": float(lhs[i, n]), "rhs": float(rhs[i, n]),
             "residual": float(res[i, n])}
    X, Tn = np.meshgrid(xs, ts[t_idx], indexing="ij")
    samples = np.column_stack([X.ravel(), Tn.ravel(), lhs.ravel(), rhs.ravel(), res.ravel()])
    max_abs = float(absres.max())
    return ResidualReport(example, route, grid, max_abs, float(rel.max()), worst, tol, max_abs <= tol, samples=samples)


# -------------------------------------------------------------------- routes


def _grid_residual(spec_id: str, problem, system: ReducedSystem, exprs, grid: Grid, route: str, tol: float) -> ResidualReport:
    t_idx = np.nonzero(grid.ts >= grid.tmin - 1e-12)[0]
    lhs_full, how = _lhs_columns(system, exprs, grid)
    rhs = _rhs_grid(problem.operator, system.basis, exprs, grid, t_idx)
    rep = _assemble(spec_id, route, grid, lhs_full[:, t_idx], rhs, t_idx, tol)
    rep.detail["lhs_method"] = how
    return rep


def residual_pde(spec: ExampleSpec, params: dict | None = None, grid: Grid | None = None) -> ResidualReport:
    """Pointwise residual of the full equation with the L1 left side."""
    grid = grid or Grid()
    t0 = time.perf_counter()
    p = spec.params(params)
    problem, system, outs = solve_example(spec, p)
    rep = _grid_residual(spec.id, problem, system, [o.expr for o in outs], grid, "grid", GRID_TOL)
    rep.runtime = time.perf_counter() - t0
    return rep


def residual_reduced(spec: ExampleSpec, params: dict | None = None, grid: Grid | None = None) -> ResidualReport:
    """Closed-rule back-substitution plus a pointwise sample of the equation."""
    grid = grid or Grid()
    t0 = time.perf_counter()
    p = spec.params(params)
    problem, system, outs = solve_example(spec, p)
    exprs = [o.expr for o in outs]
    mismatch = back_substitute(system, exprs)
    blocks = {f"K{j}": m for j, m in enumerate(mismatch)}
    for k, o in enumerate(outs):
        for a, alt in enumerate(o.alternatives):
            alt_exprs = list(exprs)
            alt_exprs[k] = alt
            for j, m in enumerate(back_substitute(system, alt_exprs)):
                blocks[f"K{j} (K{k} alternative {a + 1})"] = m
    # pointwise: closed-rule left side against the operator applied numerically
    t_idx = np.nonzero(grid.ts >= grid.tmin - 1e-12)[0]
    ts = grid.ts[t_idx]
    xs = grid.xs
    lhs = np.zeros((xs.size, t_idx.size))
    phis = _basis_values(system.basis, xs)
    for j, e in enumerate(exprs):
        d = TimeExpr()
        for order, lam in system.time_op.terms():
            d = d + caputo_t_closed(e, order).scale(lam)
        lhs += np.outer(phis[j], d.evaluate(ts))
    rhs = _rhs_grid(problem.operator, system.basis, exprs, grid, t_idx)
    rep = _assemble(spec.id, "reduced", grid, lhs, rhs, t_idx, REDUCED_TOL)
    worst_coeff = max(blocks.values(), default=0.0)
    rep.blocks = blocks
    rep.detail["max_coefficient_mismatch"] = worst_coeff
    rep.detail["pointwise_tolerance"] = POINTWISE_TOL
    rep.passed = worst_coeff < REDUCED_TOL and rep.max_rel <= POINTWISE_TOL
    rep.runtime = time.perf_counter() - t0
    return rep


def _equation_lhs(time_op, expr: TimeExpr, grid: Grid) -> tuple[np.ndarray, str]:
    out = np.zeros(grid.nt + 1)
    methods = set()
    for order, lam in time_op.terms():
        d, h = _time_derivative(expr, order, grid)
        methods.add(h)
        out += lam * d
    return out, "+".join(sorted(methods))


def residual_series(spec: ExampleSpec, params: dict | None = None, grid: Grid | None = None) -> ResidualReport:
    """Equation-by-equation L1 check of truncated series solutions on ``t >= tmin``.

    Forced (a, a+1, a+2) components are additionally split into the
    homogeneous blocks and the forced blocks, each checked against its own
    right-hand side; failures confined to forced blocks are flagged.
    """
    grid = grid or Grid(tmin=0.1)
    t0 = time.perf_counter()
    p = spec.params(params)
    problem, system, outs = solve_example(spec, p)
    exprs = [o.expr for o in outs]
    ts = grid.ts
    sel = ts >= grid.tmin - 1e-12
    kvals = np.array([e.evaluate(ts) for e in exprs])
    blocks: dict[str, float] = {}
    methods: dict[str, str] = {}
    flagged: list[str] = []
    for j, psi in enumerate(system.components):
        lhs, how = _equation_lhs(system.time_op, exprs[j], grid)
        rhs = np.asarray(psi.num.evaluate(list(kvals)) / psi.den.evaluate(list(kvals)), dtype=float) * np.ones_like(ts)
        blocks[f"K{j}"] = float(np.max(np.abs(lhs - rhs)[sel]))
        methods[f"K{j}"] = how
        src = outs[j].meta.get("source")
        if src is not None:
            kmax = int(p.get("kmax", 40))
            variant = outs[j].meta["variant"]
            for i in range(3):
                hom = ex1_homogeneous_block(i, kmax)
                l_h, how_h = _equation_lhs(system.time_op, hom, grid)
                blocks[f"K{j}.homogeneous[{i}]"] = float(np.max(np.abs(l_h)[sel]))
                methods[f"K{j}.homogeneous[{i}]"] = how_h
                forced = ex1_forced_block(i, system.time_op.alpha, variant, kmax)
                l_f, how_f = _equation_lhs(system.time_op, forced, grid)
                blocks[f"K{j}.forced[{i}]"] = float(np.max(np.abs(l_f - hom.evaluate(ts))[sel]))
                methods[f"K{j}.forced[{i}]"] = how_f
    bad = [k for k, v in blocks.items() if v > SERIES_TOL]
    forced_comp = {k.split(".")[0] for k in blocks if ".forced[" in k}
    for k in bad:
        if ".forced[" in k or k in forced_comp:
            flagged.append(k)
    unexplained = [k for k in bad if k not in flagged]
    if any(".forced[" in k for k in flagged):
        flagged_ok = all(
            blocks.get(k.replace("forced", "homogeneous"), 0.0) <= SERIES_TOL for k in flagged if ".forced[" in k
        )
    else:
        flagged_ok = True
    t_idx = np.nonzero(sel)[0]
    lhs_grid, _ = _lhs_columns(system, exprs, grid)
    rhs_grid = _rhs_grid(problem.operator, system.basis, exprs, grid, t_idx)
    rep = _assemble(spec.id, "series", grid, lhs_grid[:, t_idx], rhs_grid, t_idx, SERIES_TOL)
    rep.blocks = blocks
    rep.flagged = flagged
    rep.detail["lhs_method"] = methods
    rep.detail["unexplained_failures"] = unexplained
    rep.detail["failures_isolated_to_forced_blocks"] = not unexplained and flagged_ok
    rep.passed = not bad
    rep.runtime = time.perf_counter() - t0
    return rep


def residual_order(spec: ExampleSpec, params: dict | None = None, grid: Grid | None = None,
                   nts: Sequence[int] = (200, 400, 800)) -> tuple[list[float], list[float]]:
    """Max-abs grid residuals over refinements and the observed orders between them."""
    grid = grid or Grid()
    p = spec.params(params)
    problem, system, outs = solve_example(spec, p)
    exprs = [o.expr for o in outs]
    errs = []
    for nt in nts:
        g = grid.replace(nt=nt)
        errs.append(_grid_residual(spec.id, problem, system, exprs, g, "grid", GRID_TOL).max_abs)
    orders = [math.log(errs[i] / errs[i + 1]) / math.log(nts[i + 1] / nts[i]) if errs[i + 1] > 0 else math.inf
              for i in range(len(errs) - 1)]
    return errs, orders


# ---------------------------------------------------------------- pipeline


def solve_example(spec: ExampleSpec, params: dict) -> tuple:
    problem = spec.problem(params)
    # reduce() runs the invariance check and raises NotInvariantError
    system = reduce(problem.operator, problem.time_op, problem.basis)
    variant = "corrected" if int(params.get("shift", 0)) else "printed"
    outs = solve_sequential(system, spec.initial(params, problem), variant=variant, kmax=int(params.get("kmax", 40)))
    return problem, system, outs


def oracle_deviation(spec: ExampleSpec, params: dict | None = None, N: int = 2000, T: float = 1.0) -> float:
    """Max relative deviation of the Adams oracle from the closed form on (0, T]."""
    p = spec.params(params)
    problem, system, outs = solve_example(spec, p)
    res = adams_oracle(system, spec.initial(p, problem), T, N)
    worst = 0.0
    for j, o in enumerate(outs):
        exact = o.expr.evaluate(res.t[1:])
        dev = np.abs(res.values[j, 1:] - exact) / np.maximum(np.abs(exact), REL_FLOOR)
        worst = max(worst, float(dev.max()))
    return worst


@dataclass
class RunResult:
    example: str
    params: dict
    solution: str
    outcomes: list
    report: ResidualReport
    oracle: float | None = None
    oracle_passed: bool | None = None

    @property
    def passed(self) -> bool:
        return self.report.passed and self.oracle_passed is not False

    def to_json(self) -> dict:
        d = self.report.to_json()
        d["parameters"] = {k: v for k, v in sorted(self.params.items())}
        d["solution"] = self.solution
        d["provenance"] = [o.provenance for o in self.outcomes]
        d["validity"] = sorted({v for o in self.outcomes for v in o.validity})
        d["alternatives"] = [[a.render() for a in o.alternatives] for o in self.outcomes]
        if self.oracle is not None:
            d["oracle_max_rel_deviation"] = self.oracle
            d["oracle_passed"] = self.oracle_passed
        return d


def _in_context(exc: InvsubError, example_id: str) -> InvsubError:
    if exc.args and isinstance(exc.args[0], str) and not exc.args[0].startswith(f"{example_id}: "):
        exc.args = (f"{example_id}: {exc.args[0]}",) + exc.args[1:]
    return exc


def run_example(example_id: str, overrides: dict | None = None, grid: Grid | None = None,
                with_oracle: bool = True) -> RunResult:
    """Invariance check, reduction, solve and verification of one registry entry.

    Library errors are re-raised unchanged in type with the example id
    prefixed to the message.
    """
    spec = get_example(example_id)
    p = spec.params(overrides)
    try:
        problem, system, outs = solve_example(spec, p)
        solution = render_solution([o.expr for o in outs], system.basis)
        if spec.route == "grid":
            rep = residual_pde(spec, p, grid)
        elif spec.route == "reduced":
            rep = residual_reduced(spec, p, grid)
        else:
            rep = residual_series(spec, p, grid or Grid(tmin=0.1))
        result = RunResult(spec.id, p, solution, outs, rep)
        if with_oracle and spec.oracle:
            result.oracle = oracle_deviation(spec, p)
            result.oracle_passed = result.oracle <= ORACLE_TOL
    except InvsubError as exc:
        raise _in_context(exc, spec.id)
    return result


def _fmt(v: float) -> str:
    return f"{v:g}"


def write_outputs(result: RunResult, out_dir: str | Path, fmt: str = "both") -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{result.example}_{_fmt(result.params['alpha'])}_{_fmt(result.params['beta'])}"
    written = []
    if fmt in ("csv", "both"):
        path = out / f"{stem}.csv"
        path.write_text(result.report.csv_text())
        written.append(path)
    if fmt in ("json", "both"):
        path = out / f"{stem}.json"
        path.write_text(json.dumps(result.to_json(), indent=2, sort_keys=True, default=float) + "\n")
        written.append(path)
    return written
