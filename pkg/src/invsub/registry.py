"""Built-in catalogue of worked problems with reference closed forms.

Each entry builds its problem as a schema dictionary (so every entry
exercises the JSON loader), knows its default parameters and initial data,
and carries a reference solution written out term by term with
:func:`math.gamma`, independent of the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .fdesolve import InitialData
from .fraccalc import FuncExpr, MLFactor, Monomial, MLSpec, TimeExpr, TimeSeries, TimeTerm
from .problem import SCHEMA, Problem, problem_from_dict
from .subspace import fit_initial_conditions

__all__ = ["ExampleSpec", "REGISTRY", "get_example", "example_ids"]

G = math.gamma
ROUTES = ("grid", "reduced", "series")


# ------------------------------------------------------------ node builders


def _F() -> dict:
    return {"node": "F"}


def _D(order: float, child: dict) -> dict:
    return {"node": "FracDx", "order": order, "child": child}


def _add(*children: dict) -> dict:
    return {"node": "Add", "children": list(children)}


def _mul(*children: dict) -> dict:
    return {"node": "Mul", "children": list(children)}


def _scale(factor: float, child: dict) -> dict:
    return {"node": "Scale", "factor": factor, "child": child}


def _pow(child: dict, n: int) -> dict:
    return {"node": "IntPow", "child": child, "exponent": n}


def _const(v: float) -> dict:
    return {"node": "Const", "value": v}


def _recip(child: dict) -> dict:
    return {"node": "Recip", "child": child}


def _term(power: float = 0.0, coeff: float = 1.0, ml: tuple = ()) -> dict:
    return {"coeff": coeff, "power": power, "ml": [{"order": o, "rate": r, "mult": 1} for o, r in ml]}


def _problem(mode: str, alpha: float, lambdas, op: dict, basis: list, ic=None, ic_dt=None) -> dict:
    d = {"schema": SCHEMA, "time_op": {"mode": mode, "alpha": alpha, "lambdas": list(lambdas)}, "operator": op, "basis": basis}
    if ic is not None:
        d["ic"] = ic
        d["ic_derivatives"] = [ic_dt] if ic_dt is not None else []
    return d


def _power_basis(beta: float, n: int) -> list:
    return [_term(j * beta) for j in range(n + 1)]


def _ml_basis(beta: float, rate: float) -> list:
    return [_term(0.0), _term(0.0, ml=((beta, rate),))]


# ------------------------------------------------------------------ entries


@dataclass(frozen=True)
class ExampleSpec:
    id: str
    description: str
    route: str
    defaults: dict
    problem_dict: Callable[[dict], dict]
    initial: Callable[[dict, Problem], list]
    reference: Callable[[dict], list]
    oracle: bool = False
    notes: tuple = field(default_factory=tuple)

    def params(self, overrides: dict | None = None) -> dict:
        p = dict(self.defaults)
        p.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return p

    def problem(self, params: dict) -> Problem:
        return problem_from_dict(self.problem_dict(params))


def _ics_from_values(*groups) -> list:
    return [InitialData(tuple(g)) for g in groups]


def ics_from_problem(problem: Problem) -> list:
    levels = [fit_initial_conditions(problem.basis, lvl, i) for i, lvl in enumerate(problem.ic_levels)]
    n = len(problem.basis)
    return [InitialData(tuple(lv[j] for lv in levels)) for j in range(n)]


def _pw(*pairs) -> TimeExpr:
    """Pure-power profile from ``(coeff, power)`` pairs."""
    return TimeExpr([TimeTerm(c, p) for c, p in pairs])


# EX1: orders (a, a+1, a+2), N = D^(b+1) f on {1, x^(b+1)}


def _ex1_problem(p):
    b = p["beta"]
    return _problem("A", p["alpha"], (1, 1, 1), _D(b + 1.0, _F()), [_term(0.0), _term(b + 1.0)])


def _ex1_initial(p, _prob):
    return _ics_from_values((p["q0"], p["q1"], p["q2"]), (p["p0"], p["p1"], p["p2"]))


def _ex1_reference(p):
    a, b, kmax = p["alpha"], p["beta"], int(p["kmax"])
    shift = int(p.get("shift", 0))
    v = (p["p0"], p["p1"], p["p2"])
    w = (p["q0"], p["q1"], p["q2"])

    def hom(vals):
        return [
            TimeSeries(vals[i], -1.0, float(l), 2.0, 1.0, l + 1.0, 1.0, -1.0, 0, kmax)
            for i in range(3)
            for l in range(i, 3)
        ]

    forced = [
        TimeSeries(G(b + 2.0) * v[i], -1.0, a + l, 2.0, 1.0, a + l, 1.0, -1.0, shift, kmax)
        for i in range(3)
        for l in range(i + 2, 5)
    ]
    return [TimeExpr([], hom(w) + forced), TimeExpr([], hom(v))]


# EX2: Burgers-type, N = -f D^b f + d D^b D^b f on {1, x^b}


def _ex2_problem(p):
    b = p["beta"]
    op = _add(_scale(-1.0, _mul(_F(), _D(b, _F()))), _scale(p["d"], _D(b, _D(b, _F()))))
    return _problem("A", p["alpha"], (1,), op, _power_basis(b, 1))


def _ex2_initial(p, _prob):
    return [InitialData(free=p["a"]), InitialData()]


def _ex2_reference(p):
    a, b = p["alpha"], p["beta"]
    return [_pw((p["a"], -a)), _pw((-G(1 - a) / (G(1 + b) * G(1 - 2 * a)), -a))]


# EX3: diffusion C D^b f, b in (1, 2]


def _ex3_op(p):
    return _scale(p["C"], _D(p["beta"], _F()))


def _ex3a_problem(p):
    return _problem("A", p["alpha"], (1,), _ex3_op(p), _power_basis(p["beta"], 2))


def _ex3a_reference(p):
    a, b, C = p["alpha"], p["beta"], p["C"]
    d, bb, aa = p["d"], p["b"], p["a"]
    return [
        _pw((d, 0.0), (bb * C * G(b + 1) / G(a + 1), a), (aa * C**2 * G(2 * b + 1) / G(2 * a + 1), 2 * a)),
        _pw((bb, 0.0), (aa * C * G(2 * b + 1) / (G(b + 1) * G(a + 1)), a)),
        _pw((aa, 0.0)),
    ]


def _ex3b_problem(p):
    return _problem("A", p["alpha"], (1,), _ex3_op(p), _ml_basis(p["beta"], 1.0))


def _ex3b_reference(p):
    return [_pw((p["a"], 0.0)), TimeExpr([TimeTerm(p["b"], 0.0, MLSpec(0, p["alpha"], 1.0, p["C"]))])]


def _ex3c_problem(p):
    return _problem("A", p["alpha"], (1,), _ex3_op(p), _power_basis(p["beta"], 1))


def _ex3c_reference(p):
    a, b, C = p["alpha"], p["beta"], p["C"]
    return [_pw((p["a"], 0.0), (p["b"] * C * G(b + 1) / G(a + 1), a)), _pw((p["b"], 0.0))]


def _ex3_ivp1_problem(p):
    b = p["beta"]
    return _problem("A", p["alpha"], (1,), _ex3_op(p), _power_basis(b, 1), ic=[_term(b, 3.0 / G(b + 1))])


def _ex3_ivp1_reference(p):
    a, b, C = p["alpha"], p["beta"], p["C"]
    return [_pw((3 * C / G(a + 1), a)), _pw((3 / G(b + 1), 0.0))]


def _ex3_ivp2_problem(p):
    b = p["beta"]
    return _problem("A", p["alpha"], (1,), _ex3_op(p), _power_basis(b, 2), ic=[_term(0.0, 1.0), _term(2 * b, -0.5)])


def _ex3_ivp2_reference(p):
    a, b, C = p["alpha"], p["beta"], p["C"]
    return [
        _pw((1.0, 0.0), (-(C**2) * G(2 * b + 1) / (2 * G(2 * a + 1)), 2 * a)),
        _pw((-C * G(2 * b + 1) / (2 * G(b + 1) * G(a + 1)), a)),
        _pw((-0.5, 0.0)),
    ]


# EX4: telegraph, orders (a, a+1), N = D^b f - f on {1, E_b(x^b)}


def _ex4_problem(p):
    b = p["beta"]
    return _problem("A", p["alpha"], (1, 1), _add(_D(b, _F()), _scale(-1.0, _F())), _ml_basis(b, 1.0))


def _ex4_initial(p, _prob):
    return _ics_from_values((p["a1"], p["a2"]), (p["b1"], p["b2"]))


def _ex4_reference(p):
    a, kmax = p["alpha"], int(p["kmax"])
    a1, a2, b1, b2 = p["a1"], p["a2"], p["b1"], p["b2"]
    k0 = TimeExpr(
        [],
        [
            TimeSeries(a1, -1.0, 0.0, a + 1.0, 1.0, 1.0, a, -1.0, 0, kmax),
            TimeSeries(a1 + a2, -1.0, 1.0, a + 1.0, 1.0, 2.0, a, -1.0, 0, kmax),
        ],
    )
    k1 = TimeExpr([TimeTerm(b1, 0.0), TimeTerm(b2, 1.0, MLSpec(0, 1.0, 2.0, -1.0))])
    return [k0, k1]


# EX6: (D^b f)^2 - f D^b f on {1, E_b(x^b)}, f(x,0) = 3 + 5/2 E_b(x^b)


def _ex6_problem(p):
    b = p["beta"]
    op = _add(_pow(_D(b, _F()), 2), _scale(-1.0, _mul(_F(), _D(b, _F()))))
    ic = [_term(0.0, p["k0"]), _term(0.0, p["k1"], ml=((b, 1.0),))]
    return _problem("A", p["alpha"], (1,), op, _ml_basis(b, 1.0), ic=ic)


def _ex6_reference(p):
    return [_pw((p["k0"], 0.0)), TimeExpr([TimeTerm(p["k1"], 0.0, MLSpec(0, p["alpha"], 1.0, -p["k0"]))])]


# EX7: D^b (f D^b f) - 1 on {1, x^b}; type I order 2a, type II order a+1


def _ex7_op(p):
    b = p["beta"]
    return _add(_D(b, _mul(_F(), _D(b, _F()))), _const(-1.0))


def _ex7_consts(p):
    b1 = p["b1"] if p.get("b1") is not None else 1.0 / G(p["beta"] + 1)
    return p["a1"], p["a2"], b1, p["b2"]


def _ex7_ic(p):
    a1, a2, b1, b2 = _ex7_consts(p)
    b = p["beta"]
    return [_term(0.0, a1), _term(b, b1)], [_term(0.0, a2), _term(b, b2)]


def _ex7i_problem(p):
    ic, ic_dt = _ex7_ic(p)
    return _problem("B", p["alpha"], (0, 1), _ex7_op(p), _power_basis(p["beta"], 1), ic=ic, ic_dt=ic_dt)


def _ex7i_reference(p):
    a, b = p["alpha"], p["beta"]
    a1, a2, b1, b2 = _ex7_consts(p)
    g2 = G(b + 1) ** 2
    if a <= 0.5:
        return [_pw((a1, 0.0), ((b1**2 * g2 - 1) / G(2 * a + 1), 2 * a)), _pw((b1, 0.0))]
    return [
        _pw(
            (a1, 0.0),
            (a2, 1.0),
            ((b1**2 * g2 - 1) / G(2 * a + 1), 2 * a),
            (2 * b2**2 * g2 / G(2 * a + 3), 2 * a + 2),
            (2 * b1 * b2 * g2 / G(2 * a + 2), 2 * a + 1),
        ),
        _pw((b1, 0.0), (b2, 1.0)),
    ]


def _ex7ii_problem(p):
    ic, ic_dt = _ex7_ic(p)
    return _problem("A", p["alpha"], (0, 1), _ex7_op(p), _power_basis(p["beta"], 1), ic=ic, ic_dt=ic_dt)


def _ex7ii_reference(p):
    a, b = p["alpha"], p["beta"]
    a1, a2, b1, b2 = _ex7_consts(p)
    g2 = G(b + 1) ** 2
    return [
        _pw(
            (a1, 0.0),
            (a2, 1.0),
            ((b1**2 * g2 - 1) / G(a + 2), a + 1),
            (2 * b1 * b2 * g2 / G(a + 3), a + 2),
            (2 * b2**2 * g2 / G(a + 4), a + 3),
        ),
        _pw((b1, 0.0), (b2, 1.0)),
    ]


# EX8: KdV-type, N = 6 f D^b f - D^(2b) D^b f on {1, x^b}


def _ex8_problem(p):
    b = p["beta"]
    op = _add(_scale(6.0, _mul(_F(), _D(b, _F()))), _scale(-1.0, _D(2 * b, _D(b, _F()))))
    return _problem("B", p["alpha"], (1,), op, _power_basis(b, 1))


def _ex8_reference(p):
    a, b = p["alpha"], p["beta"]
    return [_pw((p["a"], -a)), _pw((G(1 - a) / (6 * G(1 + b) * G(1 - 2 * a)), -a))]


# EX9: D^b D^b D^b (f^2/2) on {1, x^b, x^2b}


def _ex9_problem(p):
    b = p["beta"]
    op = _D(b, _D(b, _D(b, _scale(0.5, _pow(_F(), 2)))))
    return _problem("A", p["alpha"], (1,), op, _power_basis(b, 2))


def _ex9_reference(p):
    a, b = p["alpha"], p["beta"]
    aa, bb, c = p["a"], p["b"], p["c"]
    return [
        _pw(
            (aa, 0.0),
            (bb * c * G(3 * b + 1) / G(a + 1), a),
            (c**3 * G(4 * b + 1) * G(3 * b + 1) / (2 * G(b + 1) * G(2 * a + 1)), 2 * a),
        ),
        _pw((bb, 0.0), (c**2 * G(4 * b + 1) / (2 * G(b + 1) * G(a + 1)), a)),
        _pw((c, 0.0)),
    ]


# EX10: D^b (f D^b f) on {1, x^b}


def _ex10_problem(p):
    b = p["beta"]
    return _problem("A", p["alpha"], (1,), _D(b, _mul(_F(), _D(b, _F()))), _power_basis(b, 1))


def _ex10_reference(p):
    a, b = p["alpha"], p["beta"]
    return [_pw((p["a"], 0.0), (p["b"] ** 2 * G(b + 1) ** 2 / G(a + 1), a)), _pw((p["b"], 0.0))]


# EX11: D^b u + (D^b u + u)^-1 on {1, E_b(-x^b)}


def _ex11_problem(p):
    b = p["beta"]
    op = _add(_D(b, _F()), _recip(_add(_D(b, _F()), _F())))
    return _problem("A", p["alpha"], (1,), op, _ml_basis(b, -1.0))


def _ex11_initial(p, _prob):
    return [InitialData(branch=int(p["branch"])), InitialData((p["b"],))]


def _ex11_reference(p):
    a = p["alpha"]
    eta = (G(1 - a / 2) / G(1 + a / 2)) ** 0.5
    sign = 1.0 if p["branch"] >= 0 else -1.0
    return [_pw((sign * eta, a / 2)), TimeExpr([TimeTerm(p["b"], 0.0, MLSpec(0, a, 1.0, -1.0))])]


def _from_problem(p, prob):
    return ics_from_problem(prob)


def _ex3a_initial(p, _prob):
    return _ics_from_values((p["d"],), (p["b"],), (p["a"],))


def _ex3b_initial(p, _prob):
    return _ics_from_values((p["a"],), (p["b"],))


def _ex3c_initial(p, _prob):
    return _ics_from_values((p["a"],), (p["b"],))


def _ex9_initial(p, _prob):
    return _ics_from_values((p["a"],), (p["b"],), (p["c"],))


def _ex10_initial(p, _prob):
    return _ics_from_values((p["a"],), (p["b"],))


_EX3_C = {"C": 1.0}

REGISTRY: dict[str, ExampleSpec] = {
    s.id: s
    for s in [
        ExampleSpec(
            "EX1",
            "orders a, a+1, a+2 with N = D^(b+1) f on {1, x^(b+1)}; Laplace-series solution",
            "series",
            {"alpha": 0.3, "beta": 0.5, "p0": 1.0, "p1": 0.5, "p2": -0.5, "q0": 1.0, "q1": 0.0, "q2": 0.0,
             "kmax": 40, "shift": 0},
            _ex1_problem,
            _ex1_initial,
            _ex1_reference,
        ),
        ExampleSpec(
            "EX2",
            "Burgers-type equation on {1, x^b}; power-law solution singular at t = 0",
            "reduced",
            {"alpha": 0.3, "beta": 0.8, "d": 1.0, "a": 1.0},
            _ex2_problem,
            _ex2_initial,
            _ex2_reference,
        ),
        ExampleSpec(
            "EX3a",
            "diffusion C D^b f on {1, x^b, x^2b}",
            "grid",
            {"alpha": 0.6, "beta": 1.5, **_EX3_C, "d": 0.5, "b": 0.2, "a": 0.05},
            _ex3a_problem,
            _ex3a_initial,
            _ex3a_reference,
            oracle=True,
        ),
        ExampleSpec(
            "EX3b",
            "diffusion C D^b f on {1, E_b(x^b)}",
            "grid",
            {"alpha": 0.6, "beta": 1.5, **_EX3_C, "a": 0.5, "b": 0.05},
            _ex3b_problem,
            _ex3b_initial,
            _ex3b_reference,
            oracle=True,
        ),
        ExampleSpec(
            "EX3c",
            "diffusion C D^b f on {1, x^b}",
            "grid",
            {"alpha": 0.6, "beta": 1.5, **_EX3_C, "a": 0.5, "b": 0.2},
            _ex3c_problem,
            _ex3c_initial,
            _ex3c_reference,
            oracle=True,
        ),
        ExampleSpec(
            "EX3-IVP1",
            "diffusion with f(x,0) = 3 x^b / Gamma(b+1)",
            "grid",
            {"alpha": 0.5, "beta": 1.5, **_EX3_C},
            _ex3_ivp1_problem,
            _from_problem,
            _ex3_ivp1_reference,
            oracle=True,
        ),
        ExampleSpec(
            "EX3-IVP2",
            "diffusion with f(x,0) = 1 - x^2b / 2",
            "grid",
            {"alpha": 0.6, "beta": 1.5, "C": 0.1},
            _ex3_ivp2_problem,
            _from_problem,
            _ex3_ivp2_reference,
            oracle=True,
        ),
        ExampleSpec(
            "EX4",
            "telegraph-type equation, orders a, a+1, on {1, E_b(x^b)}; Laplace-series solution",
            "series",
            {"alpha": 0.3, "beta": 1.5, "a1": 1.0, "a2": 0.5, "b1": 1.0, "b2": -0.5, "kmax": 40},
            _ex4_problem,
            _ex4_initial,
            _ex4_reference,
        ),
        ExampleSpec(
            "EX6",
            "quadratic nonlinearity on {1, E_b(x^b)} with f(x,0) = 3 + 5/2 E_b(x^b)",
            "grid",
            {"alpha": 0.8, "beta": 0.9, "k0": 3.0, "k1": 2.5},
            _ex6_problem,
            _from_problem,
            _ex6_reference,
            oracle=True,
        ),
        ExampleSpec(
            "EX7-I",
            "wave equation with constant absorption, order 2a, on {1, x^b}",
            "grid",
            {"alpha": 0.7, "beta": 0.8, "a1": math.e, "a2": 1.0, "b1": None, "b2": -1.0},
            _ex7i_problem,
            _from_problem,
            _ex7i_reference,
        ),
        ExampleSpec(
            "EX7-II",
            "wave equation with constant absorption, order a+1, on {1, x^b}",
            "grid",
            {"alpha": 0.6, "beta": 0.8, "a1": math.e, "a2": 1.0, "b1": None, "b2": -1.0},
            _ex7ii_problem,
            _from_problem,
            _ex7ii_reference,
        ),
        ExampleSpec(
            "EX8",
            "KdV-type equation on {1, x^b}; power-law solution singular at t = 0",
            "reduced",
            {"alpha": 0.3, "beta": 0.8, "a": 1.0},
            _ex8_problem,
            _ex2_initial,
            _ex8_reference,
        ),
        ExampleSpec(
            "EX9",
            "nonlinear dispersion D^b D^b D^b (f^2/2) on {1, x^b, x^2b}",
            "grid",
            {"alpha": 0.5, "beta": 0.7, "a": 0.5, "b": 0.1, "c": 0.1},
            _ex9_problem,
            _ex9_initial,
            _ex9_reference,
            oracle=True,
        ),
        ExampleSpec(
            "EX10",
            "nonlinear heat D^b (f D^b f) on {1, x^b}",
            "grid",
            {"alpha": 0.5, "beta": 0.8, "a": 0.5, "b": 0.5},
            _ex10_problem,
            _ex10_initial,
            _ex10_reference,
            oracle=True,
        ),
        ExampleSpec(
            "EX11",
            "reciprocal nonlinearity on {1, E_b(-x^b)}; +/- power-law pair",
            "reduced",
            {"alpha": 0.6, "beta": 0.7, "b": 1.0, "branch": 1},
            _ex11_problem,
            _ex11_initial,
            _ex11_reference,
        ),
    ]
}


def example_ids() -> list[str]:
    return list(REGISTRY)


def get_example(example_id: str) -> ExampleSpec:
    try:
        return REGISTRY[example_id]
    except KeyError:
        raise KeyError(f"unknown example {example_id!r}; known: {', '.join(REGISTRY)}") from None
