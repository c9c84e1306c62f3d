"""JSON problem files (schema ``invsub-problem/1``).

A problem names the time operator, the spatial operator as a nested node
tree, a candidate basis and optional initial data::

    {
      "schema": "invsub-problem/1",
      "time_op": {"mode": "A", "alpha": 0.5, "lambdas": [1.0]},
      "operator": {"node": "IntPow", "child": {"node": "F"}, "exponent": 2},
      "basis": [{"power": 0}, {"power": 1}],
      "ic": [{"coeff": 1.0, "power": 1}]
    }
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import DomainError
from .fraccalc import FuncExpr, MLFactor, Monomial
from .subspace import (
    Add,
    Const,
    F,
    FracDx,
    IntPow,
    Mul,
    OperatorExpr,
    Recip,
    Scale,
    SubspaceBasis,
    TimeOperatorSpec,
)

__all__ = ["SCHEMA", "Problem", "load_problem", "problem_from_dict", "operator_to_dict", "basis_to_dict"]

SCHEMA = "invsub-problem/1"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class MLSchema(_Strict):
    order: float = Field(gt=0)
    rate: float
    mult: int = Field(default=1, ge=1)


class TermSchema(_Strict):
    coeff: float = 1.0
    power: float = 0.0
    ml: list[MLSchema] = []

    def monomial(self) -> Monomial:
        return Monomial(self.coeff, self.power, tuple(MLFactor(m.order, m.rate, m.mult) for m in self.ml))


class TimeOpSchema(_Strict):
    mode: Literal["A", "B"]
    alpha: float = Field(gt=0)
    lambdas: list[float] = Field(min_length=1)


class NodeF(_Strict):
    node: Literal["F"]


class NodeFracDx(_Strict):
    node: Literal["FracDx"]
    order: float = Field(gt=0)
    child: "Node"


class NodeAdd(_Strict):
    node: Literal["Add"]
    children: list["Node"] = Field(min_length=1)


class NodeMul(_Strict):
    node: Literal["Mul"]
    children: list["Node"] = Field(min_length=1)


class NodeScale(_Strict):
    node: Literal["Scale"]
    factor: float
    child: "Node"


class NodeIntPow(_Strict):
    node: Literal["IntPow"]
    child: "Node"
    exponent: int = Field(ge=2)


class NodeConst(_Strict):
    node: Literal["Const"]
    value: float


class NodeRecip(_Strict):
    node: Literal["Recip"]
    child: "Node"


Node = Annotated[
    Union[NodeF, NodeFracDx, NodeAdd, NodeMul, NodeScale, NodeIntPow, NodeConst, NodeRecip],
    Field(discriminator="node"),
]

for _m in (NodeFracDx, NodeAdd, NodeMul, NodeScale, NodeIntPow, NodeRecip):
    _m.model_rebuild()


class ProblemSchema(_Strict):
    schema_: Literal["invsub-problem/1"] = Field(alias="schema")
    time_op: TimeOpSchema
    operator: Node
    basis: list[TermSchema] = Field(min_length=1)
    ic: list[TermSchema] | None = None
    ic_derivatives: list[list[TermSchema]] = []

    @model_validator(mode="after")
    def _basis_monic(self) -> "ProblemSchema":
        for t in self.basis:
            if t.coeff == 0:
                raise ValueError("basis coefficients must be nonzero")
        return self


def _to_operator(n) -> OperatorExpr:
    if isinstance(n, NodeF):
        return F()
    if isinstance(n, NodeFracDx):
        return FracDx(n.order, _to_operator(n.child))
    if isinstance(n, NodeAdd):
        return Add(tuple(_to_operator(c) for c in n.children))
    if isinstance(n, NodeMul):
        return Mul(tuple(_to_operator(c) for c in n.children))
    if isinstance(n, NodeScale):
        return Scale(n.factor, _to_operator(n.child))
    if isinstance(n, NodeIntPow):
        return IntPow(_to_operator(n.child), n.exponent)
    if isinstance(n, NodeConst):
        return Const(n.value)
    return Recip(_to_operator(n.child))


def operator_to_dict(op: OperatorExpr) -> dict:
    if isinstance(op, F):
        return {"node": "F"}
    if isinstance(op, FracDx):
        return {"node": "FracDx", "order": op.order, "child": operator_to_dict(op.child)}
    if isinstance(op, (Add, Mul)):
        return {"node": type(op).__name__, "children": [operator_to_dict(c) for c in op.children]}
    if isinstance(op, Scale):
        return {"node": "Scale", "factor": op.factor, "child": operator_to_dict(op.child)}
    if isinstance(op, IntPow):
        return {"node": "IntPow", "child": operator_to_dict(op.child), "exponent": op.exponent}
    if isinstance(op, Const):
        return {"node": "Const", "value": op.value}
    if isinstance(op, Recip):
        return {"node": "Recip", "child": operator_to_dict(op.child)}
    raise TypeError(f"not an operator node: {op!r}")


def _term_dict(m: Monomial) -> dict:
    return {
        "coeff": float(m.coeff),
        "power": m.power,
        "ml": [{"order": f.order, "rate": f.rate, "mult": f.mult} for f in m.ml_factors],
    }


def basis_to_dict(basis: SubspaceBasis) -> list[dict]:
    return [_term_dict(e) for e in basis.elements]


def expansion_to_dict(expr: FuncExpr) -> list[dict]:
    return [_term_dict(m) for m in expr.terms]


class Problem:
    """Validated problem: operator AST, time operator, basis and initial data."""

    def __init__(
        self,
        time_op: TimeOperatorSpec,
        operator: OperatorExpr,
        basis: SubspaceBasis,
        ic_levels: tuple = (),
    ) -> None:
        self.time_op = time_op
        self.operator = operator
        self.basis = basis
        self.ic_levels = tuple(ic_levels)

    def to_dict(self) -> dict:
        d: dict[str, Any] = {
            "schema": SCHEMA,
            "time_op": {"mode": self.time_op.mode, "alpha": self.time_op.alpha, "lambdas": list(self.time_op.lambdas)},
            "operator": operator_to_dict(self.operator),
            "basis": basis_to_dict(self.basis),
        }
        if self.ic_levels:
            d["ic"] = expansion_to_dict(self.ic_levels[0])
            d["ic_derivatives"] = [expansion_to_dict(e) for e in self.ic_levels[1:]]
        return d


def problem_from_dict(data: dict) -> Problem:
    try:
        p = ProblemSchema.model_validate(data)
    except ValidationError as exc:
        raise DomainError(f"invalid problem: {exc}") from exc
    time_op = TimeOperatorSpec(p.time_op.mode, p.time_op.alpha, tuple(p.time_op.lambdas))
    basis = SubspaceBasis(tuple(t.monomial() for t in p.basis))
    levels = []
    if p.ic is not None:
        levels.append(FuncExpr.from_terms(t.monomial() for t in p.ic))
        levels.extend(FuncExpr.from_terms(t.monomial() for t in lvl) for lvl in p.ic_derivatives)
    return Problem(time_op, _to_operator(p.operator), basis, tuple(levels))


def load_problem(path: str | Path) -> Problem:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: not valid JSON ({exc})") from exc
    return problem_from_dict(data)
