"""Invariant subspace method for nonlinear time-fractional PDEs.

The pipeline: build an operator AST, check that a candidate basis is
invariant (:mod:`invsub.subspace`), reduce the PDE to a system of
fractional ODEs, solve it in closed form (:mod:`invsub.fdesolve`) and
verify the result numerically (:mod:`invsub.verify`).
"""

from .errors import (
    CommensurabilityError,
    ConvergenceError,
    DenominatorBlowupError,
    DivisionBySymbolicZero,
    DomainError,
    InvsubError,
    NoRealSolutionError,
    NotInBasisError,
    NotInvariantError,
    PoleError,
    RecipOnNonConstant,
    UnsupportedSystemError,
    UnsupportedTermError,
)
from .fdesolve import solve_sequential
from .problem import load_problem, problem_from_dict
from .subspace import SubspaceBasis, TimeOperatorSpec, apply_operator, check_invariance, reduce
from .verify import Grid, run_example

__version__ = "0.1.0"
