"""Command-line front end.

    invsub list
    invsub run EX3-IVP1 --alpha 0.5 --beta 1.5 --out ./out
    invsub check problem.json
    invsub selftest [module]

Exit codes: 0 success, 1 usage or domain error, 2 verification failure
(including a non-invariant basis in ``check``).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import InvsubError, NotInvariantError
from .fdesolve import back_substitute, solve_sequential
from .problem import load_problem
from .registry import REGISTRY, get_example, ics_from_problem
from .subspace import check_invariance, reduce, render_key
from .verify import Grid, render_solution, run_example, write_outputs

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2

GRAMMAR = (
    "--alpha <r> --beta <r> --const k=v[,k=v...] --grid nx,nt,xmin,xmax,tmin,tmax "
    "--kmax <n> --out <dir> --format csv|json|both"
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(name: str):
    def conv(text: str) -> float:
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}") from None
        if not v > 0:
            raise argparse.ArgumentTypeError(f"{name} must be positive, got {text}")
        return v

    return conv


def parse_consts(text: str) -> dict:
    out = {}
    for item in text.split(","):
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise argparse.ArgumentTypeError(f"expected k=v, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"constant {key.strip()!r} is not a number: {value!r}") from None
    return out


def parse_grid(text: str) -> Grid:
    parts = text.split(",")
    if len(parts) != 6:
        raise argparse.ArgumentTypeError("grid needs six fields: nx,nt,xmin,xmax,tmin,tmax")
    try:
        nx, nt = int(parts[0]), int(parts[1])
        xmin, xmax, tmin, tmax = (float(p) for p in parts[2:])
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed grid {text!r}") from None
    try:
        return Grid(nx, nt, xmin, xmax, tmin, tmax)
    except InvsubError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="invsub", description="Exact solutions of nonlinear time-fractional PDEs by invariant subspaces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("list", help="list registry examples")

    run = sub.add_parser("run", help="solve and verify one registry example")
    run.add_argument("example")
    run.add_argument("--alpha", type=_positive("alpha"))
    run.add_argument("--beta", type=_positive("beta"))
    run.add_argument("--const", type=parse_consts, default={}, metavar="k=v[,k=v...]")
    run.add_argument("--grid", type=parse_grid, metavar="nx,nt,xmin,xmax,tmin,tmax")
    run.add_argument("--kmax", type=int)
    run.add_argument("--out", type=Path)
    run.add_argument("--format", choices=("csv", "json", "both"), default="both")
    run.add_argument("--no-oracle", action="store_true", help="skip the Adams oracle comparison")

    chk = sub.add_parser("check", help="check invariance of a JSON problem and solve it when possible")
    chk.add_argument("problem", type=Path)
    chk.add_argument("--kmax", type=int, default=40)
    chk.add_argument("--out", type=Path)

    st = sub.add_parser("selftest", help="run the built-in invariant suites")
    st.add_argument("module", nargs="?", default="all")
    return p


def cmd_list(out) -> int:
    width = max(len(k) for k in REGISTRY)
    for eid, spec in REGISTRY.items():
        print(f"{eid:<{width}}  {spec.route:<7}  {spec.description}", file=out)
    return EXIT_OK


def cmd_run(args, out) -> int:
    spec = get_example(args.example)
    overrides = dict(args.const)
    unknown = sorted(set(overrides) - set(spec.defaults))
    if unknown:
        raise UsageError(f"{spec.id} has no constant(s) {', '.join(unknown)}; known: {', '.join(sorted(spec.defaults))}")
    if args.alpha is not None:
        overrides["alpha"] = args.alpha
    if args.beta is not None:
        overrides["beta"] = args.beta
    if args.kmax is not None:
        if args.kmax < 10:
            raise UsageError("--kmax must be at least 10")
        overrides["kmax"] = args.kmax
    result = run_example(spec.id, overrides, args.grid, with_oracle=not args.no_oracle)
    rep = result.report
    print(f"example   {result.example}", file=out)
    print(f"solution  f(x,t) = {result.solution}", file=out)
    for o in result.outcomes:
        if o.validity:
            print(f"validity  {'; '.join(o.validity)}", file=out)
        for alt in o.alternatives:
            print(f"also      {alt.render()}", file=out)
    print(f"route     {rep.route}  max|res| = {rep.max_abs:.3e}  max rel = {rep.max_rel:.3e}  tol = {rep.tolerance:g}", file=out)
    for key in rep.flagged:
        print(f"flagged   {key}: {rep.blocks[key]:.3e}", file=out)
    if result.oracle is not None:
        print(f"oracle    max rel deviation = {result.oracle:.3e}", file=out)
    if args.out is not None:
        for path in write_outputs(result, args.out, args.format):
            print(f"wrote     {path}", file=out)
    print("PASS" if result.passed else "FAIL", file=out)
    return EXIT_OK if result.passed else EXIT_FAILED


def cmd_check(args, out) -> int:
    problem = load_problem(args.problem)
    report = check_invariance(problem.operator, problem.basis)
    print(f"basis     {problem.basis.render()}", file=out)
    if not report.invariant:
        keys = ", ".join(render_key(k) for k in report.offending_keys)
        print(f"NOT INVARIANT; offending keys: {keys}", file=out)
        return EXIT_FAILED
    system = reduce(problem.operator, problem.time_op, problem.basis)
    print("invariant", file=out)
    print(system.render(), file=out)
    summary = {"invariant": True, "system": system.render()}
    status = EXIT_OK
    if problem.ic_levels:
        outs = solve_sequential(system, ics_from_problem(problem), kmax=args.kmax)
        exprs = [o.expr for o in outs]
        solution = render_solution(exprs, problem.basis)
        print(f"solution  f(x,t) = {solution}", file=out)
        summary["solution"] = solution
        if any(e.series for e in exprs):
            print("series solution; use a registry run for the numerical residual check", file=out)
        else:
            mismatch = max(back_substitute(system, exprs), default=0.0)
            print(f"back-substitution mismatch {mismatch:.3e}", file=out)
            summary["mismatch"] = mismatch
            if not mismatch < 1e-12:
                status = EXIT_FAILED
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / f"{args.problem.stem}.json"
        path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        print(f"wrote     {path}", file=out)
    return status


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "list":
            return cmd_list(out)
        if args.command == "run":
            return cmd_run(args, out)
        if args.command == "check":
            return cmd_check(args, out)
        from .selftest import run_selftest

        return EXIT_OK if run_selftest(args.module, out) else EXIT_FAILED
    except UsageError as exc:
        print(f"invsub: {exc}", file=err)
        print(f"usage: invsub list | run <id> [{GRAMMAR}] | check <problem.json> | selftest [module]", file=err)
        return EXIT_USAGE
    except NotInvariantError as exc:
        print(f"invsub: {exc}", file=err)
        return EXIT_FAILED
    except KeyError as exc:
        print(f"invsub: {exc.args[0]}", file=err)
        return EXIT_USAGE
    except (InvsubError, OSError) as exc:
        print(f"invsub: {type(exc).__name__}: {exc}", file=err)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
