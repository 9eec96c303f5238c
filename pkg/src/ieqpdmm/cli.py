"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import scenarios
from .engine import PDMMSolver, ScheduleConfig, run
from .errors import ConfigError, OracleError, ProblemError, SingularSystem, TooManyRows
from .oracle import kkt_check, solve_active_set, solve_lp_vertex
from .problem import Linear, ProblemGraph, split
from .problem_file import load_problem, save_problem

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_NONCONVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def reference_solution(problem: ProblemGraph) -> np.ndarray:
    """Stacked optimum from the vertex oracle (all-linear costs) or the active-set oracle."""
    if all(isinstance(node.objective, Linear) for node in problem.nodes):
        return solve_lp_vertex(problem)
    return solve_active_set(problem)[0]


def _add_engine_flags(p):
    p.add_argument("--mode", choices=["sync", "stoch"], default="sync")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--iters", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0, help="schedule seed")
    p.add_argument("--loss-rate", type=float, default=0.0)
    p.add_argument("--active-prob", type=float, default=1.0)
    p.add_argument("--tol-primal", type=float, default=1e-6)
    p.add_argument("--tol-residual", type=float, default=1e-8)
    p.add_argument("--tol-kkt", type=float, default=None)
    p.add_argument("--trace-every", type=int, default=1)
    p.add_argument("--threads", type=int, default=1)


def _config(args, **overrides) -> ScheduleConfig:
    kw = dict(
        mode=args.mode, alpha=args.alpha, c=args.c, max_iters=args.iters, seed=args.seed,
        loss_rate=args.loss_rate, node_active_prob=args.active_prob, tol_primal=args.tol_primal,
        tol_residual=args.tol_residual, tol_kkt=args.tol_kkt, trace_every=args.trace_every, threads=args.threads,
    )
    kw.update(overrides)
    try:
        return ScheduleConfig(**kw)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


def _load(path) -> ProblemGraph:
    try:
        return load_problem(path)
    except (OSError, json.JSONDecodeError, ProblemError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read problem {path}: {exc}") from None


def cmd_generate(args) -> int:
    out = Path(args.output)
    meta = {"scenario": args.kind, "seed": args.seed}
    if args.kind == "toy":
        save_problem(scenarios.gen_toy(args.seed), out, meta | {"a": scenarios.toy_targets(args.seed).tolist()})
        written = [out]
    elif args.kind == "geometric":
        scen = scenarios.gen_geometric(args.n, args.seed)
        save_problem(scen.problem, out, meta | {"n": args.n, "radius": scen.radius, "points": scen.points.tolist()})
        written = [out]
    elif args.kind == "random":
        save_problem(scenarios.gen_random(args.n, args.seed), out, meta | {"n": args.n})
        written = [out]
    else:
        scen = scenarios.gen_localisation(args.sensors, args.seed)
        meta |= {"sensors": scen.sensors.tolist(), "target": scen.target.tolist()}
        stem = out.with_suffix("")
        written = [save_problem(scen.chebyshev, f"{stem}_chebyshev.json", meta | {"lp": "chebyshev"})]
        for k, rect in enumerate(scen.rectangles):
            normal = scenarios.RECTANGLE_NORMALS[k].tolist()
            written.append(save_problem(rect, f"{stem}_rect{k}.json", meta | {"lp": "rectangle", "normal": normal}))
    for path in written:
        print(path)
    return EXIT_OK


def _write_solution(path, problem, x, duals):
    Path(path).write_text(json.dumps({"x": [v.tolist() for v in split(x, problem)], "duals": duals.tolist()}, indent=1) + "\n")


def cmd_solve(args) -> int:
    problem = _load(args.problem)
    config = _config(args)
    x_star = reference_solution(problem) if args.oracle else None
    t0 = time.perf_counter()
    result = run(problem, config, oracle_solution=x_star)
    wall = time.perf_counter() - t0
    if args.trace:
        result.trace.to_csv(args.trace)
    if args.solution_out:
        _write_solution(args.solution_out, problem, result.x, result.duals)
    last = result.trace.rows[-1] if result.trace.rows else (0, None, float("nan"), float("nan"), float("nan"))
    perr = "n/a" if last[1] is None else f"{last[1]:.3e}"
    print(
        f"converged={result.converged} iterations={result.trace.iterations} primal_error={perr} "
        f"fixed_point_residual={last[2]:.3e} max_violation={last[3]:.3e} objective={last[4]:.10g} wall={wall:.3f}s"
    )
    return EXIT_OK if result.converged else EXIT_NONCONVERGED


def cmd_verify(args) -> int:
    problem = _load(args.problem)
    try:
        reference_solution(problem)
    except TooManyRows:
        pass
    except OracleError as exc:
        print(f"oracle: {type(exc).__name__}: {exc}")
        return EXIT_NUMERIC
    converged = True
    if args.solution:
        sol = json.loads(Path(args.solution).read_text())
        x = np.concatenate([np.ravel(v) for v in sol["x"]]) if sol["x"] else np.zeros(0)
        duals = np.asarray(sol["duals"], dtype=float)
    else:
        config = _config(args, tol_kkt=args.tol if args.tol_kkt is None else args.tol_kkt)
        result = run(problem, config)
        converged = result.converged
        x, duals = result.x, result.duals
        print(f"engine: converged={converged} iterations={result.trace.iterations}")
    report = kkt_check(problem, x, duals)
    for line in report.lines():
        print(line)
    if report.ok(args.tol):
        print(f"KKT residuals within {args.tol:g}")
        return EXIT_OK
    print(f"KKT residuals exceed {args.tol:g}")
    return EXIT_NONCONVERGED if not converged else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ieqpdmm", description="Distributed optimisation with inequality-constraint PDMM.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="write a scenario problem file")
    gen.add_argument("kind", choices=["toy", "geometric", "localisation", "random"])
    gen.add_argument("--seed", type=int, default=0, help="scenario seed")
    gen.add_argument("--n", type=int, default=50, help="node count (geometric, random)")
    gen.add_argument("--sensors", type=int, default=4)
    gen.add_argument("-o", "--output", required=True,
                     help="output file; localisation writes <stem>_chebyshev.json and <stem>_rect{0..3}.json")
    gen.set_defaults(func=cmd_generate)

    solve = sub.add_parser("solve", help="run the iteration on a problem file")
    solve.add_argument("problem")
    _add_engine_flags(solve)
    solve.add_argument("--oracle", action="store_true", help="compute the reference optimum and report primal error")
    solve.add_argument("--trace", help="CSV trace output path")
    solve.add_argument("--solution-out", help="write x and row duals as JSON")
    solve.set_defaults(func=cmd_solve)

    verify = sub.add_parser("verify", help="KKT-check an engine run or a stored solution")
    verify.add_argument("problem")
    verify.add_argument("--solution", help="JSON with 'x' (per node) and 'duals' (per row)")
    verify.add_argument("--tol", type=float, default=1e-6)
    _add_engine_flags(verify)
    verify.set_defaults(func=cmd_verify, iters=20000)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ieqpdmm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SingularSystem, OracleError) as exc:
        print(f"ieqpdmm: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"ieqpdmm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
