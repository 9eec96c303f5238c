"""Inequality-constraint PDMM: distributed solver, reference oracles and schedule simulator."""

from .engine import Mode, PDMMSolver, RunResult, ScheduleConfig, Trace, recover_duals, run
from .errors import (
    ConfigError,
    DimensionMismatch,
    DisconnectedGraph,
    DuplicateEdge,
    EmptyIntersection,
    Infeasible,
    NonSymmetricQ,
    SingularSystem,
    TooManyRows,
    Unbounded,
)
from .oracle import DenseProblem, KktReport, kkt_check, solve_active_set, solve_lp_vertex
from .problem import (
    DirectedEdgeLayout,
    EdgeConstraintBlock,
    Kind,
    Linear,
    Node,
    NodeConstraintBlock,
    ProblemGraph,
    Quadratic,
    build_layout,
    build_problem,
    lower_node_constraints,
)
from .problem_file import load_problem, save_problem
from .reflection import project_all, project_pair, reflect_all, reflect_pair

__all__ = [name for name in dir() if not name.startswith("_")]
