"""Iteration engine: synchronous, averaged and stochastic schedules.

One application of the operator ``T`` maps the auxiliary vector ``z`` to

    x    = node-wise minimiser given z
    y    = z + 2c (C x - d)
    T(z) = reflect_all(y)

Stochastic schedules compute ``T(z)`` from the full current ``z`` and then
refresh only the slots selected by an update mask.  Averaging with weight
``alpha`` is applied to the refreshed slots only.
"""

from __future__ import annotations

import csv
import enum
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError
from .local_solver import NodeSystem
from .oracle import DenseProblem, kkt_check
from .problem import ProblemGraph, build_layout, lower_node_constraints, node_offsets, split
from .reflection import project_all, reflect_all

TRACE_HEADER = ["iter", "primal_error", "fixed_point_residual", "max_violation", "objective"]


class Mode(str, enum.Enum):
    SYNC = "sync"
    STOCH = "stoch"


@dataclass(frozen=True)
class ScheduleConfig:
    mode: Mode = Mode.SYNC
    alpha: float = 1.0
    c: float = 0.5
    node_active_prob: float = 1.0
    loss_rate: float = 0.0
    seed: int = 0
    max_iters: int = 5000
    tol_primal: float = 1e-6
    # None disables the fixed-point residual test
    tol_residual: Optional[float] = 1e-8
    # None disables the KKT certificate test on (x, projected duals)
    tol_kkt: Optional[float] = None
    # iterations of primal stagnation needed to stop when no oracle is given
    patience: int = 20
    trace_every: int = 1
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.c > 0.0:
            raise ConfigError(f"penalty c must be positive, got {self.c}")
        if not 0.0 < self.node_active_prob <= 1.0:
            raise ConfigError(f"node_active_prob must lie in (0, 1], got {self.node_active_prob}")
        if not 0.0 <= self.loss_rate < 1.0:
            raise ConfigError(f"loss_rate must lie in [0, 1), got {self.loss_rate}")
        if self.max_iters < 0 or self.trace_every < 1 or self.threads < 1 or self.patience < 1:
            raise ConfigError("max_iters >= 0, trace_every >= 1, threads >= 1 and patience >= 1 required")


@dataclass
class IterationState:
    x: np.ndarray  # stacked primal vector
    y: np.ndarray
    z: np.ndarray
    mu: np.ndarray
    k: int = 0


@dataclass(frozen=True)
class Application:
    """Result of one application of ``T``."""

    z_next: np.ndarray
    x: np.ndarray
    y: np.ndarray
    Cx: np.ndarray


class PDMMSolver:
    """Node systems and layout for one problem at a fixed penalty ``c``."""

    def __init__(self, problem: ProblemGraph, c: float = 0.5, threads: int = 1):
        self.problem = problem
        self.graph = lower_node_constraints(problem)
        self.layout = build_layout(self.graph)
        self.c = float(c)
        self.threads = threads
        self.offsets = node_offsets(self.graph)
        lay = self.layout
        d = lay.d
        self.systems = [
            NodeSystem.build(i, node, lay.node_matrix(i, node.dim), d[lay.node_slots[i]], self.c)
            for i, node in enumerate(self.graph.nodes)
        ]
        # host for activity sampling: dummies follow the node they were created for
        self._host = np.array([n.dummy_of if n.is_dummy else i for i, n in enumerate(self.graph.nodes)], dtype=int)
        m = lay.m
        self._row_lo = lay.owner[:m]
        self._row_hi = lay.owner[m:]
        edge_ids, self._row_edge = np.unique(lay.edge, return_inverse=True)
        self._edge_is_dummy = np.array([self.graph.nodes[self.graph.edges[k].i].is_dummy or self.graph.nodes[self.graph.edges[k].j].is_dummy for k in edge_ids], dtype=bool)

    @property
    def size(self) -> int:
        return self.layout.size

    def _node_update(self, i, z):
        sys = self.systems[i]
        slots = self.layout.node_slots[i]
        zi = z[slots]
        xi = sys.affine(zi)
        Cxi = sys.C @ xi
        yi = zi + 2.0 * self.c * (Cxi - sys.d)
        return xi, Cxi, yi

    def apply_T(self, z: np.ndarray) -> Application:
        z = np.asarray(z, dtype=float)
        if z.size != self.size:
            raise ValueError(f"expected {self.size} slots, got {z.size}")
        if self.threads > 1:
            with ThreadPoolExecutor(self.threads) as pool:
                results = list(pool.map(lambda i: self._node_update(i, z), range(len(self.systems))))
        else:
            results = [self._node_update(i, z) for i in range(len(self.systems))]
        x = np.zeros(self.offsets[-1])
        y = np.empty(self.size)
        Cx = np.empty(self.size)
        for i, (xi, Cxi, yi) in enumerate(results):
            x[self.offsets[i]:self.offsets[i + 1]] = xi
            slots = self.layout.node_slots[i]
            y[slots] = yi
            Cx[slots] = Cxi
        return Application(reflect_all(y, self.layout.is_eq), x, y, Cx)

    def T(self, z):
        return self.apply_T(z).z_next

    def mu_from(self, z, app: Application) -> np.ndarray:
        return z + self.c * (app.Cx - self.layout.d)

    def initial_state(self, z0=None) -> IterationState:
        if z0 is None:
            z0 = self.problem.z0 if self.problem.z0 is not None else np.zeros(self.size)
        z0 = np.array(z0, dtype=float)
        if z0.size != self.size:
            raise ValueError(f"z0 has {z0.size} entries, layout has {self.size} slots")
        app = self.apply_T(z0)
        return IterationState(x=app.x, y=app.y, z=z0, mu=self.mu_from(z0, app), k=0)

    # schedules

    def _advance(self, state, app, z_new):
        return IterationState(x=app.x, y=app.y, z=z_new, mu=self.mu_from(state.z, app), k=state.k + 1)

    @staticmethod
    def _blend(z, Tz, alpha):
        return Tz if alpha == 1.0 else (1.0 - alpha) * z + alpha * Tz

    def step_synchronous(self, state: IterationState, config: ScheduleConfig, app: Application | None = None) -> IterationState:
        app = app or self.apply_T(state.z)
        return self._advance(state, app, self._blend(state.z, app.z_next, config.alpha))

    def step_stochastic(self, state: IterationState, mask, config: ScheduleConfig, app: Application | None = None) -> IterationState:
        mask = np.asarray(mask, dtype=bool)
        if mask.size != self.size:
            raise ValueError(f"mask has {mask.size} bits, layout has {self.size} slots")
        app = app or self.apply_T(state.z)
        z_new = np.where(mask, self._blend(state.z, app.z_next, config.alpha), state.z)
        return self._advance(state, app, z_new)

    def sample_mask(self, rng: np.random.Generator, config: ScheduleConfig) -> np.ndarray:
        """Bit ``(j|i)`` is set when ``i`` is active and its transmission to ``j`` survives."""
        n = len(self.graph.nodes)
        active = rng.random(n) < config.node_active_prob
        active = active[self._host]
        survive = rng.random((self._edge_is_dummy.size, 2)) >= config.loss_rate
        survive[self._edge_is_dummy] = True
        m = self.layout.m
        mask = np.empty(2 * m, dtype=bool)
        # slot r is (lo|hi): refreshed by a transmission hi -> lo
        mask[:m] = active[self._row_hi] & survive[self._row_edge, 1]
        mask[m:] = active[self._row_lo] & survive[self._row_edge, 0]
        return mask

    def row_residual(self, Cx: np.ndarray) -> np.ndarray:
        m = self.layout.m
        return Cx[:m] + Cx[m:] - self.layout.b

    def max_violation(self, Cx: np.ndarray) -> float:
        r = self.row_residual(Cx)
        if r.size == 0:
            return 0.0
        eq = self.layout.is_eq
        viol = np.where(eq, np.abs(r), np.maximum(r, 0.0))
        return float(viol.max())

    def duals(self, y: np.ndarray) -> np.ndarray:
        """Row duals from the projection of ``y`` onto the lifted dual set."""
        return project_all(y, self.layout.is_eq)[: self.layout.m]

    def kkt(self, state: IterationState):
        if not hasattr(self, "_dense"):
            self._dense = DenseProblem.from_graph(self.graph)
        return kkt_check(self._dense, state.x, self.duals(state.y))

    def objective(self, x: np.ndarray) -> float:
        return float(sum(node.objective.value(xi) for node, xi in zip(self.graph.nodes, split(x, self.graph))))


def recover_duals(mu: np.ndarray) -> np.ndarray:
    """Row duals as the mean of the two partner slots.

    Exact at a fixed point of ``T``.  Under the non-averaged iteration the
    slots can settle into an alternating pattern; use ``RunResult.duals``
    (the projection of ``y``) there.
    """
    mu = np.asarray(mu, dtype=float)
    m = mu.size // 2
    return 0.5 * (mu[:m] + mu[m:])


@dataclass
class Trace:
    rows: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0

    def append(self, k, primal_error, residual, violation, objective):
        self.rows.append((k, primal_error, residual, violation, objective))

    def column(self, name):
        idx = TRACE_HEADER.index(name)
        return np.array([np.nan if r[idx] is None else r[idx] for r in self.rows], dtype=float)

    def first_below(self, threshold: float, name: str = "primal_error") -> Optional[int]:
        for row in self.rows:
            v = row[TRACE_HEADER.index(name)]
            if v is not None and v <= threshold:
                return row[0]
        return None

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for row in self.rows:
            writer.writerow(["" if v is None else (str(v) if isinstance(v, int) else repr(float(v))) for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


@dataclass
class RunResult:
    trace: Trace
    state: IterationState
    solver: PDMMSolver

    @property
    def converged(self) -> bool:
        return self.trace.converged

    @property
    def x(self) -> np.ndarray:
        return self.state.x

    @property
    def duals(self) -> np.ndarray:
        return self.solver.duals(self.state.y)


def run(problem: ProblemGraph, config: ScheduleConfig, oracle_solution=None, z0=None, solver: PDMMSolver | None = None) -> RunResult:
    """Iterate until ``max_iters`` or the stopping rule holds.

    With an oracle the primal test is ``||x - x*|| <= tol_primal``; without
    one it is ``||x_k - x_{k-1}|| <= tol_primal`` for ``patience`` consecutive
    iterations.  For ``alpha < 1`` the fixed-point residual must also drop
    below ``tol_residual``, and with ``tol_kkt`` set the KKT residuals of
    ``x`` and the projected duals must too.  Non-convergence is reported through
    ``trace.converged`` rather than an exception.
    """
    solver = solver or PDMMSolver(problem, config.c, threads=config.threads)
    if solver.c != config.c:
        raise ConfigError("solver penalty does not match config.c")
    x_star = None
    if oracle_solution is not None:
        x_star = np.concatenate([np.ravel(v) for v in oracle_solution]) if isinstance(oracle_solution, (list, tuple)) else np.ravel(oracle_solution)
    rng = np.random.default_rng(config.seed)
    state = solver.initial_state(z0)
    trace = Trace()
    need_residual = config.alpha < 1.0 and config.tol_residual is not None
    still = 0
    x_prev = state.x
    for k in range(config.max_iters):
        app = solver.apply_T(state.z)
        residual = float(np.linalg.norm(state.z - app.z_next))
        if config.mode is Mode.SYNC:
            new = solver.step_synchronous(state, config, app)
        else:
            new = solver.step_stochastic(state, solver.sample_mask(rng, config), config, app)
        primal_error = None if x_star is None else float(np.linalg.norm(app.x - x_star))
        if x_star is not None:
            primal_ok = primal_error <= config.tol_primal
        else:
            still = still + 1 if np.linalg.norm(app.x - x_prev) <= config.tol_primal else 0
            primal_ok = still >= config.patience
        x_prev = app.x
        done = primal_ok and (not need_residual or residual <= config.tol_residual)
        if done and config.tol_kkt is not None:
            done = solver.kkt(new).worst() <= config.tol_kkt
        if k % config.trace_every == 0 or done or k == config.max_iters - 1:
            trace.append(k, primal_error, residual, solver.max_violation(app.Cx), solver.objective(app.x))
        state = new
        if done:
            trace.converged = True
            break
    trace.iterations = state.k
    return RunResult(trace, state, solver)
