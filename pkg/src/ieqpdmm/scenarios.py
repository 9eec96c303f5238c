"""Deterministic problem generators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyIntersection, Infeasible, Unbounded
from .oracle import DenseProblem, solve_lp_vertex
from .problem import EdgeConstraintBlock, Kind, Linear, Node, NodeConstraintBlock, ProblemGraph, Quadratic

EQ, INEQ = Kind.EQ, Kind.INEQ
MAX_RESAMPLES = 100


def _scalar_quadratic(a: float) -> Node:
    return Node(1, Quadratic.squared_distance([a]))


def gen_toy(seed: int = 0) -> ProblemGraph:
    """Three-node triangle with mixed node and edge constraints.

    Node constraints ``x1 >= 0`` and ``x2 = 1``; edge constraints
    ``x1 = x2``, ``x2 >= x3`` and ``x1 + x3 <= 2``.  Costs are
    ``0.5 (x_i - a_i)^2`` with standard normal ``a``.  Nodes are 0-based.
    """
    a = np.random.default_rng(seed).standard_normal(3)
    nodes = [_scalar_quadratic(v) for v in a]
    edges = [
        EdgeConstraintBlock(0, 1, [[1.0]], [[-1.0]], [0.0], [EQ]),
        EdgeConstraintBlock(1, 2, [[-1.0]], [[1.0]], [0.0], [INEQ]),
        EdgeConstraintBlock(0, 2, [[1.0]], [[1.0]], [2.0], [INEQ]),
    ]
    node_constraints = [
        NodeConstraintBlock(0, [[-1.0]], [0.0], [INEQ]),
        NodeConstraintBlock(1, [[1.0]], [1.0], [EQ]),
    ]
    return ProblemGraph(nodes, edges, node_constraints)


def toy_targets(seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal(3)


def connectivity_radius(n: int) -> float:
    return math.sqrt(2.0 * math.log(n) / n)


def geometric_edges(points: np.ndarray, radius: float) -> list[tuple[int, int]]:
    points = np.asarray(points, dtype=float)
    n = len(points)
    dist = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
    return [(i, j) for i in range(n) for j in range(i + 1, n) if dist[i, j] <= radius]


def _connected(n: int, edges) -> bool:
    seen, stack = {0}, [0]
    adj = {i: [] for i in range(n)}
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    while stack:
        for v in adj[stack.pop()]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == n


def connected_geometric_graph(n: int, rng: np.random.Generator, radius: float | None = None, dim: int = 2):
    """Uniform points in the unit square, redrawn until the graph is connected."""
    radius = connectivity_radius(n) if radius is None else radius
    for _ in range(MAX_RESAMPLES):
        points = rng.random((n, dim))
        edges = geometric_edges(points, radius)
        if _connected(n, edges):
            return points, edges, radius
    raise RuntimeError(f"no connected geometric graph with n={n}, r={radius:.4f} after {MAX_RESAMPLES} draws")


@dataclass(eq=False)
class GeometricScenario:
    problem: ProblemGraph
    points: np.ndarray
    edges: list
    radius: float
    a: np.ndarray


def gen_geometric(n: int, seed: int = 0, points=None) -> GeometricScenario:
    """Ordered-chain QP ``x_i <= x_j`` (``i < j``) on a random geometric graph."""
    if n < 2:
        raise ValueError("gen_geometric needs n >= 2")
    rng = np.random.default_rng(seed)
    radius = connectivity_radius(n)
    if points is None:
        points, edges, radius = connected_geometric_graph(n, rng, radius)
    else:
        points = np.asarray(points, dtype=float)
        edges = geometric_edges(points, radius)
    a = rng.standard_normal(n)
    nodes = [_scalar_quadratic(v) for v in a]
    blocks = [EdgeConstraintBlock(i, j, [[1.0]], [[-1.0]], [0.0], [INEQ]) for i, j in edges]
    return GeometricScenario(ProblemGraph(nodes, blocks), points, edges, radius, a)


def _signed_uniform(rng, rows):
    # magnitudes bounded away from zero keep the rows well conditioned
    return (rng.uniform(0.5, 1.5, rows) * rng.choice([-1.0, 1.0], rows)).reshape(rows, 1)


def gen_random(n: int, seed: int = 0, max_ineq: int = 8, p_extra: float = 0.4, p_eq: float = 0.25) -> ProblemGraph:
    """Random connected graph of scalar nodes with strongly convex costs.

    Rows are built around a random point ``x0`` so the feasible set is never
    empty; inequality rows beyond ``max_ineq`` become equalities.  Row
    coefficients have magnitude in ``[0.5, 1.5]``.
    """
    rng = np.random.default_rng(seed)
    pairs = [(int(rng.integers(0, j)), j) for j in range(1, n)]
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in pairs and rng.random() < p_extra:
                pairs.append((i, j))
    x0 = rng.standard_normal(n)
    nodes = [Node(1, Quadratic([[rng.uniform(0.5, 2.0)]], [rng.standard_normal() * 2.0])) for _ in range(n)]
    blocks = []
    n_ineq = 0
    for i, j in pairs:
        rows = 1 + int(rng.random() < 0.3)
        A_ij = _signed_uniform(rng, rows)
        A_ji = _signed_uniform(rng, rows)
        kinds = []
        for _ in range(rows):
            if rng.random() >= p_eq and n_ineq < max_ineq:
                kinds.append(INEQ)
                n_ineq += 1
            else:
                kinds.append(EQ)
        slack = np.where([k is INEQ for k in kinds], rng.uniform(0.0, 0.5, rows), 0.0)
        b = A_ij[:, 0] * x0[i] + A_ji[:, 0] * x0[j] + slack
        blocks.append(EdgeConstraintBlock(i, j, A_ij, A_ji, b, kinds))
    return ProblemGraph(nodes, blocks)


def _left_normal(phi: float) -> np.ndarray:
    return np.array([-math.sin(phi), math.cos(phi)])


def cone_halfplanes(sensor, direction: float, half_angle: float):
    """Two rows ``a'p <= b`` cutting out the wedge ``direction +- half_angle``."""
    sensor = np.asarray(sensor, dtype=float)
    a_upper = _left_normal(direction + half_angle)
    a_lower = -_left_normal(direction - half_angle)
    A = np.vstack([a_upper, a_lower])
    return A, A @ sensor


UNIT_BOX = (np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]]), np.array([0.0, 1.0, 0.0, 1.0]))
RECTANGLE_NORMALS = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])


@dataclass(eq=False)
class Localisation:
    sensors: np.ndarray
    target: np.ndarray
    directions: np.ndarray
    A: np.ndarray  # polytope rows, sensor cones then unit box
    b: np.ndarray
    edges: list
    radius: float
    chebyshev: ProblemGraph
    rectangles: list = field(default_factory=list)

    def chebyshev_lp(self) -> DenseProblem:
        """Centralised LP in ``(x, y, r)``."""
        norms = np.linalg.norm(self.A, axis=1)
        A = np.column_stack([self.A, norms])
        return DenseProblem(np.zeros((3, 3)), np.array([0.0, 0.0, -1.0]), A, self.b.copy(), np.zeros(len(self.b), dtype=bool))

    def rectangle_lp(self, k: int) -> DenseProblem:
        return DenseProblem(np.zeros((2, 2)), RECTANGLE_NORMALS[k].copy(), self.A.copy(), self.b.copy(), np.zeros(len(self.b), dtype=bool))


def _consensus_problem(n: int, dim: int, cost, edges, A_node, b_node) -> ProblemGraph:
    nodes = [Node(dim, Linear(cost)) for _ in range(n)]
    eye = np.eye(dim)
    blocks = [EdgeConstraintBlock(i, j, eye, -eye, np.zeros(dim), [EQ] * dim) for i, j in edges]
    node_constraints = [NodeConstraintBlock(i, A_node, b_node, [INEQ] * len(b_node)) for i in range(n)]
    return ProblemGraph(nodes, blocks, node_constraints)


def gen_localisation(num_sensors: int = 4, seed: int = 0, noise_std: float = 0.05, half_angle: float = 0.15,
                     target=None, min_range: float = 0.15) -> Localisation:
    """Direction-of-arrival cones around a target, solved over a sensor network.

    Every sensor sees the target through a wedge about a noisy bearing.  The
    polytope is the intersection of all wedges and the unit square.  Each
    node keeps the full row set as node constraints and shares its copy of
    the unknowns with neighbours through equality rows.
    """
    if num_sensors < 2:
        raise ValueError("gen_localisation needs at least two sensors")
    rng = np.random.default_rng(seed)
    target = rng.uniform(0.3, 0.7, 2) if target is None else np.asarray(target, dtype=float)
    radius = connectivity_radius(num_sensors)
    for _ in range(MAX_RESAMPLES):
        sensors, edges, _ = connected_geometric_graph(num_sensors, rng, radius)
        if np.all(np.linalg.norm(sensors - target, axis=1) >= min_range):
            break
    else:
        raise RuntimeError("could not place sensors away from the target")
    offset = target - sensors
    directions = np.arctan2(offset[:, 1], offset[:, 0]) + noise_std * rng.standard_normal(num_sensors)
    rows, rhs = [], []
    for s, phi in zip(sensors, directions):
        A_s, b_s = cone_halfplanes(s, phi, half_angle)
        rows.append(A_s)
        rhs.append(b_s)
    A = np.vstack(rows + [UNIT_BOX[0]])
    b = np.concatenate(rhs + [UNIT_BOX[1]])

    norms = np.linalg.norm(A, axis=1)
    cheb = _consensus_problem(num_sensors, 3, [0.0, 0.0, -1.0], edges, np.column_stack([A, norms]), b)
    rects = [_consensus_problem(num_sensors, 2, RECTANGLE_NORMALS[k], edges, A, b) for k in range(4)]
    scen = Localisation(sensors, target, directions, A, b, edges, radius, cheb, rects)
    try:
        centre = solve_lp_vertex(scen.chebyshev_lp())
    except (Infeasible, Unbounded) as exc:
        raise EmptyIntersection(f"sensor cones do not define a bounded polytope: {exc}") from None
    if centre[2] <= 0.0:
        raise EmptyIntersection("sensor cones have an empty intersection")
    return scen
