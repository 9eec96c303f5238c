"""Graph-structured problem model.

A problem is a connected undirected graph.  Node ``i`` owns a variable
``x_i`` of dimension ``n_i`` and a quadratic or linear cost.  Each edge
carries rows of the form ``A_ij x_i + A_ji x_j (<= or =) b_ij``; each row is
flagged as an equality or an inequality.  Node constraints ``A x_i (<= or =) b``
are lowered onto edges to fictive dummy nodes before solving.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DimensionMismatch, DisconnectedGraph, DuplicateEdge, NonSymmetricQ

SYMMETRY_TOL = 1e-12


class Kind(str, enum.Enum):
    EQ = "eq"
    INEQ = "ineq"


def _kinds(kinds) -> tuple[Kind, ...]:
    return tuple(Kind(k) for k in kinds)


def _matrix(a, rows=None, cols=None) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1 and rows is not None and cols is not None:
        a = a.reshape(rows, cols)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {a.shape}")
    return a


def _vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    return v


@dataclass(frozen=True, eq=False)
class Quadratic:
    """``f(x) = 0.5 x'Qx + q'x``."""

    Q: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Q", _matrix(self.Q))
        object.__setattr__(self, "q", _vector(self.q))

    @property
    def dim(self) -> int:
        return self.q.size

    def value(self, x):
        return 0.5 * x @ self.Q @ x + self.q @ x

    def gradient(self, x):
        return self.Q @ x + self.q

    def hessian(self):
        return self.Q

    @classmethod
    def squared_distance(cls, a):
        """``0.5 ||x - a||^2`` up to the constant ``0.5 ||a||^2``."""
        a = _vector(a)
        return cls(np.eye(a.size), -a)


@dataclass(frozen=True, eq=False)
class Linear:
    """``f(x) = g'x``."""

    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", _vector(self.g))

    @property
    def dim(self) -> int:
        return self.g.size

    def value(self, x):
        return self.g @ x

    def gradient(self, x):
        return self.g.copy()

    def hessian(self):
        return np.zeros((self.dim, self.dim))


@dataclass(frozen=True, eq=False)
class Node:
    dim: int
    objective: Quadratic | Linear
    # host node id for a dummy node created by lowering; None for real nodes
    dummy_of: Optional[int] = None

    @property
    def is_dummy(self) -> bool:
        return self.dummy_of is not None


@dataclass(frozen=True, eq=False)
class EdgeConstraintBlock:
    """Rows ``A_ij x_i + A_ji x_j (<= or =) b`` between nodes ``i`` and ``j``."""

    i: int
    j: int
    A_ij: np.ndarray
    A_ji: np.ndarray
    b: np.ndarray
    kinds: tuple[Kind, ...]

    def __post_init__(self):
        object.__setattr__(self, "A_ij", _matrix(self.A_ij))
        object.__setattr__(self, "A_ji", _matrix(self.A_ji))
        object.__setattr__(self, "b", _vector(self.b))
        object.__setattr__(self, "kinds", _kinds(self.kinds))
        m = self.b.size
        if self.A_ij.shape[0] != m or self.A_ji.shape[0] != m:
            raise DimensionMismatch(
                f"edge ({self.i},{self.j}): A_ij has {self.A_ij.shape[0]} rows, "
                f"A_ji has {self.A_ji.shape[0]} rows, b has {m}"
            )
        if len(self.kinds) != m:
            raise DimensionMismatch(f"edge ({self.i},{self.j}): {len(self.kinds)} kinds for {m} rows")
        if m == 0:
            raise DimensionMismatch(f"edge ({self.i},{self.j}) has no constraint rows")

    @property
    def rows(self) -> int:
        return self.b.size

    def matrix_for(self, node: int) -> np.ndarray:
        if node == self.i:
            return self.A_ij
        if node == self.j:
            return self.A_ji
        raise KeyError(node)


@dataclass(frozen=True, eq=False)
class NodeConstraintBlock:
    i: int
    A: np.ndarray
    b: np.ndarray
    kinds: tuple[Kind, ...]

    def __post_init__(self):
        object.__setattr__(self, "A", _matrix(self.A))
        object.__setattr__(self, "b", _vector(self.b))
        object.__setattr__(self, "kinds", _kinds(self.kinds))
        if self.A.shape[0] != self.b.size or len(self.kinds) != self.b.size:
            raise DimensionMismatch(
                f"node constraint on {self.i}: A has {self.A.shape[0]} rows, "
                f"b has {self.b.size}, {len(self.kinds)} kinds"
            )


@dataclass(eq=False)
class ProblemGraph:
    """Validated problem.  Construction checks every structural invariant."""

    nodes: list[Node]
    edges: list[EdgeConstraintBlock] = field(default_factory=list)
    node_constraints: list[NodeConstraintBlock] = field(default_factory=list)
    # optional initial auxiliary vector for the lowered layout
    z0: Optional[np.ndarray] = None

    def __post_init__(self):
        self.nodes = list(self.nodes)
        self.edges = list(self.edges)
        self.node_constraints = list(self.node_constraints)
        if self.z0 is not None:
            self.z0 = _vector(self.z0)
        self._validate()

    def _validate(self):
        n = len(self.nodes)
        if n == 0:
            raise DisconnectedGraph("graph has no nodes")
        for idx, node in enumerate(self.nodes):
            _check_objective(idx, node)
        seen = set()
        for e in self.edges:
            for v in (e.i, e.j):
                if not 0 <= v < n:
                    raise DimensionMismatch(f"edge ({e.i},{e.j}) references unknown node {v}")
            if e.i == e.j:
                raise DimensionMismatch(f"edge ({e.i},{e.j}) is a self-loop")
            key = frozenset((e.i, e.j))
            if key in seen:
                raise DuplicateEdge(f"more than one block for edge ({e.i},{e.j})")
            seen.add(key)
            if e.A_ij.shape[1] != self.nodes[e.i].dim:
                raise DimensionMismatch(f"edge ({e.i},{e.j}): A_ij has {e.A_ij.shape[1]} cols, node {e.i} has dim {self.nodes[e.i].dim}")
            if e.A_ji.shape[1] != self.nodes[e.j].dim:
                raise DimensionMismatch(f"edge ({e.i},{e.j}): A_ji has {e.A_ji.shape[1]} cols, node {e.j} has dim {self.nodes[e.j].dim}")
        for nc in self.node_constraints:
            if not 0 <= nc.i < n:
                raise DimensionMismatch(f"node constraint references unknown node {nc.i}")
            if nc.A.shape[1] != self.nodes[nc.i].dim:
                raise DimensionMismatch(f"node constraint on {nc.i}: A has {nc.A.shape[1]} cols, node has dim {self.nodes[nc.i].dim}")
        if n > 1:
            rows = [e.i for e in self.edges]
            cols = [e.j for e in self.edges]
            adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
            count, _ = connected_components(adj, directed=False)
            if count > 1:
                raise DisconnectedGraph(f"graph has {count} connected components")

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def real_nodes(self) -> list[int]:
        return [i for i, node in enumerate(self.nodes) if not node.is_dummy]

    @property
    def num_rows(self) -> int:
        return sum(e.rows for e in self.edges) + sum(nc.b.size for nc in self.node_constraints)

    def neighbours(self, i: int) -> list[int]:
        out = []
        for e in self.edges:
            if e.i == i:
                out.append(e.j)
            elif e.j == i:
                out.append(e.i)
        return sorted(out)

    def __eq__(self, other):
        if not isinstance(other, ProblemGraph):
            return NotImplemented
        from .problem_file import problem_to_dict

        return problem_to_dict(self) == problem_to_dict(other)


def _check_objective(idx: int, node: Node):
    obj = node.objective
    if obj.dim != node.dim:
        raise DimensionMismatch(f"node {idx}: objective has dim {obj.dim}, node has dim {node.dim}")
    if isinstance(obj, Quadratic):
        if obj.Q.shape != (node.dim, node.dim):
            raise DimensionMismatch(f"node {idx}: Q has shape {obj.Q.shape}")
        if node.dim and np.max(np.abs(obj.Q - obj.Q.T)) > SYMMETRY_TOL:
            raise NonSymmetricQ(f"node {idx}: Q is not symmetric")
        if node.dim:
            lam_min = np.linalg.eigvalsh(obj.Q)[0]
            if lam_min < -1e-10 * max(1.0, np.abs(obj.Q).max()):
                raise NonSymmetricQ(f"node {idx}: Q is not positive semidefinite (min eigenvalue {lam_min:.3g})")


def build_problem(description: dict) -> ProblemGraph:
    """Build a validated graph from a parsed problem description."""
    from .problem_file import problem_from_dict

    return problem_from_dict(description)


def lower_node_constraints(g: ProblemGraph) -> ProblemGraph:
    """Move node constraints onto edges to fresh zero-dimensional dummy nodes.

    All constraint blocks on one node share a single dummy node, so the
    lowered graph keeps at most one block per node pair.
    """
    if not g.node_constraints:
        return g
    nodes = list(g.nodes)
    edges = list(g.edges)
    by_node: dict[int, list[NodeConstraintBlock]] = {}
    for nc in g.node_constraints:
        by_node.setdefault(nc.i, []).append(nc)
    for i in sorted(by_node):
        blocks = by_node[i]
        A = np.vstack([nc.A for nc in blocks])
        b = np.concatenate([nc.b for nc in blocks])
        kinds = tuple(k for nc in blocks for k in nc.kinds)
        dummy = len(nodes)
        nodes.append(Node(0, Linear(np.zeros(0)), dummy_of=i))
        edges.append(EdgeConstraintBlock(i, dummy, A, np.zeros((b.size, 0)), b, kinds))
    return ProblemGraph(nodes, edges, [], z0=g.z0)


@dataclass(frozen=True, eq=False)
class DirectedEdgeLayout:
    """Ordering of the ``2m`` directed dual slots.

    Slot ``s < m`` holds ``(lo|hi, row)`` and slot ``s + m`` holds the partner
    ``(hi|lo, row)`` for the same constraint row, where ``lo < hi`` are the
    edge endpoints.  Rows are ordered by ``(lo, hi, row index)``.
    """

    m: int
    owner: np.ndarray
    neighbour: np.ndarray
    edge: np.ndarray  # index into the graph's edge list, per row
    row: np.ndarray  # row index within the edge block, per row
    is_eq: np.ndarray  # per row
    b: np.ndarray  # per row
    coeffs: tuple  # per slot, the 1-D row of A for the owner node
    node_slots: tuple  # per node, int array of owned slots

    @property
    def size(self) -> int:
        return 2 * self.m

    def partner(self, s):
        s = np.asarray(s)
        return np.where(s < self.m, s + self.m, s - self.m)

    @property
    def partners(self) -> np.ndarray:
        return self.partner(np.arange(self.size))

    @property
    def d(self) -> np.ndarray:
        """Half right-hand side for every slot."""
        return 0.5 * np.concatenate([self.b, self.b])

    @property
    def slot_is_eq(self) -> np.ndarray:
        return np.concatenate([self.is_eq, self.is_eq])

    def node_matrix(self, i: int, dim: int) -> np.ndarray:
        """Rows of ``C`` owned by node ``i``: one row per owned slot."""
        slots = self.node_slots[i]
        if len(slots) == 0:
            return np.zeros((0, dim))
        return np.vstack([self.coeffs[s] for s in slots]).reshape(len(slots), dim)

    def slot_of(self, i: int, j: int, r: int = 0) -> int:
        for s in self.node_slots[i]:
            if self.neighbour[s] == j and self.row[s % self.m] == r:
                return int(s)
        raise KeyError((i, j, r))


def build_layout(g: ProblemGraph) -> DirectedEdgeLayout:
    if g.node_constraints:
        raise ValueError("build_layout expects a lowered graph; call lower_node_constraints first")
    order = sorted(range(len(g.edges)), key=lambda k: (min(g.edges[k].i, g.edges[k].j), max(g.edges[k].i, g.edges[k].j)))
    lo_owner, hi_owner, edge_idx, row_idx, is_eq, b = [], [], [], [], [], []
    lo_coeffs, hi_coeffs = [], []
    for k in order:
        e = g.edges[k]
        lo, hi = min(e.i, e.j), max(e.i, e.j)
        A_lo, A_hi = e.matrix_for(lo), e.matrix_for(hi)
        for r in range(e.rows):
            lo_owner.append(lo)
            hi_owner.append(hi)
            edge_idx.append(k)
            row_idx.append(r)
            is_eq.append(e.kinds[r] is Kind.EQ)
            b.append(e.b[r])
            lo_coeffs.append(A_lo[r].copy())
            hi_coeffs.append(A_hi[r].copy())
    m = len(b)
    owner = np.array(lo_owner + hi_owner, dtype=int)
    neighbour = np.array(hi_owner + lo_owner, dtype=int)
    node_slots = tuple(np.flatnonzero(owner == i) for i in range(g.num_nodes))
    return DirectedEdgeLayout(
        m=m,
        owner=owner,
        neighbour=neighbour,
        edge=np.array(edge_idx, dtype=int),
        row=np.array(row_idx, dtype=int),
        is_eq=np.array(is_eq, dtype=bool),
        b=np.array(b, dtype=float),
        coeffs=tuple(lo_coeffs + hi_coeffs),
        node_slots=node_slots,
    )


def node_offsets(g: ProblemGraph) -> np.ndarray:
    """Start index of each node's block in the stacked primal vector."""
    return np.concatenate([[0], np.cumsum([node.dim for node in g.nodes])]).astype(int)


def stack_constraints(g: ProblemGraph):
    """Dense ``(A, b, is_eq)`` in layout row order, for the lowered graph."""
    g = lower_node_constraints(g)
    layout = build_layout(g)
    off = node_offsets(g)
    A = np.zeros((layout.m, off[-1]))
    for r in range(layout.m):
        for s in (r, r + layout.m):
            i = layout.owner[s]
            A[r, off[i]:off[i + 1]] += layout.coeffs[s]
    return A, layout.b.copy(), layout.is_eq.copy()


def stack_objective(g: ProblemGraph):
    """Dense ``(H, q)`` of the separable objective ``0.5 x'Hx + q'x``."""
    off = node_offsets(g)
    n = off[-1]
    H = np.zeros((n, n))
    q = np.zeros(n)
    for i, node in enumerate(g.nodes):
        sl = slice(off[i], off[i + 1])
        obj = node.objective
        if isinstance(obj, Quadratic):
            H[sl, sl] = obj.Q
            q[sl] = obj.q
        else:
            q[sl] = obj.g
    return H, q


def split(x: np.ndarray, g: ProblemGraph) -> list[np.ndarray]:
    off = node_offsets(g)
    return [x[off[i]:off[i + 1]] for i in range(g.num_nodes)]


def objective_value(g: ProblemGraph, xs: Sequence[np.ndarray]) -> float:
    return float(sum(node.objective.value(x) for node, x in zip(g.nodes, xs)))
