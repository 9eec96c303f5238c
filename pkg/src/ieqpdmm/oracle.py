"""Brute-force reference solvers and KKT verification for small problems.

Both solvers work on the centralised (stacked) form of a problem and share
nothing with the iterative engine beyond the problem model.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .errors import Infeasible, TooManyRows, Unbounded
from .problem import ProblemGraph, node_offsets, stack_constraints, stack_objective

MAX_INEQ_ROWS = 25
MAX_LP_DIM = 4
FEAS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DenseProblem:
    """``min 0.5 x'Hx + q'x`` s.t. ``A x (= or <=) b`` row by row."""

    H: np.ndarray
    q: np.ndarray
    A: np.ndarray
    b: np.ndarray
    is_eq: np.ndarray

    @classmethod
    def from_graph(cls, g: ProblemGraph) -> "DenseProblem":
        H, q = stack_objective(g)
        A, b, is_eq = stack_constraints(g)
        return cls(H, q, A, b, is_eq)

    @classmethod
    def coerce(cls, problem) -> "DenseProblem":
        return problem if isinstance(problem, cls) else cls.from_graph(problem)

    @property
    def n(self) -> int:
        return self.q.size

    def objective(self, x) -> float:
        return float(0.5 * x @ self.H @ x + self.q @ x)

    def feasible(self, x, tol=FEAS_TOL) -> bool:
        r = self.A @ x - self.b
        scale = tol * (1.0 + np.abs(self.b))
        return bool(np.all(np.abs(r[self.is_eq]) <= scale[self.is_eq]) and np.all(r[~self.is_eq] <= scale[~self.is_eq]))


def solve_active_set(problem, tol: float = FEAS_TOL):
    """Enumerate every active subset of the inequality rows.

    Each subset ``S`` gives the equality-constrained KKT system over the
    equality rows and ``S``.  A candidate is kept when that system is
    consistent, the point is feasible and the multipliers on ``S`` are
    non-negative; the cheapest candidate is returned as ``(x, duals)`` with
    one dual per constraint row.
    """
    p = DenseProblem.coerce(problem)
    eq = np.flatnonzero(p.is_eq)
    ineq = np.flatnonzero(~p.is_eq)
    if ineq.size > MAX_INEQ_ROWS:
        raise TooManyRows(f"{ineq.size} inequality rows exceed the enumeration bound {MAX_INEQ_ROWS}")
    n = p.n
    best = None
    for size in range(ineq.size + 1):
        for S in itertools.combinations(ineq, size):
            rows = np.concatenate([eq, np.array(S, dtype=int)])
            k = rows.size
            Ar = p.A[rows]
            K = np.block([[p.H, Ar.T], [Ar, np.zeros((k, k))]])
            rhs = np.concatenate([-p.q, p.b[rows]])
            sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
            if np.linalg.norm(K @ sol - rhs) > 1e-9 * (1.0 + np.linalg.norm(rhs)):
                continue
            x, lam = sol[:n], sol[n:]
            if not p.feasible(x, tol) or np.any(lam[eq.size:] < -tol):
                continue
            val = p.objective(x)
            if best is None or val < best[0] - 1e-12:
                duals = np.zeros(p.b.size)
                duals[rows] = lam
                duals[ineq] = np.maximum(duals[ineq], 0.0)
                best = (val, x, duals)
    if best is None:
        if not np.any(p.H) and _has_descent_direction(p):
            raise Unbounded("linear objective decreases along a recession direction")
        raise Infeasible("no feasible KKT point found")
    return best[1], best[2]


def _eliminate_equalities(p: DenseProblem):
    """Parametrise ``{x : A_eq x = b_eq}`` as ``x_p + N w``."""
    E, e = p.A[p.is_eq], p.b[p.is_eq]
    if E.shape[0] == 0:
        return np.zeros(p.n), np.eye(p.n)
    x_p = np.linalg.lstsq(E, e, rcond=None)[0]
    if np.linalg.norm(E @ x_p - e) > FEAS_TOL * (1.0 + np.linalg.norm(e)):
        raise Infeasible("equality rows are inconsistent")
    return x_p, null_space(E)


def _reduced_inequalities(p: DenseProblem, x_p, N):
    """Inequality rows in ``w``, normalised and with duplicates removed."""
    G = p.A[~p.is_eq] @ N
    h = p.b[~p.is_eq] - p.A[~p.is_eq] @ x_p
    kept_G, kept_h = [], []
    for gi, hi in zip(G, h):
        norm = np.linalg.norm(gi)
        if norm <= 1e-12:
            if hi < -FEAS_TOL:
                raise Infeasible("a constant inequality row is violated")
            continue
        gi, hi = gi / norm, hi / norm
        if any(np.allclose(gi, gk, atol=1e-9) and abs(hi - hk) <= 1e-9 for gk, hk in zip(kept_G, kept_h)):
            continue
        kept_G.append(gi)
        kept_h.append(hi)
    k = N.shape[1]
    return np.array(kept_G).reshape(-1, k), np.array(kept_h)


def _best_vertex(G, h, cost):
    """Vertex of ``{w : G w <= h}`` minimising ``cost'w``, or None."""
    rows, k = G.shape
    if k == 0:
        return np.zeros(0) if np.all(h >= -FEAS_TOL) else None
    combos = np.array(list(itertools.combinations(range(rows), k)), dtype=int)
    if combos.size == 0:
        return None
    M = G[combos]
    rhs = h[combos]
    ok = np.abs(np.linalg.det(M)) > 1e-12
    if not np.any(ok):
        return None
    W = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
    slack = W @ G.T - h
    feas = np.all(slack <= FEAS_TOL * (1.0 + np.abs(h)), axis=1)
    if not np.any(feas):
        return None
    W = W[feas]
    vals = W @ cost
    return W[int(np.argmin(vals))]


def _descent_in_cone(G, cost) -> bool:
    k = G.shape[1]
    box = np.vstack([G, np.eye(k), -np.eye(k)])
    h = np.concatenate([np.zeros(G.shape[0]), np.ones(2 * k)])
    d = _best_vertex(box, h, cost)
    return d is not None and cost @ d < -1e-9


def _has_descent_direction(p: DenseProblem) -> bool:
    try:
        x_p, N = _eliminate_equalities(p)
    except Infeasible:
        return False
    G, _ = _reduced_inequalities(p, x_p, N)
    return N.shape[1] <= MAX_LP_DIM and _descent_in_cone(G, N.T @ p.q)


def solve_lp_vertex(problem):
    """Optimal vertex of a linear program by exhaustive enumeration.

    Equality rows are eliminated first, so consensus copies of a small
    centralised LP reduce to its own dimension.  Duplicate rows are merged.
    """
    p = DenseProblem.coerce(problem)
    if np.any(p.H):
        raise ValueError("solve_lp_vertex needs a linear objective")
    x_p, N = _eliminate_equalities(p)
    k = N.shape[1]
    G, h = _reduced_inequalities(p, x_p, N)
    if k > MAX_LP_DIM:
        raise TooManyRows(f"reduced dimension {k} exceeds {MAX_LP_DIM}")
    if G.shape[0] > MAX_INEQ_ROWS:
        raise TooManyRows(f"{G.shape[0]} distinct inequality rows exceed {MAX_INEQ_ROWS}")
    cost = N.T @ p.q
    w = _best_vertex(G, h, cost)
    if _descent_in_cone(G, cost):
        if w is not None:
            raise Unbounded("linear objective decreases along a recession direction")
    if w is None:
        raise Infeasible("no feasible vertex")
    return x_p + N @ w


def polytope_vertices(A, b):
    """All vertices of the bounded 2-D or 3-D polytope ``{x : A x <= b}``."""
    A, b = np.asarray(A, float), np.asarray(b, float)
    k = A.shape[1]
    out = []
    for combo in itertools.combinations(range(A.shape[0]), k):
        M = A[list(combo)]
        if abs(np.linalg.det(M)) <= 1e-12:
            continue
        v = np.linalg.solve(M, b[list(combo)])
        if np.all(A @ v <= b + FEAS_TOL):
            out.append(v)
    return np.array(out).reshape(-1, k)


@dataclass(frozen=True)
class KktReport:
    primal_eq_residual: float
    primal_ineq_violation: float
    dual_negativity: float
    complementarity: float
    stationarity: float

    def worst(self) -> float:
        return max(self.primal_eq_residual, self.primal_ineq_violation, self.dual_negativity, self.complementarity, self.stationarity)

    def ok(self, tol: float) -> bool:
        return self.worst() <= tol

    def lines(self):
        return [f"{name:>22s}: {getattr(self, name):.3e}" for name in self.__dataclass_fields__]


def kkt_check(problem, x, mu) -> KktReport:
    """KKT residuals of ``(x, mu)``.

    ``mu`` may hold one dual per row or one per directed slot; slot duals
    are averaged over each partner pair.
    """
    p = DenseProblem.coerce(problem)
    if isinstance(x, (list, tuple)):
        x = np.concatenate([np.ravel(v) for v in x]) if len(x) else np.zeros(0)
    x = np.asarray(x, dtype=float)
    lam = np.asarray(mu, dtype=float)
    m = p.b.size
    if lam.size == 2 * m and m:
        lam = 0.5 * (lam[:m] + lam[m:])
    if lam.size != m or x.size != p.n:
        raise ValueError(f"expected x of size {p.n} and {m} or {2 * m} duals")
    r = p.A @ x - p.b
    ineq = ~p.is_eq

    def _max(v):
        return float(np.max(v)) if v.size else 0.0

    return KktReport(
        primal_eq_residual=_max(np.abs(r[p.is_eq])),
        primal_ineq_violation=_max(np.maximum(r[ineq], 0.0)),
        dual_negativity=_max(np.maximum(-lam[ineq], 0.0)),
        complementarity=_max(np.abs(lam[ineq] * r[ineq])),
        stationarity=float(np.linalg.norm(p.H @ x + p.q + p.A.T @ lam)),
    )


def per_node(x, g: ProblemGraph):
    off = node_offsets(g)
    return [x[off[i]:off[i + 1]] for i in range(g.num_nodes)]
