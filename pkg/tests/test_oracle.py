import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ieqpdmm.errors import Infeasible, TooManyRows, Unbounded
from ieqpdmm.oracle import DenseProblem, kkt_check, polytope_vertices, solve_active_set, solve_lp_vertex
from ieqpdmm.problem import EdgeConstraintBlock, Node, NodeConstraintBlock, ProblemGraph, Quadratic
from ieqpdmm.scenarios import gen_random, gen_toy, toy_targets

BOX = (np.array([[-1.0, 0], [1, 0], [0, -1], [0, 1]]), np.array([0.0, 1, 0, 1]))


def dense(H, q, A, b, eq):
    return DenseProblem(np.asarray(H, float), np.asarray(q, float), np.asarray(A, float).reshape(len(b), len(q)),
                        np.asarray(b, float), np.asarray(eq, bool))


@pytest.mark.parametrize("seed", range(10))
def test_toy_closed_form(seed):
    x, _ = solve_active_set(gen_toy(seed))
    a = toy_targets(seed)
    assert x == pytest.approx([1.0, 1.0, min(a[2], 1.0)], abs=1e-12)


def test_unconstrained_returns_target():
    a = np.array([0.3, -1.2])
    p = dense(np.eye(2), -a, np.zeros((0, 2)), [], [])
    x, lam = solve_active_set(p)
    assert x == pytest.approx(a) and lam.size == 0


def test_contradictory_rows_infeasible():
    p = dense([[1.0]], [0.0], [[1.0], [-1.0]], [0.0, -1.0], [False, False])
    with pytest.raises(Infeasible):
        solve_active_set(p)


def test_contradictory_graph_infeasible():
    nodes = [Node(1, Quadratic.squared_distance([0.0]))] * 2
    g = ProblemGraph(nodes, [EdgeConstraintBlock(0, 1, [[1.0]], [[-1.0]], [0.0], ["eq"])],
                     [NodeConstraintBlock(0, [[1.0]], [0.0], ["ineq"]), NodeConstraintBlock(1, [[-1.0]], [-1.0], ["ineq"])])
    with pytest.raises(Infeasible):
        solve_active_set(g)


def test_square_lp_corner():
    p = dense(np.zeros((2, 2)), [-1.0, -1.0], *BOX, [False] * 4)
    assert solve_lp_vertex(p) == pytest.approx([1.0, 1.0])


def test_unit_square_chebyshev():
    A = np.column_stack([BOX[0], np.ones(4)])
    p = dense(np.zeros((3, 3)), [0, 0, -1.0], A, BOX[1], [False] * 4)
    assert solve_lp_vertex(p) == pytest.approx([0.5, 0.5, 0.5])


def test_unbounded_lp():
    p = dense(np.zeros((1, 1)), [-1.0], [[-1.0]], [0.0], [False])
    with pytest.raises(Unbounded):
        solve_lp_vertex(p)


def test_infeasible_lp():
    p = dense(np.zeros((1, 1)), [1.0], [[1.0], [-1.0]], [0.0, -1.0], [False, False])
    with pytest.raises(Infeasible):
        solve_lp_vertex(p)


def test_too_many_rows():
    k = 26
    ang = np.linspace(0, 2 * np.pi, k, endpoint=False)
    A = np.column_stack([np.cos(ang), np.sin(ang)])
    p = dense(np.eye(2), [0.0, 0.0], A, np.ones(k), [False] * k)
    with pytest.raises(TooManyRows):
        solve_active_set(p)


def test_vertices_of_square():
    v = polytope_vertices(*BOX)
    assert sorted(map(tuple, np.round(v, 12))) == [(0, 0), (0, 1), (1, 0), (1, 1)]


@pytest.mark.parametrize("seed", range(5))
def test_kkt_self_consistency(seed):
    g = gen_random(4, seed)
    x, lam = solve_active_set(g)
    assert kkt_check(g, x, lam).worst() <= 1e-9


def test_kkt_flags_violations(toy, toy_optimum):
    x, lam = toy_optimum
    bad = kkt_check(toy, x + 0.1, lam)
    assert bad.primal_eq_residual > 0.05 and bad.stationarity > 0.05
    neg = lam.copy()
    ineq = np.flatnonzero(~DenseProblem.from_graph(toy).is_eq)
    neg[ineq[0]] = -1.0
    assert kkt_check(toy, x, neg).dual_negativity == pytest.approx(1.0)


def test_kkt_accepts_slot_duals(toy, toy_optimum):
    x, lam = toy_optimum
    assert kkt_check(toy, x, np.concatenate([lam, lam])).worst() <= 1e-9


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=5))
def test_consensus_is_mean(a):
    n = len(a)
    nodes = [Node(1, Quadratic.squared_distance([v])) for v in a]
    edges = [EdgeConstraintBlock(i, i + 1, [[1.0]], [[-1.0]], [0.0], ["eq"]) for i in range(n - 1)]
    x, _ = solve_active_set(ProblemGraph(nodes, edges))
    assert np.allclose(x, np.mean(a), atol=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_lp_matches_regularised_qp(seed):
    rng = np.random.default_rng(seed)
    A = np.vstack([BOX[0], rng.standard_normal((4, 2))])
    b = np.concatenate([BOX[1], np.abs(rng.standard_normal(4)) + 0.2])
    cost = rng.standard_normal(2)
    x_lp = solve_lp_vertex(dense(np.zeros((2, 2)), cost, A, b, [False] * 8))
    x_qp, _ = solve_active_set(dense(1e-8 * np.eye(2), cost, A, b, [False] * 8))
    assert np.linalg.norm(x_lp - x_qp) <= 1e-4
