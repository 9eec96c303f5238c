import math

import numpy as np
import pytest

from ieqpdmm.oracle import DenseProblem, polytope_vertices, solve_active_set, solve_lp_vertex
from ieqpdmm.problem import lower_node_constraints
from ieqpdmm.problem_file import problem_from_dict, problem_to_dict
from ieqpdmm.scenarios import (
    RECTANGLE_NORMALS, connected_geometric_graph, connectivity_radius, gen_geometric, gen_localisation,
    gen_random, gen_toy, geometric_edges,
)

# frozen from the vertex oracle, localisation seed 3
GOLDEN_CHEBYSHEV = np.array([0.3444378679613701, 0.3885569812674681, 0.037994094805316])
GOLDEN_TARGET = np.array([0.33425966685744973, 0.3947242026384399])
GOLDEN_BOX_MIN = np.array([0.2577858064835996, 0.333371420837708])
GOLDEN_BOX_MAX = np.array([0.40428132487592233, 0.4288360458922129])


def test_toy_shape():
    g = gen_toy(0)
    assert (g.num_nodes, len(g.edges), len(g.node_constraints)) == (3, 3, 2)
    lowered = lower_node_constraints(g)
    assert lowered.num_nodes == 5 and len(lowered.edges) == 5
    assert sum(node.is_dummy for node in lowered.nodes) == 2


def test_radius_value():
    assert connectivity_radius(50) == pytest.approx(0.3955766932177954, abs=1e-12)
    assert connectivity_radius(50) == pytest.approx(math.sqrt(2 * math.log(50) / 50), abs=1e-12)


def test_forced_two_node_placement():
    scen = gen_geometric(2, 0, points=[[0.0, 0.0], [0.5, 0.5]])
    assert scen.edges == [(0, 1)]


@pytest.mark.parametrize("seed", range(20))
def test_geometric_connected(seed):
    scen = gen_geometric(50, seed)
    assert scen.problem.num_nodes == 50
    dist = np.linalg.norm(scen.points[:, None] - scen.points[None], axis=-1)
    expected = {(i, j) for i in range(50) for j in range(i + 1, 50) if dist[i, j] <= scen.radius}
    assert set(scen.edges) == expected


def test_edge_predicate_symmetric(rng):
    pts = rng.random((30, 2))
    forward = set(geometric_edges(pts, 0.3))
    backward = {tuple(sorted((29 - i, 29 - j))) for i, j in geometric_edges(pts[::-1], 0.3)}
    assert forward == backward


def test_resampling_gives_up():
    with pytest.raises(RuntimeError):
        connected_geometric_graph(50, np.random.default_rng(0), radius=0.01)


@pytest.mark.parametrize("seed", range(5))
def test_zero_noise_contains_target(seed):
    scen = gen_localisation(4, seed, noise_std=0.0, target=[0.5, 0.5])
    assert np.all(scen.A @ scen.target <= scen.b + 1e-12)


@pytest.mark.parametrize("seed", [0, 3, 7])
def test_rectangle_lps_span_polytope(seed):
    scen = gen_localisation(4, seed)
    verts = polytope_vertices(scen.A, scen.b)
    for k, normal in enumerate(RECTANGLE_NORMALS):
        p = solve_lp_vertex(scen.rectangle_lp(k))
        assert normal @ p == pytest.approx((verts @ normal).min(), abs=1e-9)


def test_golden_localisation():
    scen = gen_localisation(4, 3)
    np.testing.assert_allclose(scen.target, GOLDEN_TARGET, atol=1e-12)
    np.testing.assert_allclose(solve_lp_vertex(scen.chebyshev_lp()), GOLDEN_CHEBYSHEV, atol=1e-9)
    verts = polytope_vertices(scen.A, scen.b)
    np.testing.assert_allclose(verts.min(axis=0), GOLDEN_BOX_MIN, atol=1e-9)
    np.testing.assert_allclose(verts.max(axis=0), GOLDEN_BOX_MAX, atol=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_chebyshev_ball_inside(seed):
    scen = gen_localisation(4, seed)
    x, y, r = solve_lp_vertex(scen.chebyshev_lp())
    slack = scen.b - scen.A @ [x, y] - r * np.linalg.norm(scen.A, axis=1)
    assert r > 0 and slack.min() >= -1e-9


def test_distributed_chebyshev_reduces_to_centralised():
    scen = gen_localisation(4, 3)
    x = solve_lp_vertex(scen.chebyshev)
    np.testing.assert_allclose(x.reshape(4, 3), np.tile(GOLDEN_CHEBYSHEV, (4, 1)), atol=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_random_problems_feasible(seed):
    g = gen_random(2 + seed % 5, seed)
    x, _ = solve_active_set(g)
    assert DenseProblem.from_graph(g).feasible(x)


@pytest.mark.parametrize("make", [lambda: gen_toy(4), lambda: gen_geometric(20, 1).problem,
                                  lambda: gen_random(5, 2), lambda: gen_localisation(4, 1).chebyshev])
def test_generated_problems_round_trip(make):
    g = make()
    assert problem_from_dict(problem_to_dict(g)) == g


def test_generators_deterministic():
    assert gen_random(6, 9) == gen_random(6, 9)
    assert np.array_equal(gen_geometric(30, 2).points, gen_geometric(30, 2).points)
