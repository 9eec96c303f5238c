import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ieqpdmm.problem import Kind
from ieqpdmm.reflection import permute, project_all, project_pair, reflect_all, reflect_pair

EQ, INEQ = Kind.EQ, Kind.INEQ
values = st.floats(-5, 5, allow_nan=False)
kinds = st.sampled_from([EQ, INEQ])


@pytest.mark.parametrize(
    "pair, kind, expected",
    [((1, 3), INEQ, (2, 2)), ((-1, -2), INEQ, (0, 0)), ((-1, -2), EQ, (-1.5, -1.5))],
)
def test_project_pair_examples(pair, kind, expected):
    assert project_pair(*pair, kind) == pytest.approx(expected)


@pytest.mark.parametrize(
    "pair, kind, expected",
    [((3, -1), INEQ, (-1, 3)), ((-1, -2), INEQ, (1, 2)), ((5, 7), EQ, (7, 5))],
)
def test_reflect_pair_examples(pair, kind, expected):
    assert reflect_pair(*pair, kind) == expected


def test_tie_takes_negate_branch():
    assert reflect_pair(2.0, -2.0, INEQ) == (-2.0, 2.0)
    assert reflect_pair(0.0, 0.0, INEQ) == (0.0, 0.0)


@given(values, values, kinds)
def test_reflection_is_twice_projection_minus_identity(a, b, kind):
    pa, pb = project_pair(a, b, kind)
    ra, rb = reflect_pair(a, b, kind)
    assert ra == pytest.approx(2 * pa - a, abs=1e-12)
    assert rb == pytest.approx(2 * pb - b, abs=1e-12)


@given(values, values, kinds)
def test_projection_lands_in_set(a, b, kind):
    pa, pb = project_pair(a, b, kind)
    assert pa == pb
    if kind is INEQ:
        assert pa >= 0


def test_projection_beats_random_candidates(rng):
    for _ in range(100):
        y = rng.uniform(-5, 5, 2)
        kind = EQ if rng.random() < 0.5 else INEQ
        p = np.array(project_pair(*y, kind))
        best = np.linalg.norm(p - y)
        for _ in range(100):
            u = rng.uniform(-5, 5)
            if kind is INEQ:
                u = abs(u)
            assert best <= np.linalg.norm(np.array([u, u]) - y) + 1e-15


def test_reflect_all_equality_is_permutation(rng):
    is_eq = np.ones(5, dtype=bool)
    for _ in range(20):
        y = rng.standard_normal(10)
        assert np.array_equal(reflect_all(y, is_eq), permute(y))


def test_reflect_all_zero():
    for flag in (True, False):
        out = reflect_all(np.zeros(6), np.full(3, flag))
        assert np.all(out == 0.0)


def test_reflect_all_matches_projection_identity(rng):
    is_eq = np.array([True, False, False, True, False])
    y = rng.uniform(-5, 5, 10)
    assert np.allclose(reflect_all(y, is_eq), 2 * project_all(y, is_eq) - y, atol=1e-12)


def test_reflect_all_pairs_componentwise(rng):
    is_eq = np.array([True, False, False])
    y = rng.uniform(-5, 5, 6)
    z = reflect_all(y, is_eq)
    for r, flag in enumerate(is_eq):
        assert (z[r], z[r + 3]) == reflect_pair(y[r], y[r + 3], EQ if flag else INEQ)


def test_reflect_all_length_check():
    with pytest.raises(ValueError):
        reflect_all(np.zeros(5), np.zeros(3, dtype=bool))


@settings(max_examples=200)
@given(st.lists(st.tuples(values, values, values, values, st.booleans()), min_size=1, max_size=8))
def test_reflect_all_nonexpansive(rows):
    arr = np.array([r[:4] for r in rows])
    is_eq = np.array([r[4] for r in rows])
    y1 = np.concatenate([arr[:, 0], arr[:, 1]])
    y2 = np.concatenate([arr[:, 2], arr[:, 3]])
    lhs = np.linalg.norm(reflect_all(y1, is_eq) - reflect_all(y2, is_eq))
    assert lhs <= np.linalg.norm(y1 - y2) * (1 + 1e-12) + 1e-12


@given(st.lists(values, min_size=6, max_size=6))
def test_reflect_all_involution_on_equality_rows(vals):
    is_eq = np.array([True, False, True])
    y = np.array(vals)
    twice = reflect_all(reflect_all(y, is_eq), is_eq)
    eq_slots = np.concatenate([is_eq, is_eq])
    assert np.array_equal(twice[eq_slots], y[eq_slots])
