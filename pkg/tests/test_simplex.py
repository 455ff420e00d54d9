import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from modo.checks import grid_projection
from modo.core import is_simplex_point
from modo.simplex import project_simplex, uniform_weights, vertex

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
vectors = st.integers(1, 8).flatmap(lambda M: arrays(np.float64, M, elements=finite))


def test_inside_point_is_fixed():
    np.testing.assert_array_equal(project_simplex([0.5, 0.5]), [0.5, 0.5])


def test_nearest_vertex():
    np.testing.assert_array_equal(project_simplex([2.0, 0.0]), [1.0, 0.0])


def test_matches_grid_oracle():
    v = np.array([0.9, 0.5, -0.2])
    np.testing.assert_allclose(project_simplex(v), grid_projection(v), atol=1e-6)


def test_errors():
    with pytest.raises(ValueError, match="non-finite input"):
        project_simplex([np.nan, 1.0])
    with pytest.raises(ValueError, match="invalid dimension"):
        project_simplex([])
    with pytest.raises(ValueError, match="invalid dimension"):
        uniform_weights(0)


@pytest.mark.parametrize("M,expected", [(1, [1.0]), (2, [0.5, 0.5]), (4, [0.25] * 4)])
def test_uniform(M, expected):
    np.testing.assert_array_equal(uniform_weights(M), expected)


def test_vertex():
    np.testing.assert_array_equal(vertex(3, 1), [0.0, 1.0, 0.0])


@settings(max_examples=300, deadline=None)
@given(vectors)
def test_output_on_simplex(v):
    assert is_simplex_point(project_simplex(v))


@settings(max_examples=200, deadline=None)
@given(vectors)
def test_idempotent(v):
    p = project_simplex(v)
    np.testing.assert_allclose(project_simplex(p), p, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6).flatmap(lambda M: st.tuples(arrays(np.float64, M, elements=finite),
                                                      arrays(np.float64, M, elements=finite))))
def test_non_expansive(pair):
    u, v = pair
    assert np.linalg.norm(project_simplex(u) - project_simplex(v)) <= np.linalg.norm(u - v) + 1e-9


@settings(max_examples=200, deadline=None)
@given(vectors, finite)
def test_shift_invariant(v, c):
    # adding a constant to every coordinate does not move the projection
    np.testing.assert_allclose(project_simplex(v + c), project_simplex(v), atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(vectors)
def test_variational_inequality(v):
    # <v - p, q - p> <= 0 for every vertex q characterises the projection
    p = project_simplex(v)
    for m in range(v.size):
        q = vertex(v.size, m)
        assert (v - p) @ (q - p) <= 1e-7 * (1 + np.abs(v).max())


def test_huge_entries():
    np.testing.assert_array_equal(project_simplex([1e20, 0.0, -1e20]), [1.0, 0.0, 0.0])
