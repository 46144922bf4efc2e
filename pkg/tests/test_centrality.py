import numpy as np
import pytest
from hypothesis import given

from conftest import edge_lists
from gcrwcs.centrality import (ConvergenceError, ScoreVector, betweenness_scores,
                               degree_scores, pagerank_scores, random_scores)
from gcrwcs.graph import from_edges
from oracles import dense_transition, naive_betweenness, random_connected_edges


@given(edge_lists(max_n=14))
def test_betweenness_matches_pair_counting(data):
    n, edges = data
    g = from_edges(n, edges)
    np.testing.assert_allclose(betweenness_scores(g, batch=4).values,
                               naive_betweenness(n, edges), atol=1e-9)


def test_betweenness_path_and_star():
    path = from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    assert betweenness_scores(path).values.tolist() == [0, 3, 4, 3, 0]
    star = from_edges(6, [(0, i) for i in range(1, 6)])
    assert betweenness_scores(star).values[0] == 10


def test_betweenness_larger_connected(rng):
    for _ in range(3):
        n = 40
        edges = random_connected_edges(rng, n, 0.05)
        g = from_edges(n, edges)
        np.testing.assert_allclose(betweenness_scores(g, batch=7).values,
                                   naive_betweenness(n, edges), atol=1e-9)


@given(edge_lists(max_n=20))
def test_pagerank_is_stationary(data):
    n, edges = data
    g = from_edges(n, edges)
    p = pagerank_scores(g).values
    assert p.sum() == pytest.approx(1.0)
    m = dense_transition(n, edges)
    np.testing.assert_allclose(p, 0.85 * m.T @ p + 0.15 / n, atol=1e-9)


def test_pagerank_reports_residual_on_failure():
    g = from_edges(30, [(i, i + 1) for i in range(29)])
    with pytest.raises(ConvergenceError) as err:
        pagerank_scores(g, max_iter=2)
    assert err.value.residual > 0


def test_degree_and_random_scores():
    g = from_edges(3, [(0, 1), (0, 2)])
    assert degree_scores(g).values.tolist() == [3, 2, 2]
    a, b = random_scores(50, 7), random_scores(50, 7)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, random_scores(50, 8).values)


def test_score_vector_validation():
    with pytest.raises(ValueError):
        ScoreVector(np.array([1.0, np.nan]), "degree")
    with pytest.raises(ValueError):
        ScoreVector(np.ones(2), "closeness")
