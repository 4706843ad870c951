import csv
import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from walk_combinatorics.src.tools import (
    BudgetExceededError,
    ClassRow,
    InvalidWalkError,
    NonClosedWalkError,
    PatternRow,
    PatternTooLargeError,
    SubgraphEstimate,
    canonical_form,
    check_shape_invariants,
    class_counts,
    class_table,
    count_bound,
    decompose,
    enumerate_shapes,
    excess,
    judge_triangle,
    random_forest,
    subgraph_probability_mc,
    trace_power_mc,
    triangle_window,
    write_class_table,
    write_pattern_table,
)


@pytest.fixture
def rng():
    return np.random.default_rng(99)


def closed_walks_on_complete_graph(ell, n):
    return (n - 1) ** ell + (-1) ** ell * (n - 1)


def test_triangle_walk_shape():
    shape = decompose((0, 1, 2, 0))
    assert shape.length == 3
    assert shape.walk_class == (3, 3, 1)
    assert shape.forest_part.number_of_edges() == 0
    assert shape.two_core.number_of_edges() == 3
    loops = list(shape.junction_graph.edges(data="length"))
    assert loops == [(0, 0, 3)]


def test_back_and_forth_walk_is_a_tree():
    shape = decompose((0, 1, 0))
    assert shape.walk_class == (1, 0, 0)
    assert shape.multiplicities == {(0, 1): 2}
    assert shape.two_core.number_of_nodes() == 0
    assert shape.forest_part.number_of_edges() == 1
    assert check_shape_invariants(shape) == []


def test_theta_walk_has_two_junctions():
    # two triangles glued along the edge 0-1
    shape = decompose((0, 1, 2, 0, 3, 1, 0))
    assert shape.exc == 2
    assert sorted(shape.junction_graph.nodes()) == [0, 1]
    assert shape.junction_graph.number_of_edges() == 3
    assert check_shape_invariants(shape) == []


def test_invalid_walks():
    with pytest.raises(NonClosedWalkError):
        decompose((0, 1, 2))
    with pytest.raises(InvalidWalkError):
        decompose((0, 0, 1, 0))


def test_canonical_form():
    assert canonical_form((5, 3, 5, 7, 5)) == (0, 1, 0, 2, 0)


WALKS_TO_RELABEL = [
    (0, 1, 2, 0),
    (0, 1, 0, 2, 0),
    (0, 1, 2, 3, 1, 0),
    (0, 1, 2, 0, 3, 2, 1, 0),
    (4, 9, 4, 7, 2, 7, 4),
]


@pytest.mark.parametrize("walk", WALKS_TO_RELABEL)
def test_canonical_form_is_idempotent(walk):
    canonical = canonical_form(walk)
    assert canonical_form(canonical) == canonical
    assert decompose(canonical).walk_class == decompose(walk).walk_class


@pytest.mark.parametrize("walk", WALKS_TO_RELABEL)
def test_decompose_is_invariant_under_relabeling(walk):
    relabel = {v: 100 - 3 * v for v in set(walk)}
    moved = tuple(relabel[v] for v in walk)
    original, shape = decompose(walk), decompose(moved)
    assert canonical_form(moved) == canonical_form(walk)
    assert shape.walk_class == original.walk_class
    assert sorted(shape.multiplicities.values()) == sorted(original.multiplicities.values())
    assert nx.is_isomorphic(shape.graph, original.graph)
    assert nx.is_isomorphic(shape.two_core, original.two_core)
    assert nx.is_isomorphic(shape.forest_part, original.forest_part)
    assert nx.is_isomorphic(shape.junction_graph, original.junction_graph)


def test_excess():
    assert excess(nx.Graph()) == 0
    assert excess(nx.cycle_graph(5)) == 1
    assert excess(nx.complete_graph(4)) == 3


@pytest.mark.parametrize("ell", [2, 3, 4, 5, 6])
def test_enumeration_counts_every_closed_walk(ell):
    n = 5
    total = sum(count for _, count in enumerate_shapes(ell, n))
    assert total == closed_walks_on_complete_graph(ell, n)
    assert sum(class_counts(ell, n).values()) == total


@pytest.mark.parametrize("ell", [2, 3, 4, 5, 6])
def test_every_shape_satisfies_invariants(ell):
    for shape, _ in enumerate_shapes(ell, 6):
        assert check_shape_invariants(shape) == [], shape.vertices


@pytest.mark.parametrize("ell", [2, 3, 4, 5])
def test_class_counts_respect_bound(ell):
    for row in class_table(ell, 5):
        assert row.true_count <= row.bound


def test_count_bound_exact_values():
    assert count_bound(3, 10, 3, 3, 1) == 10 ** 3 * 3 ** 2
    assert count_bound(4, 3, 0, 0, 2) == Fraction(4 ** 12, 3)


def test_enumeration_budget():
    with pytest.raises(BudgetExceededError):
        list(enumerate_shapes(6, 10, budget=1000))


def test_single_edge_probability(rng):
    est = subgraph_probability_mc(nx.path_graph(2), 100, 5, 0.3, 20000, rng)
    assert est.ci_low <= 0.3 <= est.ci_high
    assert est.expected_copies == pytest.approx(100 * 99 * est.estimate)
    assert not est.upper_bound_only


def test_path_probability_factorizes(rng):
    # the middle vertex decouples both edges, so a two-edge path has probability p^2
    p, trials = 0.3, 40000
    est = subgraph_probability_mc(nx.path_graph(3), 50, 5, p, trials, rng)
    assert abs(est.estimate - p * p) <= 4.0 * math.sqrt(p * p * (1 - p * p) / trials)


def test_pattern_size_limit(rng):
    with pytest.raises(PatternTooLargeError):
        subgraph_probability_mc(nx.path_graph(9), 10, 5, 0.3, 10, rng)


def test_triangle_window_order():
    low, high = triangle_window(0.1, 50)
    assert low == pytest.approx(1e-3)
    assert high > low


def triangle_estimate(estimate, ci_low, ci_high, successes=10):
    return SubgraphEstimate(estimate=estimate, ci_low=ci_low, ci_high=ci_high, successes=successes, trials=1000,
                            upper_bound_only=successes == 0, expected_copies=6 * estimate)


def test_judge_triangle_needs_estimate_inside_a_tight_interval():
    low, high = 0.01, 0.03
    assert judge_triangle(triangle_estimate(0.02, 0.015, 0.025), low, high).status == "inside"
    assert judge_triangle(triangle_estimate(0.02, 0.015, 0.025), low, high).passed
    outside = judge_triangle(triangle_estimate(0.04, 0.035, 0.045), low, high)
    assert outside.status == "outside"
    assert not outside.passed
    # the interval overlaps the window but is wider than it
    wide = judge_triangle(triangle_estimate(0.02, 0.001, 0.09), low, high)
    assert wide.status == "upper_bound_only"
    assert not wide.passed
    empty = judge_triangle(triangle_estimate(0.0, 0.0, 0.02, successes=0), low, high)
    assert empty.status == "upper_bound_only"


def test_few_triangle_trials_do_not_pass(rng):
    low, high = triangle_window(0.2, 10)
    est = subgraph_probability_mc(nx.complete_graph(3), 3, 10, 0.2, 50, rng)
    assert est.ci_high - est.ci_low >= high - low
    verdict = judge_triangle(est, low, high)
    assert verdict.status == "upper_bound_only"
    assert not verdict.passed


def test_random_forest_is_a_forest(rng):
    forest = random_forest(7, rng)
    assert forest.number_of_nodes() == 7
    assert nx.is_forest(forest)


def test_second_trace_moment(rng):
    n, p = 20, 0.3
    trace = trace_power_mc(n, 6, p, 2, 40, rng)
    # E tr(M^2) = n(n-1) p(1-p)
    assert abs(trace.mean - n * (n - 1) * p * (1 - p)) <= trace.ci_half_width
    assert trace.violation_bound == pytest.approx(np.exp(-1.0))
    with pytest.raises(ValueError):
        trace_power_mc(n, 6, p, 3, 2, rng)
    with pytest.raises(ValueError):
        trace_power_mc(100, 6, p, 2, 2, rng)


def test_table_writers(tmp_path):
    classes = tmp_path / "classes.csv"
    patterns = tmp_path / "patterns.csv"
    write_class_table(classes, [ClassRow(ell=2, a=1, b=0, c=0, true_count=20, bound=400)])
    write_pattern_table(patterns, [PatternRow("triangle_d5", 0.25, 0.2, 0.3, 0.125)])
    with open(classes, newline="") as f:
        assert list(csv.reader(f)) == [["ell", "a", "b", "c", "true_count", "paper_bound"],
                                       ["2", "1", "0", "0", "20", "400"]]
    with open(patterns, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["pattern_id", "estimate", "ci_low", "ci_high", "analytic_reference"]
    assert rows[1] == ["triangle_d5", "0.25", "0.2", "0.3", "0.125"]
