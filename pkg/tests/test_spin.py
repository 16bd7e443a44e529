import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from charvar.graphs import GraphError, dumbbell_graph, rose_graph, theta_graph, trivalent_graphs
from charvar.spin import (
    SpinError, decompose, face_codimension, face_dimension, format_weights, hilbert_basis, in_cone,
    in_lattice, in_semigroup, moment_cone_contains, parse_weights, polytope_points,
)
import oracles

THETA = theta_graph()
DUMBBELL = dumbbell_graph()
GENUS2 = [THETA, DUMBBELL]
TRIVALENT = GENUS2 + trivalent_graphs(3)


def test_cone_examples():
    assert in_cone(THETA, (1, 1, 2))
    assert not in_cone(THETA, (1, 0, 0))
    # dumbbell edge order is (e1, b, e2)
    assert in_cone(DUMBBELL, {"e1": 1, "b": 2, "e2": 1})


def test_lattice_examples():
    assert not in_lattice(THETA, (1, 1, 1))
    assert in_lattice(THETA, (0, 1, 1))
    assert not in_lattice(DUMBBELL, (1, 1, 1))


def test_non_trivalent_rejected():
    with pytest.raises(GraphError):
        in_cone(rose_graph(2), (1, 1))
    with pytest.raises(GraphError):
        hilbert_basis(rose_graph(2))


def test_hilbert_basis_examples():
    assert hilbert_basis(THETA) == ((0, 1, 1), (1, 0, 1), (1, 1, 0))
    assert set(hilbert_basis(DUMBBELL)) == {(1, 0, 0), (0, 0, 1), (1, 2, 1)}


@pytest.mark.parametrize("graph", TRIVALENT)
def test_hilbert_basis_matches_indecomposables(graph):
    # box bound 3 already rules out indecomposables beyond weight 2 here
    assert list(hilbert_basis(graph)) == oracles.indecomposables(graph, 3)


def test_decompose_examples():
    assert decompose(THETA, (1, 1, 2)) == {(0, 1, 1): 1, (1, 0, 1): 1}
    assert decompose(THETA, (0, 1, 1)) == {(0, 1, 1): 1}
    assert decompose(THETA, (2, 2, 2)) == {(0, 1, 1): 1, (1, 0, 1): 1, (1, 1, 0): 1}
    with pytest.raises(SpinError):
        decompose(THETA, (1, 1, 1))


@pytest.mark.parametrize("graph", GENUS2)
def test_everything_decomposes_up_to_six(graph):
    for vec in polytope_points(graph, 6):
        parts = decompose(graph, vec)
        total = tuple(sum(b[i] * k for b, k in parts.items()) for i in range(len(vec)))
        assert total == vec


def test_polytope_counts():
    assert polytope_points(THETA, 1) == [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)]
    assert len(polytope_points(THETA, 2)) == 11
    assert [len(polytope_points(THETA, m)) for m in range(5)] == [1, 4, 11, 23, 42]
    assert sorted(polytope_points(DUMBBELL, 1)) == [(0, 0, 0), (0, 0, 1), (1, 0, 0), (1, 0, 1)]


@pytest.mark.parametrize("graph", GENUS2)
def test_polytope_counts_match_oracle(graph):
    for m in range(5):
        assert sorted(polytope_points(graph, m)) == oracles.members_up_to(graph, m)


def test_theta_counts_quasi_polynomial():
    # Ehrhart behaviour of degree 3 with period 2: on each parity class the
    # fourth differences vanish and the third differences are positive.
    counts = [len(polytope_points(THETA, m)) for m in range(14)]
    for parity in (0, 1):
        seq = counts[parity::2]
        assert not np.diff(seq, 4).any()
        assert (np.diff(seq, 3) > 0).all()


@pytest.mark.parametrize("graph", GENUS2)
def test_graded_sums(graph):
    levels = {m: polytope_points(graph, m) for m in range(5)}
    for a, b in itertools.product(range(5), repeat=2):
        if a + b > 4:
            continue
        target = set(levels[a + b])
        for p in levels[a]:
            for q in levels[b]:
                assert tuple(x + y for x, y in zip(p, q)) in target


def _faces(graph):
    ids = graph.edge_ids
    for r in range(len(ids) + 1):
        for s in itertools.combinations(ids, r):
            yield list(s)


@pytest.mark.parametrize("graph", GENUS2)
def test_face_codimension_is_size(graph):
    for s in _faces(graph):
        assert face_codimension(graph, s) == len(s)
        assert face_dimension(graph, s) == oracles.face_dimension_exact(graph, s)


def test_face_examples():
    assert face_dimension(THETA, []) == 3
    assert face_codimension(THETA, ["p"]) == 1
    assert face_codimension(THETA, ["p", "q", "r"]) == 3
    with pytest.raises(GraphError):
        face_dimension(THETA, ["zz"])


def test_moment_cone_examples():
    assert moment_cone_contains(THETA, (0.0, 0.0, 0.0))
    assert moment_cone_contains(THETA, (1.0, 1.0, 1.9), tol=1e-9)
    assert not moment_cone_contains(THETA, (1.0, 0.0, 0.1), tol=1e-9)
    assert moment_cone_contains(THETA, (1.0, 1.0, 2.0 + 1e-10), tol=1e-9)


def test_weight_text_round_trip():
    text = format_weights(THETA, (1, 0, 2))
    assert text == "p=1,q=0,r=2"
    assert parse_weights(text) == {"p": 1, "q": 0, "r": 2}
    with pytest.raises(SpinError):
        parse_weights("p:1")


weights = st.lists(st.integers(0, 5), min_size=3, max_size=3)


@settings(max_examples=300)
@given(weights, weights, st.sampled_from(GENUS2))
def test_semigroup_closed_under_addition(a, b, graph):
    if in_semigroup(graph, a) and in_semigroup(graph, b):
        assert in_semigroup(graph, [x + y for x, y in zip(a, b)])


@settings(max_examples=300)
@given(weights, st.sampled_from(GENUS2))
def test_membership_matches_oracle(a, graph):
    assert in_semigroup(graph, a) == oracles.is_spin_member(graph, a)


@settings(max_examples=200)
@given(st.lists(st.floats(0, 10), min_size=3, max_size=3), st.floats(0.01, 5))
def test_cone_is_a_cone(a, t):
    if in_cone(THETA, a):
        assert in_cone(THETA, [t * x for x in a], tol=1e-9)
