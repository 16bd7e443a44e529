import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from charvar.graphs import GraphError, Marking, enumerate_spanned_graphs, unit_metric
from charvar.spin import polytope_points
from charvar.tensor import monomial_tensor
from charvar.valuation import (
    BOTTOM, ValuationPoint, check_injectivity, combo_product, combo_sum, eval_combo, eval_spin, eval_word,
    nok_valuation, random_combination, random_rational_metric, tropical_embed, valuation_axiom_suite,
)
from charvar.words import apply_automorphism, edge_weights, enumerate_S2g, random_word

SPANNED2 = enumerate_spanned_graphs(2)
S22 = enumerate_S2g(2)


def point(marking, lens):
    return ValuationPoint(marking, dict(zip(marking.graph.edge_ids, lens)))


def test_eval_spin_examples(theta):
    assert eval_spin(point(theta, (1, 1, 1)), (0, 0, 0)) == 0
    assert eval_spin(point(theta, (1, 1, 1)), (0, 1, 1)) == 2
    assert eval_spin(point(theta, (2, 1, 0)), (1, 1, 2)) == 3
    with pytest.raises(ValueError):
        eval_spin(point(theta, (1, 1, 1)), (1, 1, 1))


def test_eval_combo_examples(theta):
    pt = point(theta, (1, 1, 1))
    assert eval_combo(pt, {(0, 1, 1): 1, (1, 1, 0): 1}) == 2
    assert eval_combo(pt, {(1, 1, 2): 3, (0, 1, 1): -1}) == 4
    assert eval_combo(pt, {(0, 0, 0): 1}) == 0
    assert eval_combo(pt, {}) == BOTTOM
    assert eval_combo(pt, {(0, 1, 1): 0}) == BOTTOM


def test_eval_word_examples(theta):
    pt = point(theta, (1, 1, 1))
    assert eval_word(pt, []) == 0
    assert eval_word(pt, [1, -2]) == 2
    assert eval_word(pt, [1]) + eval_word(pt, [1, 2]) == sum(monomial_tensor([[1], [1, 2]], theta).weights().values())


def test_tropical_embed_examples(theta):
    zero = point(theta, (0, 0, 0))
    assert tropical_embed(zero, S22) == [0] * len(S22)
    pt = point(theta, (Fraction(1, 2), 2, 3))
    scaled = point(theta, (Fraction(3, 2), 6, 9))
    assert tropical_embed(scaled, S22) == [3 * x for x in tropical_embed(pt, S22)]
    commutator = S22.index((1, 2, -1, -2))
    assert tropical_embed(point(theta, (1, 1, 1)), S22)[commutator] == 6


def test_injectivity_same_point_not_a_violation(theta):
    pt = point(theta, (1, 2, 3))
    rep = check_injectivity([pt, pt], S22)
    assert rep.ok and rep.same_point == [(0, 1)]


def test_injectivity_relabelled_point_is_same(theta):
    a = point(theta, (1, 2, 3))
    b = ValuationPoint(Marking(theta.graph, frozenset({"p"}), ("q", "r"), "v"), a.metric)
    rep = check_injectivity([a, b], S22)
    assert rep.ok


def test_injectivity_genus_two_random():
    rng = random.Random(0)
    pts = [ValuationPoint(m, random_rational_metric(m, rng)) for m in SPANNED2 for _ in range(20)]
    assert check_injectivity(pts, S22).ok


def test_one_edge_change_separates():
    rng = random.Random(1)
    for m in SPANNED2:
        base = random_rational_metric(m, rng)
        for e in m.graph.edge_ids:
            moved = dict(base)
            moved[e] += Fraction(1, 7)
            assert tropical_embed(ValuationPoint(m, base), S22) != tropical_embed(ValuationPoint(m, moved), S22)


def test_nok_examples(theta):
    assert nok_valuation(theta, ("p", "q", "r"), [1]) == (1, 1, 0)
    assert nok_valuation(theta, ("r", "q", "p"), [1]) == (0, 1, 1)
    assert nok_valuation(theta, ("p", "q", "r"), []) == (0, 0, 0)
    with pytest.raises(GraphError):
        nok_valuation(theta, ("p", "q"), [1])
    with pytest.raises(GraphError):
        nok_valuation(theta, ("p", "q", "q"), [1])


def test_nok_additive_on_monomials(theta):
    rng = random.Random(3)
    order = ("q", "p", "r")
    for _ in range(100):
        a, b = random_word(rng, 2, 6), random_word(rng, 2, 6)
        joint = nok_valuation(theta, order, [a, b])
        assert joint == tuple(x + y for x, y in zip(nok_valuation(theta, order, a), nok_valuation(theta, order, b)))
        assert nok_valuation(theta, order, monomial_tensor([a, b], theta)) == joint


def test_nok_coordinate_sum_is_unit_length():
    for m in SPANNED2:
        pt = ValuationPoint(m, unit_metric(m.graph, 1))
        for w in S22:
            assert sum(nok_valuation(m, m.graph.edge_ids, w)) == eval_word(pt, w)


def test_combo_algebra():
    f = {(0, 1, 1): 2, (1, 1, 0): -1}
    g = {(0, 1, 1): -2}
    assert combo_sum(f, g) == {(1, 1, 0): -1}
    assert combo_product({(0, 1, 1): 2}, {(1, 0, 1): 3}) == {(1, 1, 2): 6}
    # exact cancellation in products
    assert combo_product({(0, 1, 1): 1, (1, 0, 1): 1}, {(1, 0, 1): 1, (0, 1, 1): -1}) == {
        (2, 0, 2): 1, (0, 2, 2): -1}


def test_axiom_examples(theta):
    pt = point(theta, (3, 1, 2))
    a, b = (0, 1, 1), (1, 0, 1)
    assert eval_combo(pt, combo_product({a: 1}, {b: 1})) == eval_spin(pt, a) + eval_spin(pt, b)
    assert eval_combo(pt, combo_sum({a: 1}, {b: 1})) == max(eval_spin(pt, a), eval_spin(pt, b))


@pytest.mark.parametrize("m", SPANNED2)
def test_axiom_suite_clean(m):
    pt = ValuationPoint(m, random_rational_metric(m, random.Random(7)))
    report = valuation_axiom_suite(pt, seed=7, trials=300)
    assert report.ok and report.trials == 300


def test_axiom_suite_detects_broken_valuation(theta, monkeypatch):
    import charvar.valuation as val
    pt = point(theta, (1, 2, 3))
    monkeypatch.setattr(val, "eval_combo", lambda p, f: BOTTOM if not f else min(eval_spin(p, w) for w in f))
    assert not val.valuation_axiom_suite(pt, seed=0, trials=50).ok


def test_random_combination_members(theta):
    pt = point(theta, (1, 1, 1))
    members = set(polytope_points(theta.graph, 4))
    rng = random.Random(0)
    for _ in range(50):
        f = random_combination(pt, rng)
        assert f and all(w in members and c != 0 for w, c in f.items())


def test_metric_validation(theta):
    with pytest.raises(GraphError):
        ValuationPoint(theta, {"p": 1, "q": 1})
    with pytest.raises(GraphError):
        ValuationPoint(theta, {"p": 1, "q": -1, "r": 1})


def test_automorphism_translate_stays_injective(theta):
    # Precomposing the marking with x1 -> x1 x2 moves the point; values are
    # read through the substitution and still separate random metrics.
    rng = random.Random(5)
    images = {1: (1, 2), 2: (2,)}
    words = [apply_automorphism(w, images) for w in S22]
    pts = [point(theta, [Fraction(rng.randint(1, 20), rng.randint(1, 5)) for _ in range(3)]) for _ in range(20)]
    vecs = {tuple(tropical_embed(p, words)) for p in pts}
    assert len(vecs) == len({p.key() for p in pts})


lens = st.lists(st.fractions(min_value=0, max_value=20, max_denominator=12), min_size=3, max_size=3)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SPANNED2), lens, st.lists(st.sampled_from([1, -1, 2, -2]), max_size=10),
       st.fractions(min_value=0, max_value=10, max_denominator=7))
def test_word_value_is_weighted_dot_product(m, ls, w, t):
    pt = point(m, ls)
    weights = edge_weights(w, m)
    assert eval_word(pt, w) == eval_spin(pt, weights)
    assert eval_word(point(m, [t * x for x in ls]), w) == t * eval_word(pt, w)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(SPANNED2), lens, lens, st.lists(st.sampled_from([1, -1, 2, -2]), max_size=10))
def test_word_value_linear_in_metric(m, a, b, w):
    s = [x + y for x, y in zip(a, b)]
    assert eval_word(point(m, s), w) == eval_word(point(m, a), w) + eval_word(point(m, b), w)
