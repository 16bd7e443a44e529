"""Length-function valuations on combinations of spin diagrams, tropical
embeddings of metric graphs, and the edge-order valuation on words."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Mapping, Sequence

from .graphs import GraphError, Marking, check_metric, spanned_canonical_form
from .spin import as_vector, in_semigroup, polytope_points
from .tensor import GammaTensor, monomial_tensor
from .words import edge_weight_vector, edge_weights

BOTTOM = float("-inf")
"""Valuation of the zero function."""

SpinCombination = Mapping[tuple[int, ...], object]  # weights in edge order -> coefficient


@dataclass(frozen=True)
class ValuationPoint:
    """A marked metric graph."""

    marking: Marking
    metric: Mapping[str, object]

    def __post_init__(self):
        check_metric(self.marking.graph, self.metric)

    @property
    def graph(self):
        return self.marking.graph

    def key(self) -> tuple:
        """Equal for the same point of the spanned-graph complex."""
        return spanned_canonical_form(self.marking, self.metric)

    @cached_property
    def _lengths(self):
        """(denominator, integer numerators) for exact metrics, else (None, floats)."""
        vals = [self.metric[eid] for eid in self.graph.edge_ids]
        if all(type(x) in (int, Fraction) for x in vals):
            den = math.lcm(*(x.denominator for x in vals))
            return den, tuple(x.numerator * (den // x.denominator) for x in vals)
        return None, tuple(vals)

    def dot(self, vec) -> object:
        """Sum of length times weight for a weight vector in edge order."""
        den, nums = self._lengths
        total = sum(n * a for n, a in zip(nums, vec) if a)
        if den is None or den == 1:
            return total
        return Fraction(total, den)


@lru_cache(maxsize=100_000)
def _is_spin_label(graph, vec) -> bool:
    return not graph.is_trivalent() or in_semigroup(graph, vec)


def eval_spin(point: ValuationPoint, weights):
    """Value of the valuation on a single spin diagram: sum of length times weight."""
    vec = as_vector(point.graph, weights)
    if not _is_spin_label(point.graph, vec):
        raise ValueError(f"{vec} is not a spin diagram on this graph")
    return point.dot(vec)


def eval_combo(point: ValuationPoint, combo: SpinCombination):
    """Maximum of eval_spin over the terms with nonzero coefficient."""
    best = BOTTOM
    for w, c in combo.items():
        if c == 0:
            continue
        val = eval_spin(point, w)
        if best == BOTTOM or val > best:
            best = val
    return best


def eval_word(point: ValuationPoint, word):
    """Length of the reduced loop of the word at this point."""
    return point.dot(edge_weight_vector(word, point.marking))


def combo_sum(f: SpinCombination, g: SpinCombination) -> dict:
    out = dict(f)
    for w, c in g.items():
        out[w] = out.get(w, 0) + c
    return {w: c for w, c in out.items() if c != 0}


def combo_product(f: SpinCombination, g: SpinCombination) -> dict:
    """Product in the semigroup algebra: labels add, coefficients multiply."""
    out: dict = {}
    for a, c in f.items():
        for b, k in g.items():
            lab = tuple(x + y for x, y in zip(a, b))
            out[lab] = out.get(lab, 0) + c * k
    return {w: c for w, c in out.items() if c != 0}


def tropical_embed(point: ValuationPoint, words: Sequence) -> list:
    return [eval_word(point, w) for w in words]


@dataclass
class InjectivityReport:
    points: int
    words: int
    collisions: list[tuple[int, int]] = field(default_factory=list)
    same_point: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.collisions


def check_injectivity(points: Sequence[ValuationPoint], words: Sequence) -> InjectivityReport:
    """Find pairs of distinct points with identical tropical vectors."""
    vectors = [tuple(tropical_embed(p, words)) for p in points]
    keys = [p.key() for p in points]
    report = InjectivityReport(len(points), len(words))
    for i, j in combinations(range(len(points)), 2):
        if vectors[i] == vectors[j]:
            (report.same_point if keys[i] == keys[j] else report.collisions).append((i, j))
    return report


def random_rational_metric(marking: Marking, rng: random.Random, max_num: int = 30, max_den: int = 12) -> dict:
    return {eid: Fraction(rng.randint(1, max_num), rng.randint(1, max_den)) for eid in marking.graph.edge_ids}


def nok_valuation(marking: Marking, order: Sequence[str], word_or_tensor) -> tuple[int, ...]:
    """Edge-weight vector listed in the given edge order (compare lexicographically).

    Accepts a word, a GammaTensor, or a list of words standing for a product.
    """
    ids = marking.graph.edge_ids
    if sorted(order) != sorted(ids) or len(order) != len(ids):
        raise GraphError("order must be a permutation of the edges")
    if isinstance(word_or_tensor, GammaTensor):
        weights = word_or_tensor.weights()
    elif word_or_tensor and isinstance(word_or_tensor[0], (list, tuple)):
        weights = monomial_tensor(word_or_tensor, marking).weights()
    else:
        weights = edge_weights(word_or_tensor, marking)
    return tuple(weights[eid] for eid in order)


def random_combination(point: ValuationPoint, rng: random.Random, terms: int = 4, level: int = 4,
                       coeff: int = 3) -> dict:
    """Random integer combination of spin diagrams with weights at most level."""
    members = _members(point.graph, level)
    out: dict = {}
    for _ in range(rng.randint(1, terms)):
        w = rng.choice(members)
        c = rng.randint(-coeff, coeff) or 1
        out[w] = out.get(w, 0) + c
    return {w: c for w, c in out.items() if c != 0}


@lru_cache(maxsize=None)
def _members(graph, level):
    return polytope_points(graph, level)


@dataclass
class AxiomReport:
    trials: int = 0
    product_failures: list = field(default_factory=list)
    sum_failures: list = field(default_factory=list)
    scalar_failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.product_failures or self.sum_failures or self.scalar_failures)


def valuation_axiom_suite(point: ValuationPoint, seed: int, trials: int = 1000) -> AxiomReport:
    """Check v(fg) = v(f) + v(g), v(f+g) <= max and v(c) = 0 on random data.

    Sums are drawn so that cancellation happens regularly: g is often -f,
    sometimes with extra terms.
    """
    rng = random.Random(seed)
    report = AxiomReport()
    zero = tuple(0 for _ in point.graph.edges)
    for t in range(trials):
        f = random_combination(point, rng)
        g = random_combination(point, rng)
        if rng.random() < 0.3:
            g = combo_sum({w: -c for w, c in f.items()}, g if rng.random() < 0.5 else {})
        vf, vg = eval_combo(point, f), eval_combo(point, g)
        prod = eval_combo(point, combo_product(f, g))
        expected = BOTTOM if BOTTOM in (vf, vg) else vf + vg
        if prod != expected:
            report.product_failures.append((t, f, g))
        s = eval_combo(point, combo_sum(f, g))
        if not (s == BOTTOM or (s <= max(vf, vg))):
            report.sum_failures.append((t, f, g))
        if vf != vg and s != max(vf, vg):
            report.sum_failures.append((t, f, g))
        c = rng.randint(1, 9) * rng.choice((1, -1))
        if eval_combo(point, {zero: c}) != 0:
            report.scalar_failures.append((t, c))
        report.trials += 1
    return report
