"""Free-group words, their images as edge loops, and edge weights."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .graphs import Graph, GraphError, Marking


class WordError(ValueError):
    """Raised for malformed words, loops or substitutions."""


@dataclass(frozen=True)
class Word:
    """A word in x_1..x_g. Letter k means x_k, -k its inverse."""

    letters: tuple[int, ...]
    rank: int | None = None

    def __post_init__(self):
        letters = tuple(int(k) for k in self.letters)
        object.__setattr__(self, "letters", letters)
        for k in letters:
            if k == 0:
                raise WordError("letter 0 is not a generator")
            if self.rank is not None and abs(k) > self.rank:
                raise WordError(f"letter {k} exceeds rank {self.rank}")

    @classmethod
    def parse(cls, text: str, rank: int | None = None) -> "Word":
        try:
            letters = tuple(int(tok) for tok in text.replace(",", " ").split())
        except ValueError:
            raise WordError(f"cannot parse word {text!r}") from None
        return cls(letters, rank)

    def __iter__(self):
        return iter(self.letters)

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return " ".join(str(k) for k in self.letters)

    def inverse(self) -> "Word":
        return Word(tuple(-k for k in reversed(self.letters)), self.rank)


def _letters(word) -> tuple[int, ...]:
    if isinstance(word, Word):
        return word.letters
    letters = tuple(int(k) for k in word)
    if 0 in letters:
        raise WordError("letter 0 is not a generator")
    return letters


def reduce(word) -> tuple[int, ...]:
    """Freely reduce: cancel adjacent x x^-1 pairs."""
    stack: list[int] = []
    for k in _letters(word):
        if stack and stack[-1] == -k:
            stack.pop()
        else:
            stack.append(k)
    return tuple(stack)


def cyclic_reduce(word) -> tuple[int, ...]:
    w = reduce(word)
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return w[i:j + 1]


def _letter_key(k: int) -> tuple[int, int]:
    # x1 < x1^-1 < x2 < x2^-1 < ...
    return (abs(k), 0 if k > 0 else 1)


def _least_rotation(w: tuple[int, ...]) -> tuple[int, ...]:
    if not w:
        return w
    rots = [w[i:] + w[:i] for i in range(len(w))]
    return min(rots, key=lambda r: [_letter_key(k) for k in r])


def conjugacy_key(word) -> tuple[int, ...]:
    """Canonical representative of the conjugacy class (no inversion)."""
    return _least_rotation(cyclic_reduce(word))


def cyclic_canonical(word) -> tuple[int, ...]:
    """Canonical representative of the class of w up to conjugacy and inversion."""
    w = cyclic_reduce(word)
    inv = tuple(-k for k in reversed(w))
    a, b = _least_rotation(w), _least_rotation(inv)
    return min(a, b, key=lambda r: [_letter_key(k) for k in r])


def enumerate_S2g(g: int) -> list[tuple[int, ...]]:
    """Canonical nonempty cyclically reduced words using each generator at most twice."""
    if g < 1:
        raise WordError("rank must be at least 1")
    letters = [k for i in range(1, g + 1) for k in (i, -i)]
    found = set()

    def rec(prefix: list[int], counts: list[int]):
        if prefix and prefix[0] != -prefix[-1]:
            found.add(cyclic_canonical(prefix))
        for k in letters:
            if counts[abs(k)] >= 2 or (prefix and prefix[-1] == -k):
                continue
            counts[abs(k)] += 1
            prefix.append(k)
            rec(prefix, counts)
            prefix.pop()
            counts[abs(k)] -= 1

    rec([], [0] * (g + 1))
    return sorted(found, key=lambda w: (len(w), [_letter_key(k) for k in w]))


def apply_automorphism(word, images: Mapping[int, Sequence[int]]) -> tuple[int, ...]:
    """Substitute x_k -> images[k] (missing generators are fixed) and reduce."""
    out: list[int] = []
    for k in _letters(word):
        img = tuple(images.get(abs(k), (abs(k),)))
        out.extend(img if k > 0 else tuple(-x for x in reversed(img)))
    return reduce(out)


def random_word(rng: random.Random, rank: int, max_length: int) -> tuple[int, ...]:
    """A random nonempty reduced word of length at most max_length."""
    n = rng.randint(1, max_length)
    w: list[int] = []
    while len(w) < n:
        k = rng.choice([i for i in range(1, rank + 1)] + [-i for i in range(1, rank + 1)])
        if w and w[-1] == -k:
            continue
        w.append(k)
    return tuple(w)


# Edge loops.

Traversal = tuple[str, int]


@dataclass(frozen=True)
class EdgeLoop:
    """A closed edge path as (edge id, +1 forward / -1 backward) steps."""

    steps: tuple[Traversal, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple((str(e), int(s)) for e, s in self.steps))
        for e, s in self.steps:
            if s not in (1, -1):
                raise WordError(f"bad direction {s} on edge {e!r}")

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def format(self) -> str:
        return ",".join(f"{e}:{'+' if s > 0 else '-'}" for e, s in self.steps)

    @classmethod
    def parse(cls, text: str) -> "EdgeLoop":
        steps = []
        for tok in filter(None, (t.strip() for t in text.split(","))):
            eid, _, sign = tok.rpartition(":")
            if not eid or sign not in "+-" or len(sign) != 1:
                raise WordError(f"bad loop token {tok!r}")
            steps.append((eid, 1 if sign == "+" else -1))
        return cls(tuple(steps))


def _step_ends(graph: Graph, step: Traversal) -> tuple[str, str]:
    e = graph.edge(step[0])
    return (e.src, e.dst) if step[1] > 0 else (e.dst, e.src)


def check_loop(loop: EdgeLoop, graph: Graph) -> None:
    """Raise if consecutive steps do not meet or the path is not closed."""
    n = len(loop.steps)
    for i in range(n):
        _, end = _step_ends(graph, loop.steps[i])
        start, _ = _step_ends(graph, loop.steps[(i + 1) % n])
        if end != start:
            raise WordError(f"loop breaks between steps {i} and {(i + 1) % n}")


def pushforward(word, marking: Marking) -> EdgeLoop:
    """Based edge loop of a word: generator loops concatenated, unreduced."""
    steps: list[Traversal] = []
    for k in _letters(word):
        if abs(k) > marking.rank:
            raise WordError(f"letter {k} exceeds rank {marking.rank}")
        loop = marking.generator_loop(abs(k))
        if k < 0:
            loop = tuple((e, -s) for e, s in reversed(loop))
        steps.extend(loop)
    return EdgeLoop(tuple(steps))


def loop_reduce(loop: EdgeLoop) -> EdgeLoop:
    """Cyclically reduce an edge loop by cancelling immediate backtracks."""
    stack: list[Traversal] = []
    for e, s in loop.steps:
        if stack and stack[-1] == (e, -s):
            stack.pop()
        else:
            stack.append((e, s))
    i, j = 0, len(stack) - 1
    while i < j and stack[i] == (stack[j][0], -stack[j][1]):
        i += 1
        j -= 1
    return EdgeLoop(tuple(stack[i:j + 1]))


def loop_to_word(loop: EdgeLoop, marking: Marking) -> tuple[int, ...]:
    """Read a loop back as a word by recording generator-edge traversals."""
    idx = marking.generator_index
    return tuple(idx[e] * s for e, s in loop.steps if e in idx)


@lru_cache(maxsize=200_000)
def _weights_cached(letters: tuple[int, ...], marking: Marking) -> tuple[int, ...]:
    loop = loop_reduce(pushforward(letters, marking))
    count = {eid: 0 for eid in marking.graph.edge_ids}
    for e, _ in loop.steps:
        count[e] += 1
    return tuple(count[eid] for eid in marking.graph.edge_ids)


def edge_weight_vector(word, marking: Marking) -> tuple[int, ...]:
    """edge_weights as a tuple in the graph's edge order."""
    return _weights_cached(_letters(word), marking)


def edge_weights(word, marking: Marking) -> dict[str, int]:
    """Number of times the reduced loop of the word crosses each edge."""
    return dict(zip(marking.graph.edge_ids, edge_weight_vector(word, marking)))


def weighted_length(weights: Mapping[str, int], metric: Mapping[str, object]):
    """Sum of length times weight, exact for int and Fraction inputs."""
    terms = [(metric[eid], a) for eid, a in weights.items() if a]
    if all(type(x) is int for x, _ in terms):
        return sum(x * a for x, a in terms)
    if all(type(x) in (int, Fraction) for x, _ in terms):
        # one common denominator instead of a Fraction per term
        den = math.lcm(*(x.denominator for x, _ in terms))
        return Fraction(sum(x.numerator * (den // x.denominator) * a for x, a in terms), den)
    total = 0
    for x, a in terms:
        total += x * a
    return total


def length(word, marking: Marking, metric: Mapping[str, object]):
    """Length of the reduced loop of the word under the metric."""
    missing = set(marking.graph.edge_ids) - set(metric)
    if missing:
        raise GraphError(f"metric misses edges {sorted(missing)}")
    return weighted_length(edge_weights(word, marking), metric)


def parse_word_list(text: str) -> list[tuple[int, ...]]:
    """Semicolon-separated words, e.g. "1; 1 -2; 2 2"."""
    return [Word.parse(part).letters for part in text.split(";") if part.strip()]


def words_from_lines(lines: Iterable[str]) -> list[tuple[int, ...]]:
    return [Word.parse(line).letters for line in lines if line.strip() and not line.lstrip().startswith("#")]
