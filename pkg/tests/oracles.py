"""Brute-force reference implementations used to cross-check the package.

These deliberately avoid the package's own algorithms: words are reduced by
repeated pair deletion, loops are found by exhaustive walking, semigroup
questions are answered by scanning boxes.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


def naive_reduce(word):
    w = list(word)
    changed = True
    while changed:
        changed = False
        for i in range(len(w) - 1):
            if w[i] == -w[i + 1]:
                del w[i:i + 2]
                changed = True
                break
    return tuple(w)


def naive_cyclic_reduce(word):
    w = naive_reduce(word)
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return w


def rotation_class(word):
    w = naive_cyclic_reduce(word)
    return frozenset(w[i:] + w[:i] for i in range(len(w))) if w else frozenset([()])


def class_up_to_inversion(word):
    w = naive_cyclic_reduce(word)
    inv = tuple(-k for k in reversed(w))
    return rotation_class(w) | rotation_class(inv)


def count_S2g(g):
    """Size of the set of cyclic words with each generator used at most twice."""
    alphabet = [k for i in range(1, g + 1) for k in (i, -i)]
    classes = set()
    for n in range(1, 2 * g + 1):
        for w in itertools.product(alphabet, repeat=n):
            if any(sum(1 for k in w if abs(k) == i) > 2 for i in range(1, g + 1)):
                continue
            if naive_cyclic_reduce(w) != w:
                continue
            classes.add(class_up_to_inversion(w))
    return len(classes)


def _ends(graph, eid, sign):
    e = graph.edge(eid)
    return (e.src, e.dst) if sign > 0 else (e.dst, e.src)


def reduced_loop_table(marking, max_length):
    """Map conjugacy class of read-back words to the edge weights of the loop.

    Walks every closed non-backtracking edge path (also across the closing
    point) of cellular length at most max_length.
    """
    graph = marking.graph
    gen_index = {eid: i + 1 for i, eid in enumerate(marking.generators)}
    steps = [(e.id, s) for e in graph.edges for s in (1, -1)]
    table = {}

    def record(path):
        word = tuple(gen_index[e] * s for e, s in path if e in gen_index)
        key = rotation_class(word)
        weights = {eid: 0 for eid in graph.edge_ids}
        for e, _ in path:
            weights[e] += 1
        # every cyclically reduced loop in a class is a rotation of the same one
        prev = table.setdefault(key, (len(path), weights))
        if prev != (len(path), weights):
            raise AssertionError(f"two different reduced loops for {word}")

    def walk(path, start, here):
        if path and here == start and path[0] != (path[-1][0], -path[-1][1]):
            record(path)
        if len(path) == max_length:
            return
        for st in steps:
            a, b = _ends(graph, *st)
            if a != here or (path and st == (path[-1][0], -path[-1][1])):
                continue
            path.append(st)
            walk(path, start, b)
            path.pop()

    for v in graph.vertices:
        walk([], v, v)
    return table


def oracle_weights(table, word):
    """Weights of the reduced loop of word, or None if it was not reached."""
    hit = table.get(rotation_class(word))
    return None if hit is None else hit[1]


def is_spin_member(graph, vec):
    pos = {eid: i for i, eid in enumerate(graph.edge_ids)}
    for v in graph.vertices:
        ws = []
        for e in graph.edges:
            if e.src == v:
                ws.append(vec[pos[e.id]])
            if e.dst == v:
                ws.append(vec[pos[e.id]])
        if len(ws) != 3:
            raise ValueError("not trivalent")
        a, b, c = sorted(ws)
        if c > a + b or (a + b + c) % 2:
            return False
    return all(x >= 0 for x in vec)


def members_up_to(graph, bound):
    return [v for v in itertools.product(range(bound + 1), repeat=len(graph.edges)) if is_spin_member(graph, v)]


def indecomposables(graph, bound):
    """Nonzero members in the box that are not a sum of two nonzero members."""
    members = set(members_up_to(graph, bound))
    out = []
    for m in members:
        if not any(m):
            continue
        reducible = False
        for part in itertools.product(*(range(x + 1) for x in m)):
            if not any(part) or part == m:
                continue
            rest = tuple(x - y for x, y in zip(m, part))
            if part in members and rest in members:
                reducible = True
                break
        if not reducible:
            out.append(m)
    return sorted(out)


def rational_rank(rows):
    """Rank by exact Gaussian elimination."""
    m = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        pivot = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c] != 0:
                f = m[i][c] / m[rank][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def face_dimension_exact(graph, ones, levels=(1, 2, 3, 4)):
    idx = [graph.edge_ids.index(e) for e in ones]
    pts = set()
    for m in levels:
        for p in members_up_to(graph, m):
            if all(p[i] == m for i in idx):
                pts.add(tuple(Fraction(x, m) for x in p))
    if not pts:
        return None
    pts = sorted(pts)
    return rational_rank([[a - b for a, b in zip(p, pts[0])] for p in pts[1:]]) if len(pts) > 1 else 0


def full_canonical_form(graph):
    """Isomorphism invariant by trying every vertex numbering."""
    best = None
    for perm in itertools.permutations(range(len(graph.vertices))):
        num = dict(zip(graph.vertices, perm))
        code = tuple(sorted(tuple(sorted((num[e.src], num[e.dst]))) for e in graph.edges))
        if best is None or code < best:
            best = code
    return (len(graph.vertices), best)
