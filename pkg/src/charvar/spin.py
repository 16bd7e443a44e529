"""Spin-diagram semigroup of a trivalent graph and its lattice polytopes.

A weighting assigns a non-negative integer to each edge. At a trivalent
vertex the three half-edge weights (a loop counts twice) must satisfy the
triangle inequalities and have even sum.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graphs import Graph, GraphError

Weights = tuple[int, ...]


class SpinError(ValueError):
    """Raised for inputs outside the semigroup or bad faces."""


def require_trivalent(graph: Graph) -> None:
    bad = [v for v, d in graph.valence.items() if d != 3]
    if bad:
        raise GraphError(f"graph is not trivalent at {sorted(bad)}")


def as_vector(graph: Graph, weights) -> tuple:
    """Accept a mapping keyed by edge id or a sequence in edge order."""
    if isinstance(weights, Mapping):
        missing = set(graph.edge_ids) - set(weights)
        if missing:
            raise SpinError(f"weighting misses edges {sorted(missing)}")
        return tuple(weights[eid] for eid in graph.edge_ids)
    vec = tuple(weights)
    if len(vec) != len(graph.edges):
        raise SpinError(f"expected {len(graph.edges)} weights, got {len(vec)}")
    return vec


def as_mapping(graph: Graph, vec: Sequence) -> dict[str, object]:
    return dict(zip(graph.edge_ids, vec))


@lru_cache(maxsize=None)
def _vertex_links(graph: Graph) -> tuple[tuple[int, ...], ...]:
    """Edge positions of the half-edges at each vertex."""
    pos = {eid: i for i, eid in enumerate(graph.edge_ids)}
    links = []
    for v in graph.vertices:
        links.append(tuple(pos[eid] for eid, _ in graph.half_edges[v]))
    return tuple(links)


def _triangle_ok(x, y, z, tol=0) -> bool:
    return x <= y + z + tol and y <= x + z + tol and z <= x + y + tol


def in_cone(graph: Graph, weights, tol=0) -> bool:
    """Non-negative with the triangle inequalities at every vertex."""
    require_trivalent(graph)
    vec = as_vector(graph, weights)
    if any(x < -tol for x in vec):
        return False
    return all(_triangle_ok(*(vec[i] for i in link), tol=tol) for link in _vertex_links(graph))


def in_lattice(graph: Graph, weights) -> bool:
    """Integral with even weight sum at every vertex."""
    require_trivalent(graph)
    vec = as_vector(graph, weights)
    if any(int(x) != x for x in vec):
        return False
    return all(sum(int(vec[i]) for i in link) % 2 == 0 for link in _vertex_links(graph))


def in_semigroup(graph: Graph, weights) -> bool:
    return in_cone(graph, weights) and in_lattice(graph, weights)


def _members_in_box(graph: Graph, bound: int) -> list[Weights]:
    require_trivalent(graph)
    links = _vertex_links(graph)
    out = []
    for vec in itertools.product(range(bound + 1), repeat=len(graph.edges)):
        ok = True
        for link in links:
            x, y, z = (vec[i] for i in link)
            if (x + y + z) % 2 or not _triangle_ok(x, y, z):
                ok = False
                break
        if ok:
            out.append(vec)
    return out


@lru_cache(maxsize=None)
def hilbert_basis(graph: Graph) -> tuple[Weights, ...]:
    """Indecomposable elements of the semigroup, in edge order.

    All of them have entries at most 2, so it suffices to remove sums of two
    nonzero members from the nonzero members of the box {0,1,2}^E.
    """
    members = [m for m in _members_in_box(graph, 2) if any(m)]
    member_set = set(members)
    basis = []
    for m in members:
        split = False
        for part in members:
            if part == m or any(p > x for p, x in zip(part, m)):
                continue
            if tuple(x - p for x, p in zip(m, part)) in member_set:
                split = True
                break
        if not split:
            basis.append(m)
    return tuple(sorted(basis))


def decompose(graph: Graph, weights) -> dict[Weights, int]:
    """Write a semigroup element as a sum of Hilbert basis elements.

    Returns basis element -> multiplicity. Search is depth-first: some basis
    element must cover the first nonzero coordinate.
    """
    vec = tuple(int(x) for x in as_vector(graph, weights))
    if not in_semigroup(graph, vec):
        raise SpinError(f"{vec} is not in the semigroup")
    result = _decompose(graph, vec)
    if result is None:
        raise SpinError(f"no decomposition found for {vec}")
    out: dict[Weights, int] = {}
    for b in result:
        out[b] = out.get(b, 0) + 1
    return dict(sorted(out.items()))


@lru_cache(maxsize=500_000)
def _decompose(graph: Graph, vec: Weights):
    if not any(vec):
        return ()
    first = next(i for i, x in enumerate(vec) if x)
    for b in hilbert_basis(graph):
        if b[first] == 0 or any(p > x for p, x in zip(b, vec)):
            continue
        rest = tuple(x - p for x, p in zip(vec, b))
        if not _parity_and_cone(graph, rest):
            continue
        sub = _decompose(graph, rest)
        if sub is not None:
            return (b,) + sub
    return None


def _parity_and_cone(graph: Graph, vec: Weights) -> bool:
    for link in _vertex_links(graph):
        x, y, z = (vec[i] for i in link)
        if (x + y + z) % 2 or not _triangle_ok(x, y, z):
            return False
    return True


def polytope_points(graph: Graph, level: int) -> list[Weights]:
    """Semigroup elements with every edge weight at most the level."""
    if level < 0:
        raise SpinError("level must be non-negative")
    return _members_in_box(graph, level)


def face_points(graph: Graph, ones: Iterable[str], level: int) -> list[Weights]:
    """Points at the given level whose weights on the chosen edges equal the level."""
    idx = [graph.edge_ids.index(eid) for eid in ones]
    return [p for p in polytope_points(graph, level) if all(p[i] == level for i in idx)]


def face_dimension(graph: Graph, ones: Iterable[str], levels: Sequence[int] = (1, 2, 3, 4)) -> int:
    """Dimension of the face where the chosen edges have weight 1.

    Uses the affine hull of the rational points p/m found at the probed levels.
    """
    ones = list(ones)
    unknown = set(ones) - set(graph.edge_ids)
    if unknown:
        raise GraphError(f"unknown edges {sorted(unknown)}")
    scale = int(np.lcm.reduce(list(levels)))
    pts = set()
    for m in levels:
        for p in face_points(graph, ones, m):
            pts.add(tuple(x * (scale // m) for x in p))
    if not pts:
        raise SpinError(f"face {sorted(ones)} has no points at levels {list(levels)}")
    pts = sorted(pts)
    base = np.array(pts[0])
    diffs = np.array([np.array(p) - base for p in pts[1:]], dtype=float)
    if len(diffs) == 0:
        return 0
    return int(np.linalg.matrix_rank(diffs))


def face_codimension(graph: Graph, ones: Iterable[str], levels: Sequence[int] = (1, 2, 3, 4)) -> int:
    return len(graph.edges) - face_dimension(graph, ones, levels)


def moment_cone_contains(graph: Graph, lengths, tol: float = 1e-9) -> bool:
    """Real edge lengths satisfying the vertex triangle inequalities."""
    return in_cone(graph, lengths, tol=tol)


def format_weights(graph: Graph, vec: Sequence) -> str:
    return ",".join(f"{eid}={x}" for eid, x in zip(graph.edge_ids, vec))


def parse_weights(text: str) -> dict[str, int]:
    """Parse "p=1,q=2" into a mapping."""
    out = {}
    for tok in filter(None, (t.strip() for t in text.split(","))):
        eid, sep, val = tok.partition("=")
        if not sep:
            raise SpinError(f"bad weight token {tok!r}")
        try:
            out[eid.strip()] = int(val)
        except ValueError:
            raise SpinError(f"weight {val!r} is not an integer") from None
    return out
