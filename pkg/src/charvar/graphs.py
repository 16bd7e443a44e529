"""Multigraphs with loops, spanning trees, markings and spanned-graph enumeration."""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence


class GraphError(ValueError):
    """Raised for malformed or unsuitable graphs."""


class Edge(NamedTuple):
    id: str
    src: str
    dst: str

    @property
    def is_loop(self) -> bool:
        return self.src == self.dst


@dataclass(frozen=True)
class Graph:
    """A finite multigraph. Loops and parallel edges are allowed.

    Each edge carries an orientation src -> dst. A loop contributes two
    half-edges, hence 2 to the valence of its vertex.
    """

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(Edge(*e) for e in self.edges))

    @classmethod
    def build(cls, vertices: Iterable[str], edges: Iterable[Sequence[str]]) -> "Graph":
        g = cls(tuple(vertices), tuple(Edge(*e) for e in edges))
        problems = g.structural_problems()
        if problems:
            raise GraphError("; ".join(problems))
        return g

    @cached_property
    def edge_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.edges)

    @cached_property
    def edge_map(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    def edge(self, eid: str) -> Edge:
        try:
            return self.edge_map[eid]
        except KeyError:
            raise GraphError(f"unknown edge {eid!r}") from None

    @cached_property
    def valence(self) -> dict[str, int]:
        val = {v: 0 for v in self.vertices}
        for e in self.edges:
            val[e.src] += 1
            val[e.dst] += 1
        return val

    @cached_property
    def half_edges(self) -> dict[str, tuple[tuple[str, int], ...]]:
        """Half-edges at each vertex as (edge id, end) with end 0 = source, 1 = sink."""
        out: dict[str, list] = {v: [] for v in self.vertices}
        for e in self.edges:
            out[e.src].append((e.id, 0))
            out[e.dst].append((e.id, 1))
        return {v: tuple(h) for v, h in out.items()}

    @property
    def betti(self) -> int:
        return len(self.edges) - len(self.vertices) + self.component_count()

    def structural_problems(self) -> list[str]:
        problems = []
        dup_v = [v for v, c in Counter(self.vertices).items() if c > 1]
        if dup_v:
            problems.append(f"duplicate vertex ids {sorted(dup_v)}")
        dup_e = [e for e, c in Counter(self.edge_ids).items() if c > 1]
        if dup_e:
            problems.append(f"duplicate edge ids {sorted(dup_e)}")
        vs = set(self.vertices)
        for e in self.edges:
            for end in (e.src, e.dst):
                if end not in vs:
                    problems.append(f"edge {e.id!r} has unknown endpoint {end!r}")
        return problems

    def components(self, edge_ids: Iterable[str] | None = None) -> list[set[str]]:
        """Vertex sets of the connected components using the given edges."""
        ids = self.edge_ids if edge_ids is None else edge_ids
        parent = {v: v for v in self.vertices}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for eid in ids:
            e = self.edge(eid)
            parent[find(e.src)] = find(e.dst)
        groups: dict[str, set[str]] = {}
        for v in self.vertices:
            groups.setdefault(find(v), set()).add(v)
        return list(groups.values())

    def component_count(self) -> int:
        return len(self.components())

    def is_connected(self) -> bool:
        return len(self.vertices) > 0 and self.component_count() == 1

    def is_trivalent(self) -> bool:
        return all(d == 3 for d in self.valence.values())

    def subgraph(self, edge_ids: Iterable[str]) -> "Graph":
        """Subgraph spanned by the given edges and their endpoints."""
        keep = set(edge_ids)
        edges = [e for e in self.edges if e.id in keep]
        used = {x for e in edges for x in (e.src, e.dst)}
        return Graph(tuple(v for v in self.vertices if v in used), tuple(edges))

    def relabel(self, vertex_map: Mapping[str, str]) -> "Graph":
        verts = []
        for v in self.vertices:
            w = vertex_map.get(v, v)
            if w not in verts:
                verts.append(w)
        edges = [Edge(e.id, vertex_map.get(e.src, e.src), vertex_map.get(e.dst, e.dst)) for e in self.edges]
        return Graph(tuple(verts), tuple(edges))

    def contract(self, eid: str) -> "Graph":
        """Contract a non-loop edge, keeping the name of its source vertex."""
        e = self.edge(eid)
        if e.is_loop:
            raise GraphError(f"cannot contract loop {eid!r}")
        rest = Graph(self.vertices, tuple(x for x in self.edges if x.id != eid))
        return Graph(tuple(v for v in self.vertices if v != e.dst), rest.relabel({e.dst: e.src}).edges)

    def flip(self, eid: str) -> "Graph":
        """Reverse the orientation of one edge."""
        return Graph(self.vertices, tuple(Edge(e.id, e.dst, e.src) if e.id == eid else e for e in self.edges))


def validate(graph: Graph) -> list[str]:
    """Return human-readable reasons why the graph is not admissible.

    Admissible means connected, first Betti number at least 1 and every
    vertex of valence at least 3. The one-vertex, one-loop graph is
    admitted as the genus-one special case.
    """
    problems = graph.structural_problems()
    if problems:
        return problems
    if not graph.vertices:
        return ["graph has no vertices"]
    if not graph.is_connected():
        problems.append(f"graph is disconnected ({graph.component_count()} components)")
    elif graph.betti < 1:
        problems.append("first Betti number is 0 (graph is a tree)")
    if len(graph.vertices) == 1 and len(graph.edges) == 1 and graph.edges[0].is_loop:
        return problems
    for v in graph.vertices:
        d = graph.valence[v]
        if d == 0:
            problems.append(f"vertex {v!r} is isolated")
        elif d == 1:
            problems.append(f"vertex {v!r} is a leaf (valence 1)")
        elif d < 3:
            problems.append(f"vertex {v!r} has valence {d} < 3")
    return problems


def spanning_trees(graph: Graph) -> list[frozenset[str]]:
    """All spanning trees, as edge-id sets, in a deterministic order."""
    if not graph.is_connected():
        raise GraphError("spanning trees need a connected graph")
    candidates = [e.id for e in graph.edges if not e.is_loop]
    need = len(graph.vertices) - 1
    trees = []
    for combo in itertools.combinations(candidates, need):
        if len(graph.components(combo)) == 1:
            trees.append(frozenset(combo))
    return trees


def _is_leafless_edges(graph: Graph, edge_ids: Iterable[str]) -> bool:
    val: Counter = Counter()
    for eid in edge_ids:
        e = graph.edge(eid)
        val[e.src] += 1
        val[e.dst] += 1
    return all(d != 1 for d in val.values())


def is_leafless(graph: Graph) -> bool:
    return _is_leafless_edges(graph, graph.edge_ids)


def leafless_subgraph_sets(graph: Graph) -> list[frozenset[str]]:
    """Edge sets S whose complement spans a subgraph without leaves."""
    ids = graph.edge_ids
    out = []
    for r in range(len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            removed = set(combo)
            if _is_leafless_edges(graph, [e for e in ids if e not in removed]):
                out.append(frozenset(combo))
    return out


@dataclass(frozen=True)
class Marking:
    """A spanning tree plus ordered, oriented generator edges and a basepoint.

    The i-th generator edge (0-based) stands for the free generator x_{i+1},
    oriented from its source to its sink.
    """

    graph: Graph
    tree: frozenset[str]
    generators: tuple[str, ...]
    basepoint: str

    def __post_init__(self):
        object.__setattr__(self, "tree", frozenset(self.tree))
        object.__setattr__(self, "generators", tuple(self.generators))
        g = self.graph
        for eid in list(self.tree) + list(self.generators):
            g.edge(eid)
        if len(g.components(self.tree)) != 1 or len(self.tree) != len(g.vertices) - 1:
            raise GraphError(f"edges {sorted(self.tree)} do not form a spanning tree")
        rest = set(g.edge_ids) - set(self.tree)
        if set(self.generators) != rest or len(self.generators) != len(rest):
            raise GraphError("generator order must list each off-tree edge exactly once")
        if self.basepoint not in g.vertices:
            raise GraphError(f"unknown basepoint {self.basepoint!r}")

    @property
    def rank(self) -> int:
        return len(self.generators)

    @cached_property
    def generator_index(self) -> dict[str, int]:
        return {eid: i + 1 for i, eid in enumerate(self.generators)}

    @cached_property
    def _parents(self) -> dict[str, tuple[str, int] | None]:
        """Tree parent pointers toward the basepoint: vertex -> (edge id, sign)."""
        parents: dict[str, tuple[str, int] | None] = {self.basepoint: None}
        frontier = [self.basepoint]
        tree_edges = [self.graph.edge(eid) for eid in sorted(self.tree)]
        while frontier:
            nxt = []
            for v in frontier:
                for e in tree_edges:
                    if e.src == v and e.dst not in parents:
                        parents[e.dst] = (e.id, -1)  # step toward the root runs against e
                        nxt.append(e.dst)
                    elif e.dst == v and e.src not in parents:
                        parents[e.src] = (e.id, +1)
                        nxt.append(e.src)
            frontier = nxt
        return parents

    def path_to_base(self, v: str) -> tuple[tuple[str, int], ...]:
        """Tree path from v to the basepoint as signed traversals."""
        steps = []
        while self._parents[v] is not None:
            eid, sign = self._parents[v]
            steps.append((eid, sign))
            e = self.graph.edge(eid)
            v = e.dst if sign > 0 else e.src
        return tuple(steps)

    def path_from_base(self, v: str) -> tuple[tuple[str, int], ...]:
        return tuple((eid, -s) for eid, s in reversed(self.path_to_base(v)))

    def generator_loop(self, i: int) -> tuple[tuple[str, int], ...]:
        """Based edge loop representing x_i (1-based)."""
        e = self.graph.edge(self.generators[i - 1])
        return self.path_from_base(e.src) + ((e.id, 1),) + self.path_to_base(e.dst)


def default_marking(graph: Graph) -> Marking:
    """First spanning tree, off-tree edges in id order, first vertex as basepoint."""
    tree = spanning_trees(graph)[0]
    gens = sorted(set(graph.edge_ids) - tree)
    return Marking(graph, tree, tuple(gens), graph.vertices[0])


# Standard small graphs.

def theta_graph() -> Graph:
    return Graph(("u", "v"), (Edge("p", "u", "v"), Edge("q", "u", "v"), Edge("r", "u", "v")))


def dumbbell_graph() -> Graph:
    return Graph(("u", "v"), (Edge("e1", "u", "u"), Edge("b", "u", "v"), Edge("e2", "v", "v")))


def rose_graph(g: int) -> Graph:
    return Graph(("o",), tuple(Edge(f"e{i}", "o", "o") for i in range(1, g + 1)))


def theta_marking() -> Marking:
    return Marking(theta_graph(), frozenset({"p"}), ("q", "r"), "u")


def dumbbell_marking() -> Marking:
    return Marking(dumbbell_graph(), frozenset({"b"}), ("e1", "e2"), "u")


def rose_marking(g: int) -> Marking:
    graph = rose_graph(g)
    return Marking(graph, frozenset(), graph.edge_ids, "o")


# Canonical forms and isomorphism by exhaustive search.

def _degree_ordered_perms(graph: Graph) -> Iterator[dict[str, int]]:
    """Vertex numberings that list vertices by (valence, loop count) classes."""
    loops = Counter(e.src for e in graph.edges if e.is_loop)
    key = lambda v: (graph.valence[v], loops[v])
    classes: dict = {}
    for v in graph.vertices:
        classes.setdefault(key(v), []).append(v)
    ordered = [classes[k] for k in sorted(classes)]
    for choice in itertools.product(*(itertools.permutations(c) for c in ordered)):
        flat = [v for block in choice for v in block]
        yield {v: i for i, v in enumerate(flat)}


def graph_canonical_form(graph: Graph) -> tuple:
    """Isomorphism invariant of the unoriented multigraph."""
    best = None
    for num in _degree_ordered_perms(graph):
        code = tuple(sorted(tuple(sorted((num[e.src], num[e.dst]))) for e in graph.edges))
        if best is None or code < best:
            best = code
    return (len(graph.vertices), best)


def spanned_canonical_form(marking: Marking, metric: Mapping[str, object] | None = None) -> tuple:
    """Invariant of a spanned graph (optionally with edge lengths).

    Two markings get equal forms iff some graph isomorphism carries tree to
    tree and the i-th generator edge to the i-th generator edge with its
    orientation. Tree edges are unoriented.
    """
    graph = marking.graph
    best = None
    for num in _degree_ordered_perms(graph):
        gens = []
        for eid in marking.generators:
            e = graph.edge(eid)
            gens.append((num[e.src], num[e.dst]) + ((metric[eid],) if metric is not None else ()))
        tree = []
        for eid in marking.tree:
            e = graph.edge(eid)
            tree.append(tuple(sorted((num[e.src], num[e.dst]))) + ((metric[eid],) if metric is not None else ()))
        code = (tuple(gens), tuple(sorted(tree)))
        if best is None or code < best:
            best = code
    return best


def isomorphic(a: Graph, b: Graph) -> bool:
    return graph_canonical_form(a) == graph_canonical_form(b)


# Spanned graphs from trivalent trees.

def trivalent_trees(n: int) -> list[list[tuple[str, str]]]:
    """Unrooted trivalent trees with leaves 1..n, as edge lists.

    Leaves are named "L1".."Ln", internal vertices "I1", "I2", ... Built by
    inserting leaves one at a time into every edge.
    """
    if n < 2:
        raise GraphError("need at least two leaves")
    if n == 2:
        return [[("L1", "L2")]]
    trees = [[("I1", "L1"), ("I1", "L2"), ("I1", "L3")]]
    for k in range(4, n + 1):
        grown = []
        for t in trees:
            new_internal = f"I{k - 2}"
            for i, (a, b) in enumerate(t):
                rest = t[:i] + t[i + 1:]
                grown.append(rest + [(a, new_internal), (new_internal, b), (new_internal, f"L{k}")])
        trees = grown
    return trees


def _glue_tree(tree_edges: list[tuple[str, str]], g: int) -> Marking:
    if g == 1:
        graph = Graph(("v1",), (Edge("x1", "v1", "v1"),))
        return Marking(graph, frozenset(), ("x1",), "v1")
    neighbor = {}
    internal_edges = []
    for a, b in tree_edges:
        if a.startswith("L"):
            neighbor[a] = b
        elif b.startswith("L"):
            neighbor[b] = a
        else:
            internal_edges.append((a, b))
    internal = sorted({x for a, b in tree_edges for x in (a, b) if x.startswith("I")}, key=lambda s: int(s[1:]))
    names = {v: f"v{i + 1}" for i, v in enumerate(internal)}
    edges = []
    for j, (a, b) in enumerate(sorted(internal_edges, key=lambda ab: (int(ab[0][1:]), int(ab[1][1:])))):
        edges.append(Edge(f"t{j + 1}", names[a], names[b]))
    gens = []
    for i in range(1, g + 1):
        src = names[neighbor[f"L{2 * i - 1}"]]
        dst = names[neighbor[f"L{2 * i}"]]
        edges.append(Edge(f"x{i}", src, dst))
        gens.append(f"x{i}")
    graph = Graph(tuple(names[v] for v in internal), tuple(edges))
    tree = frozenset(e.id for e in edges if e.id.startswith("t"))
    return Marking(graph, tree, tuple(gens), graph.vertices[0])


def enumerate_spanned_graphs(g: int) -> list[Marking]:
    """One marking per top-dimensional cell of the spanned-graph complex in rank g.

    Leaves 2i-1 and 2i of each trivalent tree on 2g leaves are glued into the
    generator edge x_i, running from the side of leaf 2i-1 to the side of
    leaf 2i. Results are deduplicated up to spanned-graph isomorphism.
    """
    if g < 1:
        raise GraphError("rank must be at least 1")
    seen = set()
    out = []
    for t in trivalent_trees(2 * g):
        m = _glue_tree(t, g)
        key = spanned_canonical_form(m)
        if key not in seen:
            seen.add(key)
            out.append(m)
    return out


def trivalent_graphs(g: int) -> list[Graph]:
    """Distinct connected trivalent graphs of first Betti number g (g >= 2)."""
    seen = set()
    out = []
    for m in enumerate_spanned_graphs(g):
        key = graph_canonical_form(m.graph)
        if key not in seen:
            seen.add(key)
            out.append(m.graph)
    return out


def suppress_bivalent(graph: Graph, metric: Mapping[str, object] | None = None):
    """Merge edges through bivalent vertices, adding lengths.

    The merged edge keeps the smaller id and that edge's orientation. Returns
    (graph, metric) with metric None when none was given.
    """
    edges = {e.id: e for e in graph.edges}
    lengths = dict(metric) if metric is not None else None
    verts = list(graph.vertices)
    changed = True
    while changed:
        changed = False
        for v in verts:
            inc = [e for e in edges.values() if v in (e.src, e.dst)]
            if len(inc) != 2 or any(e.is_loop for e in inc):
                continue
            keep, drop = sorted(inc, key=lambda e: e.id)
            far_keep = keep.dst if keep.src == v else keep.src
            far_drop = drop.dst if drop.src == v else drop.src
            if keep.src == v:
                new = Edge(keep.id, far_drop, far_keep)
            else:
                new = Edge(keep.id, far_keep, far_drop)
            del edges[drop.id]
            edges[keep.id] = new
            if lengths is not None:
                lengths[keep.id] = lengths[keep.id] + lengths.pop(drop.id)
            verts.remove(v)
            changed = True
            break
    order = [eid for eid in graph.edge_ids if eid in edges]
    return Graph(tuple(verts), tuple(edges[eid] for eid in order)), lengths


def leafless_graphs(max_edges: int) -> list[Graph]:
    """Connected leafless multigraphs with 1..max_edges edges, up to isomorphism."""
    out = []
    seen = set()
    for n_edges in range(1, max_edges + 1):
        for n_verts in range(1, n_edges + 1):
            pairs = [(i, j) for i in range(n_verts) for j in range(i, n_verts)]
            for combo in _edge_multisets(pairs, n_edges, n_verts):
                verts = tuple(f"w{i}" for i in range(n_verts))
                edges = tuple(Edge(f"e{k + 1}", f"w{a}", f"w{b}") for k, (a, b) in enumerate(combo))
                g = Graph(verts, edges)
                if not g.is_connected():
                    continue
                key = graph_canonical_form(g)
                if key not in seen:
                    seen.add(key)
                    out.append(g)
    return out


def _edge_multisets(pairs, n_edges, n_verts):
    deg = [0] * n_verts

    def rec(start, left, chosen):
        deficit = sum(max(0, 2 - d) for d in deg)
        if deficit > 2 * left:
            return
        if left == 0:
            yield tuple(chosen)
            return
        for idx in range(start, len(pairs)):
            a, b = pairs[idx]
            # vertices are introduced in order so that w_k appears before w_{k+1}
            seen_max = max((max(p) for p in chosen), default=-1)
            if a > seen_max + 1 or b > max(seen_max, a) + 1:
                continue
            deg[a] += 1
            deg[b] += 1
            chosen.append((a, b))
            yield from rec(idx, left - 1, chosen)
            chosen.pop()
            deg[a] -= 1
            deg[b] -= 1

    yield from rec(0, n_edges, [])


# Metrics.

def unit_metric(graph: Graph, one=1.0) -> dict[str, object]:
    return {eid: one for eid in graph.edge_ids}


def check_metric(graph: Graph, metric: Mapping[str, object]) -> None:
    missing = set(graph.edge_ids) - set(metric)
    if missing:
        raise GraphError(f"metric misses edges {sorted(missing)}")
    for eid in graph.edge_ids:
        if metric[eid] < 0:
            raise GraphError(f"negative length on edge {eid!r}")


def is_interior(metric: Mapping[str, object]) -> bool:
    return all(x > 0 for x in metric.values())


# JSON serialization.

@dataclass
class GraphBundle:
    """A graph read from JSON with its optional marking and metric."""

    graph: Graph
    marking: Marking | None = None
    metric: dict[str, object] | None = field(default=None)

    def require_marking(self) -> Marking:
        return self.marking if self.marking is not None else default_marking(self.graph)

    def require_metric(self) -> dict[str, object]:
        return self.metric if self.metric is not None else unit_metric(self.graph)


def _number(x):
    if isinstance(x, bool):
        raise GraphError("lengths must be numbers")
    if isinstance(x, (int, float)):
        return x
    if isinstance(x, str):
        return Fraction(x)
    raise GraphError(f"bad length {x!r}")


def graph_from_dict(data: Mapping) -> GraphBundle:
    try:
        vertices = [str(v) for v in data["vertices"]]
        edges = [Edge(str(e["id"]), str(e["src"]), str(e["dst"])) for e in data["edges"]]
    except (KeyError, TypeError) as exc:
        raise GraphError(f"graph JSON needs 'vertices' and 'edges' with id/src/dst: {exc}") from None
    graph = Graph.build(vertices, edges)
    marking = None
    if "spanning_tree" in data:
        tree = frozenset(str(x) for x in data["spanning_tree"])
        gens = data.get("generator_order")
        if gens is None:
            gens = sorted(set(graph.edge_ids) - tree)
        base = str(data.get("basepoint", graph.vertices[0]))
        marking = Marking(graph, tree, tuple(str(x) for x in gens), base)
    metric = None
    if "metric" in data:
        metric = {str(k): _number(v) for k, v in data["metric"].items()}
        if any(isinstance(x, float) for x in metric.values()):
            metric = {k: float(x) for k, x in metric.items()}
        check_metric(graph, metric)
    return GraphBundle(graph, marking, metric)


def graph_to_dict(graph: Graph, marking: Marking | None = None, metric: Mapping | None = None) -> dict:
    out: dict = {
        "vertices": list(graph.vertices),
        "edges": [{"id": e.id, "src": e.src, "dst": e.dst} for e in graph.edges],
    }
    if marking is not None:
        out["spanning_tree"] = sorted(marking.tree)
        out["generator_order"] = list(marking.generators)
        out["basepoint"] = marking.basepoint
    if metric is not None:
        out["metric"] = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in metric.items()}
    return out


def load_graph(path: str) -> GraphBundle:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GraphError(f"{path}: invalid JSON ({exc})") from None
    return graph_from_dict(data)
