"""Graph tensors: strands of local paths glued across edges, and their
evaluation on SL2(C) representations as signed sums of Plucker products.

Conventions (fixed here and checked against matrix traces in the tests):

* an edge matrix g_e transforms as a_src g_e a_dst^-1 under vertex gauge;
* the half-edge at the source of e carries g_e, the half-edge at the sink
  carries -I (so both have determinant 1);
* a local path entering through half-edge i and leaving through j
  contributes the Plucker coordinate det(C_{i,a}, C_{j,b}), where C_{i,a}
  is column a of the matrix at i;
* where a strand leaves one vertex through half-edge i with label a and
  enters the next through the partner j with label b, the labels differ
  and the term gets +1 for (a, b) = (1, 2) and -1 for (2, 1).

With these choices a single strand evaluates to the trace of the product
of edge matrices along its loop.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graphs import Graph, GraphError, Marking
from .words import EdgeLoop, WordError, cyclic_canonical, loop_reduce, loop_to_word, pushforward, reduce

Representation = dict[str, np.ndarray]

ENUMERATION_LIMIT = 20  # strands with more crossings are summed by transfer matrices


class TensorError(ValueError):
    """Raised for inconsistent tensors or representations."""


@dataclass(frozen=True)
class HalfEdge:
    edge: str
    end: int  # 0 at the source of the edge, 1 at the sink

    def vertex(self, graph: Graph) -> str:
        e = graph.edge(self.edge)
        return e.src if self.end == 0 else e.dst

    @property
    def partner(self) -> "HalfEdge":
        return HalfEdge(self.edge, 1 - self.end)


@dataclass(frozen=True)
class LocalPath:
    vertex: str
    enter: HalfEdge
    exit: HalfEdge


@dataclass(frozen=True)
class GammaTensor:
    """Local paths at vertices together with their gluing across edges.

    successor[i] is the path that continues after path i leaves its vertex;
    it must enter through the partner of the half-edge path i exits by.
    """

    graph: Graph
    paths: tuple[LocalPath, ...]
    successor: tuple[int, ...]

    def __post_init__(self):
        n = len(self.paths)
        if sorted(self.successor) != list(range(n)):
            raise TensorError("successor must be a permutation of the paths")
        for i, p in enumerate(self.paths):
            for h in (p.enter, p.exit):
                if h.vertex(self.graph) != p.vertex:
                    raise TensorError(f"path {i} uses half-edge {h} away from vertex {p.vertex!r}")
            if p.enter == p.exit:
                raise TensorError(f"path {i} backtracks through {p.enter}")
            q = self.paths[self.successor[i]]
            if q.enter != p.exit.partner:
                raise TensorError(f"path {i} is glued to a path that does not continue along {p.exit.edge!r}")

    @cached_property
    def strands(self) -> tuple[tuple[int, ...], ...]:
        """Cycles of the gluing, each starting at its smallest path index."""
        seen = set()
        out = []
        for start in range(len(self.paths)):
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            nxt = self.successor[start]
            while nxt != start:
                cyc.append(nxt)
                seen.add(nxt)
                nxt = self.successor[nxt]
            out.append(tuple(cyc))
        return tuple(out)

    @property
    def is_connected(self) -> bool:
        return len(self.strands) == 1

    def weights(self) -> dict[str, int]:
        """Number of strand crossings of each edge."""
        count = {eid: 0 for eid in self.graph.edge_ids}
        for p in self.paths:
            count[p.exit.edge] += 1
        return count

    def vertex_paths(self) -> dict[str, list[tuple[HalfEdge, HalfEdge]]]:
        out: dict[str, list] = {v: [] for v in self.graph.vertices}
        for p in self.paths:
            out[p.vertex].append((p.enter, p.exit))
        return out

    def strand_loops(self) -> list[EdgeLoop]:
        loops = []
        for cyc in self.strands:
            loops.append(EdgeLoop(tuple((self.paths[i].exit.edge, 1 if self.paths[i].exit.end == 0 else -1)
                                        for i in cyc)))
        return loops

    def __mul__(self, other: "GammaTensor") -> "GammaTensor":
        if other.graph != self.graph:
            raise TensorError("tensors live on different graphs")
        shift = len(self.paths)
        return GammaTensor(self.graph, self.paths + other.paths,
                           self.successor + tuple(s + shift for s in other.successor))


def loop_to_tensor(loop: EdgeLoop, graph: Graph) -> GammaTensor:
    """Tensor of a cyclically reduced edge loop: one local path per vertex visit."""
    steps = loop.steps
    n = len(steps)
    if n == 0:
        raise TensorError("empty loop has no tensor")
    paths = []
    for k in range(n):
        prev_e, prev_s = steps[k - 1]
        e, s = steps[k]
        enter = HalfEdge(prev_e, 1 if prev_s > 0 else 0)
        exit_ = HalfEdge(e, 0 if s > 0 else 1)
        v = exit_.vertex(graph)
        if enter.vertex(graph) != v:
            raise WordError(f"loop breaks before step {k}")
        paths.append(LocalPath(v, enter, exit_))
    return GammaTensor(graph, tuple(paths), tuple((k + 1) % n for k in range(n)))


def word_to_tensor(word, marking: Marking) -> GammaTensor:
    """Tensor of the reduced loop representing a nonempty reduced word."""
    w = reduce(word)
    if not w:
        raise WordError("the empty word has no tensor")
    loop = loop_reduce(pushforward(w, marking))
    return loop_to_tensor(loop, marking.graph)


def monomial_tensor(words: Iterable, marking: Marking) -> GammaTensor:
    """Disjoint union of word tensors, representing a product of trace functions."""
    out = None
    for w in words:
        t = word_to_tensor(w, marking)
        out = t if out is None else out * t
    if out is None:
        raise WordError("a monomial needs at least one word")
    return out


def tensor_to_words(tensor: GammaTensor, marking: Marking) -> list[tuple[int, ...]]:
    """Canonical words read back from each strand."""
    return [cyclic_canonical(loop_to_word(loop, marking)) for loop in tensor.strand_loops()]


# Representations.

def sl2_inverse(m: np.ndarray) -> np.ndarray:
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def check_representation(rep: Mapping[str, np.ndarray], graph: Graph, tol: float = 1e-8) -> None:
    missing = set(graph.edge_ids) - set(rep)
    if missing:
        raise TensorError(f"representation misses edges {sorted(missing)}")
    for eid in graph.edge_ids:
        m = np.asarray(rep[eid])
        if m.shape != (2, 2):
            raise TensorError(f"matrix on {eid!r} is not 2x2")
        if abs(np.linalg.det(m) - 1) > tol * max(1.0, float(np.abs(m).max()) ** 2):
            raise TensorError(f"matrix on {eid!r} has determinant {np.linalg.det(m):.6g}, not 1")


def random_sl2(rng: np.random.Generator) -> np.ndarray:
    """Gaussian complex matrix rescaled to determinant 1."""
    while True:
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        d = np.linalg.det(m)
        if abs(d) >= 1e-6:
            return m / np.sqrt(d)


def random_representation(graph: Graph, seed) -> Representation:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return {eid: random_sl2(rng) for eid in graph.edge_ids}


def identity_representation(graph: Graph) -> Representation:
    return {eid: np.eye(2, dtype=complex) for eid in graph.edge_ids}


def rep_from_dict(data: Mapping, graph: Graph | None = None) -> Representation:
    try:
        edges = data["edges"]
        rep = {}
        for eid, entries in edges.items():
            flat = [complex(re, im) for re, im in entries]
            if len(flat) != 4:
                raise TensorError(f"matrix on {eid!r} needs 4 entries")
            rep[str(eid)] = np.array(flat, dtype=complex).reshape(2, 2)
    except (KeyError, TypeError, ValueError) as exc:
        raise TensorError(f"bad representation JSON: {exc}") from None
    if graph is not None:
        check_representation(rep, graph)
    return rep


def rep_to_dict(rep: Mapping[str, np.ndarray]) -> dict:
    return {"edges": {eid: [[float(z.real), float(z.imag)] for z in np.asarray(m).reshape(4)]
                      for eid, m in rep.items()}}


def load_representation(path: str, graph: Graph | None = None) -> Representation:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TensorError(f"{path}: invalid JSON ({exc})") from None
    return rep_from_dict(data, graph)


# Evaluation.

_MINUS_ID = -np.eye(2, dtype=complex)
_CROSSING_SIGN = np.array([[0, 1], [-1, 0]], dtype=complex)  # [exit label, entry label]


def half_edge_matrix(rep: Mapping[str, np.ndarray], h: HalfEdge) -> np.ndarray:
    return np.asarray(rep[h.edge], dtype=complex) if h.end == 0 else _MINUS_ID


def plucker(m1: np.ndarray, a: int, m2: np.ndarray, b: int) -> complex:
    """det of column a of m1 and column b of m2 (0-based columns)."""
    return m1[0, a] * m2[1, b] - m1[1, a] * m2[0, b]


def _local_factors(tensor: GammaTensor, rep, strand: Sequence[int]) -> list[np.ndarray]:
    factors = []
    for i in strand:
        p = tensor.paths[i]
        mi = half_edge_matrix(rep, p.enter)
        mo = half_edge_matrix(rep, p.exit)
        factors.append(np.array([[plucker(mi, a, mo, b) for b in range(2)] for a in range(2)]))
    return factors


def _enumerate_strand(factors: list[np.ndarray]) -> complex:
    """Literal signed sum over all labellings of a single strand.

    Bit k is the label (0 or 1) with which the strand leaves path k; it then
    enters path k+1 with the other label.
    """
    n = len(factors)
    idx = np.arange(1 << n, dtype=np.int64)
    bits = [(idx >> k) & 1 for k in range(n)]
    total = np.ones(1 << n, dtype=complex)
    for k in range(n):
        out_label = bits[k]
        in_label = 1 - bits[k - 1]
        total *= factors[k][in_label, out_label]
        total *= np.where(out_label == 0, 1.0, -1.0)
    return complex(total.sum())


def _transfer_strand(factors: list[np.ndarray]) -> complex:
    """The same signed sum contracted one crossing at a time."""
    acc = np.eye(2, dtype=complex)
    for f in factors:
        acc = acc @ f @ _CROSSING_SIGN
    return complex(np.trace(acc))


def evaluate_tensor(tensor: GammaTensor, rep: Mapping[str, np.ndarray], method: str = "auto") -> complex:
    """Evaluate a tensor on a representation.

    method "enumerate" sums every labelling explicitly, "transfer" contracts
    the same sum with 2x2 matrices, "auto" enumerates strands with at most
    ENUMERATION_LIMIT crossings.
    """
    if method not in ("auto", "enumerate", "transfer"):
        raise ValueError(f"unknown method {method!r}")
    check_representation(rep, tensor.graph)
    value = 1 + 0j
    for strand in tensor.strands:
        factors = _local_factors(tensor, rep, strand)
        use_enum = method == "enumerate" or (method == "auto" and len(strand) <= ENUMERATION_LIMIT)
        value *= _enumerate_strand(factors) if use_enum else _transfer_strand(factors)
    return value


def generator_matrices(rep: Mapping[str, np.ndarray], marking: Marking) -> list[np.ndarray]:
    """Holonomy of each generator loop, based at the basepoint."""
    mats = []
    for i in range(1, marking.rank + 1):
        m = np.eye(2, dtype=complex)
        for eid, s in marking.generator_loop(i):
            g = np.asarray(rep[eid], dtype=complex)
            m = m @ (g if s > 0 else sl2_inverse(g))
        mats.append(m)
    return mats


def trace_word_eval(word, rep: Mapping[str, np.ndarray], marking: Marking) -> complex:
    """Trace of the word evaluated on the generator holonomies."""
    check_representation(rep, marking.graph)
    mats = generator_matrices(rep, marking)
    m = np.eye(2, dtype=complex)
    for k in reduce(word):
        if abs(k) > marking.rank:
            raise WordError(f"letter {k} exceeds rank {marking.rank}")
        a = mats[abs(k) - 1]
        m = m @ (a if k > 0 else sl2_inverse(a))
    return complex(np.trace(m))


def rose_representation(matrices: Sequence[np.ndarray], marking: Marking | None = None) -> Representation:
    """Representation of a rose whose loops carry the given matrices."""
    ids = marking.generators if marking is not None else tuple(f"e{i}" for i in range(1, len(matrices) + 1))
    if len(ids) != len(matrices):
        raise GraphError("need one matrix per loop")
    return {eid: np.asarray(m, dtype=complex) for eid, m in zip(ids, matrices)}
