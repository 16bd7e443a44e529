"""Momentum maps for the vertex gauge action on SL2(C)^E.

An edge matrix g = k p (k unitary, p positive with det 1) is read as a
cotangent vector (k, v) of SU(2), where v is the Pauli vector of the
traceless part of g* g. The source end of an edge sees k v k* and the sink
end sees -v; the momentum at a vertex is the sum over its half-edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .graphs import Graph, GraphError, is_leafless
from .tensor import Representation, check_representation, sl2_inverse

PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)
ID2 = np.eye(2, dtype=complex)


class MomentError(ValueError):
    """Raised when a representation does not meet a momentum requirement."""


class CotangentCoords(NamedTuple):
    k: np.ndarray  # SU(2)
    v: np.ndarray  # R^3


# SU(2) and Pauli helpers.

def to_pauli(h: np.ndarray) -> np.ndarray:
    """Coordinates x with traceless part of h equal to x . sigma."""
    return np.real(np.einsum("...ij,kji->...k", h, PAULI)) / 2


def from_pauli(v) -> np.ndarray:
    return np.einsum("...k,kij->...ij", np.asarray(v, dtype=float), PAULI)


def rotation_matrix(k: np.ndarray) -> np.ndarray:
    """The SO(3) matrix of v -> k v k* in Pauli coordinates."""
    cols = [to_pauli(k @ PAULI[j] @ k.conj().T) for j in range(3)]
    return np.array(cols).T


def coadjoint(k: np.ndarray, v) -> np.ndarray:
    return to_pauli(k @ from_pauli(v) @ k.conj().T)


def su2_rotation(axis, angle: float) -> np.ndarray:
    """Element of SU(2) acting on R^3 as the rotation by angle about axis."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    return np.cos(angle / 2) * ID2 - 1j * np.sin(angle / 2) * from_pauli(n)


def su2_aligning(a, b) -> np.ndarray:
    """Element of SU(2) rotating the direction of a onto the direction of b."""
    a = np.asarray(a, dtype=float) / np.linalg.norm(a)
    b = np.asarray(b, dtype=float) / np.linalg.norm(b)
    axis = np.cross(a, b)
    s, c = np.linalg.norm(axis), float(np.dot(a, b))
    if s < 1e-12:
        if c > 0:
            return ID2.copy()
        axis = np.cross(a, [1.0, 0, 0])
        if np.linalg.norm(axis) < 1e-6:
            axis = np.cross(a, [0, 1.0, 0])
        return su2_rotation(axis, np.pi)
    return su2_rotation(axis, np.arctan2(s, c))


def random_su2(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    a, b = q[0] + 1j * q[1], q[2] + 1j * q[3]
    return np.array([[a, -np.conj(b)], [b, np.conj(a)]])


def sqrt_positive(m: np.ndarray) -> np.ndarray:
    """Square root of a positive definite Hermitian 2x2 matrix."""
    d = np.sqrt(max(float(np.real(np.linalg.det(m))), 0.0))
    return (m + d * ID2) / np.sqrt(float(np.real(np.trace(m))) + 2 * d)


def polar(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """g = k p with k unitary and p positive Hermitian."""
    p = sqrt_positive(g.conj().T @ g)
    return g @ sl2_inverse(p), p


def moment_vector(g: np.ndarray) -> np.ndarray:
    h = g.conj().T @ g
    return to_pauli(h)


def xi(g: np.ndarray) -> float:
    """Length of the moment vector; equals sqrt|det| of the traceless part of g* g."""
    return float(np.linalg.norm(moment_vector(g)))


def mu_left(g: np.ndarray) -> np.ndarray:
    return to_pauli(g @ g.conj().T)


def mu_right(g: np.ndarray) -> np.ndarray:
    return -moment_vector(g)


def cotangent(g: np.ndarray) -> CotangentCoords:
    k, _ = polar(g)
    return CotangentCoords(k, moment_vector(g))


def reconstruct(k: np.ndarray, v) -> np.ndarray:
    """Matrix with unitary factor k and moment vector v."""
    v = np.asarray(v, dtype=float)
    s = np.sqrt(1 + float(v @ v))
    p = ((s + 1) * ID2 + from_pauli(v)) / np.sqrt(2 * s + 2)
    return k @ p


# Vertex momenta.

def _stack(rep: Mapping[str, np.ndarray], graph: Graph):
    mats = np.array([np.asarray(rep[eid], dtype=complex) for eid in graph.edge_ids])
    vidx = {v: i for i, v in enumerate(graph.vertices)}
    src = np.array([vidx[e.src] for e in graph.edges], dtype=int)
    dst = np.array([vidx[e.dst] for e in graph.edges], dtype=int)
    return mats, src, dst


def _momenta(mats, src, dst, n_vertices) -> np.ndarray:
    adj = np.conj(np.swapaxes(mats, 1, 2))
    left = to_pauli(mats @ adj)
    right = to_pauli(adj @ mats)
    out = np.zeros((n_vertices, 3))
    np.add.at(out, src, left)
    np.add.at(out, dst, -right)
    return out


def vertex_momenta(rep: Mapping[str, np.ndarray], graph: Graph) -> dict[str, np.ndarray]:
    check_representation(rep, graph)
    mats, src, dst = _stack(rep, graph)
    mom = _momenta(mats, src, dst, len(graph.vertices))
    return {v: mom[i] for i, v in enumerate(graph.vertices)}


def vertex_momentum(rep: Mapping[str, np.ndarray], graph: Graph, vertex: str) -> np.ndarray:
    if vertex not in graph.vertices:
        raise GraphError(f"unknown vertex {vertex!r}")
    return vertex_momenta(rep, graph)[vertex]


def momentum_residual(rep: Mapping[str, np.ndarray], graph: Graph) -> float:
    """Largest vertex momentum norm."""
    mom = vertex_momenta(rep, graph)
    return max((float(np.linalg.norm(m)) for m in mom.values()), default=0.0)


def _hermitian_exp(m: np.ndarray, t: float) -> np.ndarray:
    """exp(t m . sigma) for each row m, as (n, 2, 2) matrices."""
    norms = np.linalg.norm(m, axis=1)
    ch = np.cosh(t * norms)
    sh_over = np.where(norms > 0, np.sinh(t * norms) / np.where(norms > 0, norms, 1), t)
    return ch[:, None, None] * ID2 + sh_over[:, None, None] * from_pauli(m)


@dataclass
class KempfNessResult:
    rep: Representation
    residual: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list)


def _momentum_jacobian(mats, src, dst, n) -> np.ndarray:
    """Derivative of all vertex momenta under exp(t sigma_j) at each vertex.

    Column 3w+j holds the response to the Hermitian direction sigma_j at
    vertex w; this is the Hessian of the norm function along the orbit.
    """
    jac = np.zeros((3 * n, 3 * n))
    for i in range(len(mats)):
        g = mats[i]
        ga = g.conj().T
        ggs, gsg = g @ ga, ga @ g
        s, d = src[i], dst[i]
        for j in range(3):
            x = PAULI[j]
            # acting at the source: g -> a g
            jac[3 * s:3 * s + 3, 3 * s + j] += to_pauli(x @ ggs + ggs @ x)
            jac[3 * d:3 * d + 3, 3 * s + j] -= to_pauli(2 * ga @ x @ g)
            # acting at the sink: g -> g a^-1
            jac[3 * s:3 * s + 3, 3 * d + j] += to_pauli(-2 * g @ x @ ga)
            jac[3 * d:3 * d + 3, 3 * d + j] -= to_pauli(-(x @ gsg + gsg @ x))
    return jac


def kempf_ness_solve(rep: Mapping[str, np.ndarray], graph: Graph, tol: float = 1e-8,
                     max_iter: int = 10_000, method: str = "newton") -> KempfNessResult:
    """Move rep along its gauge orbit to a zero of the vertex momenta.

    Each step acts at every vertex w by exp(-eps X_w . sigma). With method
    "gradient", X_w is the momentum m_w itself. With "newton", X solves
    H X = m for the orbit Hessian H of the norm function, which still
    lowers the sum of squared momenta to first order and converges
    quadratically near a stable zero; if that system is singular the
    gradient direction is used. eps is found by halving from the trial
    value until the sum of squared momenta drops by a relative 1e-4 (the
    best decreasing trial is taken otherwise). The history holds that sum
    after each accepted step.
    """
    if method not in ("newton", "gradient"):
        raise ValueError(f"unknown method {method!r}")
    check_representation(rep, graph)
    mats, src, dst = _stack(rep, graph)
    n = len(graph.vertices)

    def phi_of(ms):
        mom = _momenta(ms, src, dst, n)
        return mom, float(np.sum(mom * mom))

    mom, phi = phi_of(mats)
    history = [phi]
    eps = 0.1 / (1 + np.sqrt(phi))
    it = 0
    residual = float(np.sqrt(np.max(np.sum(mom * mom, axis=1)))) if n else 0.0
    while residual >= tol and it < max_iter:
        direction, trial = mom, eps
        if method == "newton":
            jac = _momentum_jacobian(mats, src, dst, n)
            sol, _, rank, _ = np.linalg.lstsq(jac, mom.reshape(-1), rcond=1e-12)
            if rank == 3 * n and float(sol @ jac.T @ mom.reshape(-1)) > 0:
                direction, trial = sol.reshape(n, 3), 1.0
        best = None
        for _ in range(60):
            a = _hermitian_exp(direction, -trial)
            a_inv = _hermitian_exp(direction, trial)
            new = a[src] @ mats @ a_inv[dst]
            new_mom, new_phi = phi_of(new)
            if best is None or new_phi < best[2]:
                best = (trial, new, new_phi, new_mom)
            if new_phi <= (1 - 1e-4) * phi:
                break
            trial *= 0.5
        if best is None or best[2] >= phi:
            break  # stalled
        if direction is mom:
            eps = best[0] * 2
        mats, phi, mom = best[1], best[2], best[3]
        history.append(phi)
        it += 1
        residual = float(np.sqrt(np.max(np.sum(mom * mom, axis=1))))
    out = {eid: mats[i] for i, eid in enumerate(graph.edge_ids)}
    return KempfNessResult(out, residual, it, residual < tol, history)


def momentum_image(rep: Mapping[str, np.ndarray], graph: Graph, tol: float = 1e-6) -> dict[str, float]:
    """Edge lengths xi(g_e) of a representation with zero momentum."""
    res = momentum_residual(rep, graph)
    if res > tol:
        raise MomentError(f"momentum residual {res:.3g} exceeds {tol:g}")
    return {eid: xi(np.asarray(rep[eid])) for eid in graph.edge_ids}


# Torus action.

def diagonalizer(v) -> np.ndarray:
    """h in SU(2) with h (v . sigma) h* = |v| sigma_3."""
    v = np.asarray(v, dtype=float)
    r = np.linalg.norm(v)
    if r == 0:
        return ID2.copy()
    x, y, z = v / r
    if z > -0.5:
        u = np.array([1 + z, x + 1j * y]) / np.sqrt(2 * (1 + z))
    else:
        u = np.array([x - 1j * y, 1 - z]) / np.sqrt(2 * (1 - z))
    w = np.array([-np.conj(u[1]), np.conj(u[0])])
    return np.array([u, w]).conj()


def torus_action(rep: Mapping[str, np.ndarray], graph: Graph, angles: Mapping[str, float]) -> Representation:
    """Rotate each edge by its angle about its own moment vector.

    g = k p becomes k h* diag(e^{i a}, e^{-i a}) h p, which keeps g g* and g* g
    and hence every momentum and length.
    """
    check_representation(rep, graph)
    out = {}
    for eid in graph.edge_ids:
        g = np.asarray(rep[eid], dtype=complex)
        theta = float(angles.get(eid, 0.0))
        k, p = polar(g)
        h = diagonalizer(moment_vector(g))
        t = np.diag([np.exp(1j * theta), np.exp(-1j * theta)])
        out[eid] = k @ h.conj().T @ t @ h @ p
    return out


# Leafless graphs: explicit zeros of the momentum map.

def assignment_momenta(graph: Graph, assign: Mapping[str, CotangentCoords]) -> dict[str, np.ndarray]:
    out = {v: np.zeros(3) for v in graph.vertices}
    for e in graph.edges:
        k, v = assign[e.id]
        out[e.src] = out[e.src] + rotation_matrix(k) @ v
        out[e.dst] = out[e.dst] - v
    return out


def assignment_residual(graph: Graph, assign: Mapping[str, CotangentCoords]) -> float:
    return max((float(np.linalg.norm(m)) for m in assignment_momenta(graph, assign).values()), default=0.0)


def assignment_to_rep(assign: Mapping[str, CotangentCoords]) -> Representation:
    return {eid: reconstruct(k, v) for eid, (k, v) in assign.items()}


def _half_contribution(graph: Graph, assign, eid: str, end: int) -> np.ndarray:
    k, v = assign[eid]
    return rotation_matrix(k) @ v if end == 0 else -np.asarray(v)


def _partial_momentum(graph: Graph, assign, vertex: str, skip: str) -> np.ndarray:
    total = np.zeros(3)
    for eid, end in graph.half_edges[vertex]:
        if eid != skip:
            total = total + _half_contribution(graph, assign, eid, end)
    return total


def _walk_transport(assign, walk) -> np.ndarray:
    """Rotation carrying the departure requirement along a walk."""
    rot = np.eye(3)
    for eid, sign in walk:
        r = rotation_matrix(assign[eid][0])
        rot = (r.T if sign > 0 else r) @ rot
    return rot


def _push(assign, walk, t0, scale=1.0) -> None:
    """Add to v along the walk so that interior vertices stay balanced.

    The first vertex gains t0 and the last loses the transported vector.
    """
    t = np.asarray(t0, dtype=float) * scale
    for eid, sign in walk:
        k, v = assign[eid]
        r = rotation_matrix(k)
        if sign > 0:
            delta = r.T @ t
            t = delta
        else:
            delta = -t
            t = r @ t
        assign[eid] = CotangentCoords(k, np.asarray(v, dtype=float) + delta)


def _step_end(graph: Graph, eid: str, sign: int) -> str:
    e = graph.edge(eid)
    return e.dst if sign > 0 else e.src


def _bfs_path(graph: Graph, edges, start: str, goal) -> list[tuple[str, int]] | None:
    """Shortest walk from start to any vertex in goal using the given edges."""
    goal = set(goal)
    prev: dict[str, tuple[str, str, int] | None] = {start: None}
    queue = [start]
    usable = [graph.edge(eid) for eid in edges]
    while queue:
        nxt = []
        for a in queue:
            if a in goal:
                steps = []
                while prev[a] is not None:
                    b, eid, sign = prev[a]
                    steps.append((eid, sign))
                    a = b
                return steps[::-1]
            for e in usable:
                for here, there, sign in ((e.src, e.dst, 1), (e.dst, e.src, -1)):
                    if here == a and there not in prev:
                        prev[there] = (a, e.id, sign)
                        nxt.append(there)
        queue = nxt
    return None


def _find_cycle(graph: Graph, edges) -> tuple[str, list[tuple[str, int]]]:
    """Some simple closed walk using the given edges, with its start vertex."""
    edges = list(edges)
    for eid in edges:
        e = graph.edge(eid)
        if e.is_loop:
            return e.src, [(eid, 1)]
    for eid in edges:
        e = graph.edge(eid)
        back = _bfs_path(graph, [x for x in edges if x != eid], e.dst, [e.src])
        if back is not None:
            return e.src, [(eid, 1)] + back
    raise GraphError("no cycle among the given edges")


def _component_edges(graph: Graph, edges, vertex: str) -> list[str]:
    reach = {vertex}
    changed = True
    while changed:
        changed = False
        for eid in edges:
            e = graph.edge(eid)
            if (e.src in reach) != (e.dst in reach):
                reach |= {e.src, e.dst}
                changed = True
    return [eid for eid in edges if graph.edge(eid).src in reach]


def _emitter(graph: Graph, assign, side_edges, z: str, rng):
    """Prepare modifications on one side of a bridge that unbalance only z.

    Returns (net change at z, list of (walk, start vector)) for unit scale.
    """
    c, cycle = _find_cycle(graph, side_edges)
    path = _bfs_path(graph, side_edges, z, [c]) or []
    rot_c = _walk_transport(assign, cycle)
    if np.linalg.norm(rot_c - np.eye(3)) < 1e-6:
        # twist one cycle edge about its own moment vector; momenta are unchanged
        eid = cycle[0][0]
        k, v = assign[eid]
        assign[eid] = CotangentCoords(k @ su2_rotation(v, rng.uniform(0.5, 2.5)), v)
        rot_c = _walk_transport(assign, cycle)
    w, vecs = np.linalg.eig(rot_c)
    axis = np.real(vecs[:, np.argmin(np.abs(w - 1))])
    t_c = np.cross(axis, rng.normal(size=3))
    t_c /= np.linalg.norm(t_c)
    q = np.linalg.lstsq(np.eye(3) - rot_c, t_c, rcond=None)[0]
    t0 = _walk_transport(assign, path).T @ t_c
    return t0, [(path, t0), (cycle, q)]


def _expand(graph: Graph, fid: str, assign: dict, rng, scale: float) -> None:
    f = graph.edge(fid)
    x, y = f.src, f.dst
    sigma_x = _partial_momentum(graph, assign, x, fid)
    if np.linalg.norm(sigma_x) > 1e-9 * scale:
        assign[fid] = CotangentCoords(ID2.copy(), -sigma_x)
        return
    assign[fid] = CotangentCoords(ID2.copy(), np.zeros(3))
    others = [eid for eid in graph.edge_ids if eid != fid]
    back = _bfs_path(graph, others, y, [x])
    if back is not None:
        walk = [(fid, 1)] + back
        rot = _walk_transport(assign, walk)
        w, vecs = np.linalg.eig(rot)
        q = np.real(vecs[:, np.argmin(np.abs(w - 1))])
        if np.linalg.norm(rot - np.eye(3)) < 1e-9:
            q = rng.normal(size=3)
        q = q / np.linalg.norm(q) * scale * rng.uniform(0.5, 1.5)
        _push(assign, walk, q)
        return
    side_x = _component_edges(graph, others, x)
    side_y = _component_edges(graph, others, y)
    a_x, mods_x = _emitter(graph, assign, side_x, x, rng)
    a_y, mods_y = _emitter(graph, assign, side_y, y, rng)
    lam_y = scale * rng.uniform(0.5, 1.5) / np.linalg.norm(a_y)
    lam_x = lam_y * np.linalg.norm(a_y) / np.linalg.norm(a_x)
    for walk, t in mods_x:
        _push(assign, walk, t, lam_x)
    for walk, t in mods_y:
        _push(assign, walk, t, lam_y)
    sig_x = _partial_momentum(graph, assign, x, fid)
    sig_y = _partial_momentum(graph, assign, y, fid)
    assign[fid] = CotangentCoords(su2_aligning(sig_y, -sig_x), sig_y)


def leafless_assignment(graph: Graph, seed=0, attempts: int = 20) -> dict[str, CotangentCoords]:
    """Cotangent data with zero momentum and every moment vector nonzero.

    The graph is contracted edge by edge to a rose, whose loops get (I, v)
    with random v. Edges are then restored in reverse order: a restored
    edge takes the vector that balances its endpoints; if that vector is 0,
    a circulation around a cycle through the edge, or (for a bridge) a pair
    of imbalances created on cycles on both sides, makes it nonzero while
    keeping all other vertices balanced.
    """
    if not graph.edges or not graph.is_connected():
        raise GraphError("need a connected graph with at least one edge")
    if not is_leafless(graph):
        raise GraphError("graph has a leaf")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for _ in range(attempts):
        assign = _leafless_once(graph, rng)
        lengths = [np.linalg.norm(v) for _, v in assign.values()]
        if min(lengths) > 1e-6 and assignment_residual(graph, assign) < 1e-12 * max(1.0, max(lengths)):
            return assign
    raise MomentError("could not build a momentum-zero assignment with nonzero vectors")


def _leafless_once(graph: Graph, rng) -> dict[str, CotangentCoords]:
    stages = [graph]
    contracted = []
    g = graph
    while len(g.vertices) > 1:
        fid = next(e.id for e in g.edges if not e.is_loop)
        contracted.append(fid)
        g = g.contract(fid)
        stages.append(g)
    assign = {}
    for e in g.edges:
        v = rng.normal(size=3)
        assign[e.id] = CotangentCoords(ID2.copy(), v / np.linalg.norm(v) * rng.uniform(0.5, 2.0))
    for fid, stage in zip(reversed(contracted), reversed(stages[:-1])):
        scale = max(np.linalg.norm(v) for _, v in assign.values())
        _expand(stage, fid, assign, rng, scale)
    return {eid: assign[eid] for eid in graph.edge_ids}


def stratum_assignment(graph: Graph, zero_edges, seed=0) -> dict[str, CotangentCoords]:
    """Zero-momentum data whose vanishing moment vectors are exactly zero_edges.

    Exists iff the edges outside zero_edges span a leafless subgraph.
    """
    zero = set(zero_edges)
    rng = np.random.default_rng(seed)
    rest = [eid for eid in graph.edge_ids if eid not in zero]
    sub = graph.subgraph(rest)
    if not is_leafless(sub):
        raise MomentError(f"complement of {sorted(zero)} has a leaf")
    assign = {eid: CotangentCoords(random_su2(rng), np.zeros(3)) for eid in zero}
    for comp in sub.components():
        comp_edges = [eid for eid in rest if graph.edge(eid).src in comp]
        assign.update(leafless_assignment(sub.subgraph(comp_edges), rng))
    return {eid: assign[eid] for eid in graph.edge_ids}


@dataclass
class StratumReport:
    zero_edges: frozenset[str]
    complement_leafless: bool
    residual: float


def fiber_stratum(rep: Mapping[str, np.ndarray], graph: Graph, tol: float = 1e-8) -> StratumReport:
    """Edges with vanishing moment vector, and whether the rest is leafless."""
    check_representation(rep, graph)
    zero = frozenset(eid for eid in graph.edge_ids if xi(np.asarray(rep[eid])) < tol)
    rest = [eid for eid in graph.edge_ids if eid not in zero]
    return StratumReport(zero, is_leafless(graph.subgraph(rest)), momentum_residual(rep, graph))


def random_torus_angles(graph: Graph, rng: np.random.Generator) -> dict[str, float]:
    return {eid: float(rng.uniform(0, 2 * np.pi)) for eid in graph.edge_ids}


def angles_from_text(text: str) -> dict[str, float]:
    out = {}
    for tok in filter(None, (t.strip() for t in text.split(","))):
        eid, sep, val = tok.partition("=")
        if not sep:
            raise ValueError(f"bad angle token {tok!r}")
        out[eid.strip()] = float(val)
    return out


def lengths_vector(rep: Mapping[str, np.ndarray], graph: Graph) -> Sequence[float]:
    return [xi(np.asarray(rep[eid])) for eid in graph.edge_ids]
