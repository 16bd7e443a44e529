"""Command-line interface: `charvar <group> <command> ...`.

Exit status is 0 on success, 1 on a domain error (message on stderr) and 2
when the command line itself cannot be parsed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import graphs, moment, spin, tensor, valuation, words


# Argument types (failures here are parse errors, exit 2).

def _word_arg(text: str) -> tuple[int, ...]:
    try:
        return words.Word.parse(text).letters
    except words.WordError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _weights_arg(text: str) -> dict[str, int]:
    try:
        return spin.parse_weights(text)
    except spin.SpinError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _angles_arg(text: str) -> dict[str, float]:
    try:
        return moment.angles_from_text(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _ids_arg(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _positive(kind):
    def parse(text: str):
        try:
            x = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{text!r} is not a number")
        if not x > 0:
            raise argparse.ArgumentTypeError(f"{text!r} must be positive")
        return x
    parse.__name__ = kind.__name__
    return parse


def _levels_arg(text: str) -> list[int]:
    try:
        levels = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list {text!r}")
    if not levels or min(levels) < 0:
        raise argparse.ArgumentTypeError("levels must be non-negative integers")
    return levels


# Output helpers.

def fmt(x) -> str:
    """Numbers with 12 significant digits; exact rationals stay exact."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (float, np.floating)):
        s = f"{float(x):.12g}"
        if s in ("inf", "-inf", "nan"):
            return s
        return s if any(c in s for c in ".e") else s + ".0"
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return fmt(x) if x.denominator != 1 else x.numerator
    if isinstance(x, (np.floating, float)):
        return float(fmt(x)) if np.isfinite(x) else fmt(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


class Output:
    def __init__(self, fmt_name: str, stream=None):
        self.format = fmt_name
        self.stream = stream or sys.stdout
        self.meta: dict = {}

    def seed(self, seed: int) -> None:
        """Report the seed in use: a comment line, or a top-level JSON key."""
        self.meta["seed"] = seed
        self.comment(f"seed: {seed}")

    def comment(self, text: str) -> None:
        if self.format == "csv":
            print(f"# {text}", file=self.stream)

    def table(self, header: Sequence[str], rows: Iterable[Sequence], extra: dict | None = None) -> None:
        rows = [list(r) for r in rows]
        if self.format == "json":
            obj = {**self.meta, **(extra or {})}
            obj["rows"] = [dict(zip(header, r)) for r in rows]
            print(json.dumps(_jsonable(obj), indent=2, sort_keys=False), file=self.stream)
            return
        writer = csv.writer(self.stream, lineterminator="\n")
        writer.writerow(header)
        for r in rows:
            writer.writerow([fmt(x) for x in r])


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("CHARVAR_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise graphs.GraphError(f"CHARVAR_SEED={env!r} is not an integer")
    return 0


def _word_text(w) -> str:
    return " ".join(str(k) for k in w)


def _bundle(args) -> graphs.GraphBundle:
    return graphs.load_graph(args.graph)


def _rep(args, graph, out: Output):
    if getattr(args, "rep", None):
        return tensor.load_representation(args.rep, graph)
    seed = _seed(args)
    out.seed(seed)
    return tensor.random_representation(graph, seed)


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# Commands.

def cmd_graph_check(args, out):
    b = _bundle(args)
    problems = graphs.validate(b.graph)
    if problems:
        for p in problems:
            print(f"violation: {p}", file=sys.stderr)
        return 1
    out.table(["vertices", "edges", "betti", "admissible"],
              [[len(b.graph.vertices), len(b.graph.edges), b.graph.betti, True]])
    return 0


def cmd_graph_trees(args, out):
    b = _bundle(args)
    trees = graphs.spanning_trees(b.graph)
    out.table(["index", "tree"], [[i, " ".join(sorted(t))] for i, t in enumerate(trees)])
    return 0


def cmd_graph_spanned(args, out):
    cells = graphs.enumerate_spanned_graphs(args.genus)
    if out.format == "json":
        print(json.dumps([graphs.graph_to_dict(m.graph, m) for m in cells], indent=2))
        return 0
    rows = []
    for i, m in enumerate(cells):
        edges = " ".join(f"{e.id}:{e.src}>{e.dst}" for e in m.graph.edges)
        rows.append([i, edges, " ".join(sorted(m.tree)), " ".join(m.generators)])
    out.table(["cell", "edges", "tree", "generators"], rows)
    return 0


def cmd_length(args, out):
    b = _bundle(args)
    marking, metric = b.require_marking(), b.require_metric()
    out.table(["word", "length"], [[_word_text(w), words.length(w, marking, metric)] for w in args.word])
    return 0


def cmd_weights(args, out):
    b = _bundle(args)
    marking = b.require_marking()
    rows = []
    for w in args.word:
        wt = words.edge_weights(w, marking)
        loop = words.loop_reduce(words.pushforward(w, marking)).format()
        rows.append([_word_text(w)] + [wt[e] for e in b.graph.edge_ids] + [loop])
    out.table(["word"] + list(b.graph.edge_ids) + ["loop"], rows)
    return 0


def cmd_spin_basis(args, out):
    g = _bundle(args).graph
    out.table(list(g.edge_ids), spin.hilbert_basis(g))
    return 0


def cmd_spin_member(args, out):
    g = _bundle(args).graph
    vec = spin.as_vector(g, args.weights)
    cone, lattice = spin.in_cone(g, vec), spin.in_lattice(g, vec)
    out.table(["weights", "cone", "lattice", "member"], [[spin.format_weights(g, vec), cone, lattice, cone and lattice]])
    return 0


def cmd_spin_decompose(args, out):
    g = _bundle(args).graph
    parts = spin.decompose(g, args.weights)
    out.table(["multiplicity"] + list(g.edge_ids), [[n] + list(b) for b, n in parts.items()])
    return 0


def cmd_polytope_count(args, out):
    g = _bundle(args).graph
    out.table(["level", "points"], [[m, len(spin.polytope_points(g, m))] for m in args.level])
    return 0


def cmd_polytope_face(args, out):
    g = _bundle(args).graph
    dim = spin.face_dimension(g, args.ones)
    out.table(["ones", "dimension", "codimension"], [[" ".join(args.ones), dim, len(g.edges) - dim]])
    return 0


def cmd_trace_eval(args, out):
    b = _bundle(args)
    marking = b.require_marking()
    rep = _rep(args, b.graph, out)
    rows = []
    for w in args.word:
        z = tensor.trace_word_eval(w, rep, marking)
        rows.append([_word_text(w), z.real, z.imag])
    out.table(["word", "re", "im"], rows)
    return 0


def cmd_tensor_eval(args, out):
    b = _bundle(args)
    marking = b.require_marking()
    rep = _rep(args, b.graph, out)
    rows = []
    for w in args.word:
        t = tensor.word_to_tensor(w, marking)
        z = tensor.evaluate_tensor(t, rep, args.method)
        rows.append([_word_text(w), len(t.paths), z.real, z.imag])
    out.table(["word", "crossings", "re", "im"], rows)
    return 0


def cmd_trop_embed(args, out):
    b = _bundle(args)
    marking = b.require_marking()
    point = valuation.ValuationPoint(marking, b.require_metric())
    ws = args.word or words.enumerate_S2g(marking.rank)
    out.table(["word", "value"], [[_word_text(w), v] for w, v in zip(ws, valuation.tropical_embed(point, ws))])
    return 0


def cmd_trop_distinguish(args, out):
    seed = _seed(args)
    out.seed(seed)
    rng = random.Random(seed)
    cells = graphs.enumerate_spanned_graphs(args.genus)
    points = []
    for _ in range(args.samples):
        m = cells[rng.randrange(len(cells))]
        points.append(valuation.ValuationPoint(m, valuation.random_rational_metric(m, rng)))
    ws = words.enumerate_S2g(args.genus)
    vectors = _map(lambda p: tuple(valuation.tropical_embed(p, ws)), points, args.jobs)
    keys = [p.key() for p in points]
    collisions, same = [], []
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if vectors[i] == vectors[j]:
                (same if keys[i] == keys[j] else collisions).append((i, j))
    rows = [["collision", i, j] for i, j in collisions] + [["same_point", i, j] for i, j in same]
    out.comment(f"points: {len(points)}, words: {len(ws)}, collisions: {len(collisions)}")
    out.table(["kind", "i", "j"], rows, {"points": len(points), "words": len(ws), "collisions": len(collisions)})
    return 1 if collisions else 0


def cmd_nok(args, out):
    b = _bundle(args)
    marking = b.require_marking()
    order = args.order or list(b.graph.edge_ids)
    rows = [[_word_text(w)] + list(valuation.nok_valuation(marking, order, w)) for w in args.word]
    out.table(["word"] + list(order), rows)
    return 0


def _lengths_rows(graph, rep):
    return [[eid, moment.xi(np.asarray(rep[eid]))] for eid in graph.edge_ids]


def cmd_moment_solve(args, out):
    b = _bundle(args)
    rep = _rep(args, b.graph, out)
    res = moment.kempf_ness_solve(rep, b.graph, tol=args.tol, max_iter=args.max_iters, method=args.method)
    out.comment(f"iterations: {res.iterations}")
    out.comment(f"residual: {fmt(res.residual)}")
    out.comment(f"converged: {fmt(res.converged)}")
    rows = _lengths_rows(b.graph, res.rep)
    in_cone = spin.moment_cone_contains(b.graph, [r[1] for r in rows], tol=1e-6) if b.graph.is_trivalent() else None
    if in_cone is not None:
        out.comment(f"in cone: {fmt(in_cone)}")
    out.table(["edge", "length"], rows, {"iterations": res.iterations, "residual": res.residual,
                                         "converged": res.converged, "in_cone": in_cone})
    if args.rep_out:
        with open(args.rep_out, "w") as fh:
            json.dump(tensor.rep_to_dict(res.rep), fh, indent=2)
    if not res.converged:
        print(f"error: not converged, residual {fmt(res.residual)}", file=sys.stderr)
        return 1
    return 0


def cmd_moment_assign(args, out):
    b = _bundle(args)
    seed = _seed(args)
    out.seed(seed)
    assign = moment.leafless_assignment(b.graph, seed)
    out.comment(f"residual: {fmt(moment.assignment_residual(b.graph, assign))}")
    rows = [[eid, *assign[eid].v, float(np.linalg.norm(assign[eid].v))] for eid in b.graph.edge_ids]
    out.table(["edge", "vx", "vy", "vz", "length"], rows)
    if args.rep_out:
        with open(args.rep_out, "w") as fh:
            json.dump(tensor.rep_to_dict(moment.assignment_to_rep(assign)), fh, indent=2)
    return 0


def cmd_moment_flow(args, out):
    b = _bundle(args)
    rep = _rep(args, b.graph, out)
    res = moment.kempf_ness_solve(rep, b.graph)
    if not res.converged:
        raise moment.MomentError(f"solver did not converge (residual {res.residual:.3g})")
    moved = moment.torus_action(res.rep, b.graph, args.angles)
    before, after = moment.vertex_momenta(res.rep, b.graph), moment.vertex_momenta(moved, b.graph)
    drift = max(float(np.linalg.norm(before[v] - after[v])) for v in b.graph.vertices)
    out.comment(f"momentum drift: {fmt(drift)}")
    rows = [[eid, float(args.angles.get(eid, 0.0)), moment.xi(res.rep[eid]), moment.xi(moved[eid])]
            for eid in b.graph.edge_ids]
    out.table(["edge", "angle", "length_before", "length_after"], rows, {"momentum_drift": drift})
    if args.rep_out:
        with open(args.rep_out, "w") as fh:
            json.dump(tensor.rep_to_dict(moved), fh, indent=2)
    return 0


def cmd_moment_image(args, out):
    b = _bundle(args)
    rep = tensor.load_representation(args.rep, b.graph)
    image = moment.momentum_image(rep, b.graph, tol=args.tol)
    stratum = moment.fiber_stratum(rep, b.graph, tol=args.zero_tol)
    out.comment(f"zero edges: {' '.join(sorted(stratum.zero_edges)) or '-'}")
    out.comment(f"complement leafless: {fmt(stratum.complement_leafless)}")
    out.table(["edge", "length"], [[eid, image[eid]] for eid in b.graph.edge_ids],
              {"zero_edges": sorted(stratum.zero_edges), "complement_leafless": stratum.complement_leafless})
    return 0


def cmd_moment_plot(args, out):
    b = _bundle(args)
    seed = _seed(args)
    out.seed(seed)
    seeds = [seed + i for i in range(args.samples)]

    def solve(s):
        res = moment.kempf_ness_solve(tensor.random_representation(b.graph, s), b.graph)
        return [s] + [moment.xi(res.rep[eid]) for eid in b.graph.edge_ids] + [res.residual]

    out.table(["seed"] + list(b.graph.edge_ids) + ["residual"], _map(solve, seeds, args.jobs))
    return 0


# Parser.

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="charvar", description=__doc__.splitlines()[0])
    parser.add_argument("--format", choices=("csv", "json"), default="csv", help="output format (default csv)")
    groups = parser.add_subparsers(dest="group", required=True)

    def graph_arg(p):
        p.add_argument("graph", help="graph JSON file")

    def word_args(p, required=True):
        p.add_argument("--word", type=_word_arg, action="append", required=required,
                       help='word such as "1 -2 1"; repeatable')

    def seed_args(p):
        p.add_argument("--seed", type=int, help="PRNG seed (fallback: CHARVAR_SEED, then 0)")

    def rep_args(p):
        p.add_argument("--rep", help="representation JSON file (default: random from --seed)")
        seed_args(p)

    g = groups.add_parser("graph", help="graph checks and enumeration").add_subparsers(dest="command", required=True)
    p = g.add_parser("check", help="list admissibility violations")
    graph_arg(p)
    p.set_defaults(func=cmd_graph_check)
    p = g.add_parser("trees", help="list spanning trees")
    graph_arg(p)
    p.set_defaults(func=cmd_graph_trees)
    p = g.add_parser("spanned", help="list spanned graphs of a rank")
    p.add_argument("--genus", type=int, required=True)
    p.set_defaults(func=cmd_graph_spanned)

    p = groups.add_parser("length", help="lengths of words at a metric graph")
    graph_arg(p)
    word_args(p)
    p.set_defaults(func=cmd_length)
    p = groups.add_parser("weights", help="edge weights and reduced loops of words")
    graph_arg(p)
    word_args(p)
    p.set_defaults(func=cmd_weights)

    s = groups.add_parser("spin", help="spin-diagram semigroup").add_subparsers(dest="command", required=True)
    p = s.add_parser("basis", help="Hilbert basis")
    graph_arg(p)
    p.set_defaults(func=cmd_spin_basis)
    p = s.add_parser("member", help="semigroup membership of a weighting")
    graph_arg(p)
    p.add_argument("--weights", type=_weights_arg, required=True, help='e.g. "p=1,q=1,r=2"')
    p.set_defaults(func=cmd_spin_member)
    p = s.add_parser("decompose", help="write a weighting over the Hilbert basis")
    graph_arg(p)
    p.add_argument("--weights", type=_weights_arg, required=True)
    p.set_defaults(func=cmd_spin_decompose)

    q = groups.add_parser("polytope", help="lattice points and faces").add_subparsers(dest="command", required=True)
    p = q.add_parser("count", help="number of lattice points at given levels")
    graph_arg(p)
    p.add_argument("--level", type=_levels_arg, required=True, help="level or comma list of levels")
    p.set_defaults(func=cmd_polytope_count)
    p = q.add_parser("face", help="dimension of the face where chosen edges have weight 1")
    graph_arg(p)
    p.add_argument("--ones", type=_ids_arg, default=[], help="comma list of edge ids")
    p.set_defaults(func=cmd_polytope_face)

    t = groups.add_parser("trace", help="trace functions").add_subparsers(dest="command", required=True)
    p = t.add_parser("eval", help="evaluate trace words on a representation")
    graph_arg(p)
    word_args(p)
    rep_args(p)
    p.set_defaults(func=cmd_trace_eval)

    t = groups.add_parser("tensor", help="graph tensors").add_subparsers(dest="command", required=True)
    p = t.add_parser("eval", help="evaluate word tensors as Plucker sums")
    graph_arg(p)
    word_args(p)
    rep_args(p)
    p.add_argument("--method", choices=("auto", "enumerate", "transfer"), default="auto")
    p.set_defaults(func=cmd_tensor_eval)

    t = groups.add_parser("trop", help="tropical evaluation").add_subparsers(dest="command", required=True)
    p = t.add_parser("embed", help="lengths of words (default: the two-letter-bounded set)")
    graph_arg(p)
    word_args(p, required=False)
    p.set_defaults(func=cmd_trop_embed)
    p = t.add_parser("distinguish", help="look for collisions among random points")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--samples", type=_positive(int), default=40)
    p.add_argument("--jobs", type=_positive(int), default=1)
    seed_args(p)
    p.set_defaults(func=cmd_trop_distinguish)

    p = groups.add_parser("nok", help="edge-order valuation of words")
    graph_arg(p)
    p.add_argument("--order", type=_ids_arg, help="comma list of all edge ids (default: file order)")
    word_args(p)
    p.set_defaults(func=cmd_nok)

    m = groups.add_parser("moment", help="momentum maps").add_subparsers(dest="command", required=True)
    p = m.add_parser("solve", help="Kempf-Ness descent to zero momentum")
    graph_arg(p)
    rep_args(p)
    p.add_argument("--tol", type=_positive(float), default=1e-8)
    p.add_argument("--max-iters", type=_positive(int), default=10_000)
    p.add_argument("--method", choices=("newton", "gradient"), default="newton")
    p.add_argument("--rep-out", help="write the solved representation here")
    p.set_defaults(func=cmd_moment_solve)
    p = m.add_parser("assign", help="explicit zero-momentum data on a leafless graph")
    graph_arg(p)
    seed_args(p)
    p.add_argument("--rep-out")
    p.set_defaults(func=cmd_moment_assign)
    p = m.add_parser("flow", help="torus action on a solved representation")
    graph_arg(p)
    rep_args(p)
    p.add_argument("--angles", type=_angles_arg, required=True, help='e.g. "p=0.3,q=1"')
    p.add_argument("--rep-out")
    p.set_defaults(func=cmd_moment_flow)
    p = m.add_parser("image", help="edge lengths of a zero-momentum representation")
    graph_arg(p)
    p.add_argument("--rep", required=True)
    p.add_argument("--tol", type=_positive(float), default=1e-6)
    p.add_argument("--zero-tol", type=_positive(float), default=1e-8, help="lengths below this count as zero")
    p.set_defaults(func=cmd_moment_image)
    p = m.add_parser("plot", help="edge lengths of solved random representations, for scatter plots")
    graph_arg(p)
    seed_args(p)
    p.add_argument("--samples", type=_positive(int), default=20)
    p.add_argument("--jobs", type=_positive(int), default=1)
    p.set_defaults(func=cmd_moment_plot)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Output(args.format)
    try:
        return args.func(args, out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
