"""Built-in theories, kernels and small named structures."""

from __future__ import annotations

import itertools
from fractions import Fraction

from .models import Model, PredicateSpec, Theory, standard_supports

GRAPHS = Theory("graphs", 2, (PredicateSpec("E", 2, True),))
DIGRAPHS = Theory("digraphs", 2, (PredicateSpec("A", 2, False),))
HYPERGRAPHS3 = Theory("3-graphs", 3, (PredicateSpec("E", 3, True),))


def graph(n: int, edges=(), theory: Theory = GRAPHS) -> Model:
    """Graph on ``1..n`` from an edge list (order of endpoints ignored)."""
    edges = {tuple(sorted(e)) for e in edges}
    colors = {s: (int(s in edges),) for s in standard_supports(n, theory.arities)}
    return Model(theory, n, colors)


def hypergraph(n: int, edges=(), theory: Theory = HYPERGRAPHS3) -> Model:
    return graph(n, edges, theory)


def digraph(n: int, arcs=(), theory: Theory = DIGRAPHS) -> Model:
    """Digraph on ``1..n``; bits per pair ``u<v`` are ``(u->v, v->u)``."""
    arcs = set(arcs)
    colors = {(u, v): (int((u, v) in arcs), int((v, u) in arcs))
              for u, v in itertools.combinations(range(1, n + 1), 2)}
    return Model(theory, n, colors)


def complete(n: int) -> Model:
    return graph(n, itertools.combinations(range(1, n + 1), 2))


def cycle(n: int) -> Model:
    return graph(n, [(i, i % n + 1) for i in range(1, n + 1)])


def path(n: int) -> Model:
    return graph(n, [(i, i + 1) for i in range(1, n)])


EDGE = complete(2)
NON_EDGE = graph(2)
K3 = complete(3)

TRIANGLE_FREE = GRAPHS.forbid(K3, name="triangle-free graphs")

THEORIES = {
    "graphs": GRAPHS,
    "digraphs": DIGRAPHS,
    "triangle-free": TRIANGLE_FREE,
    "3-graphs": HYPERGRAPHS3,
}


def single_type_graph_kernel(p, theory: Theory = GRAPHS):
    from .kernels import StepKernel

    p = Fraction(p)
    return StepKernel(theory, ("a",), (Fraction(1),),
                      {2: {(0, 0): {(1,): p, (0,): 1 - p}}})


def two_type_graph_kernel(alpha=(Fraction(1, 2), Fraction(1, 2)), cross=1, within=0,
                          theory: Theory = GRAPHS):
    """Two vertex types; edge probability ``cross`` between types, ``within`` inside one."""
    from .kernels import StepKernel

    cross, within = Fraction(cross), Fraction(within)
    dist = {}
    for a, b in itertools.product(range(2), repeat=2):
        q = within if a == b else cross
        dist[(a, b)] = {(1,): q, (0,): 1 - q}
    return StepKernel(theory, ("a", "b"), tuple(Fraction(x) for x in alpha), {2: dist})


def worked_certificate():
    """Self-certificate for the average over the vertex type of ``(e - ebar)^2``."""
    from .algebra import downward, from_flag
    from .flags import Flag, TypeSigma
    from .verify import Certificate

    f = from_flag(Flag(EDGE, 1)) - from_flag(Flag(NON_EDGE, 1))
    return Certificate(downward(f * f, 0), [(TypeSigma(graph(1)), f, Fraction(1))], [])


def asset_objects() -> dict:
    """Shipped example files, keyed by relative path, as JSON-ready dicts."""
    from . import serialize as ser
    from .algebra import unit
    from .flags import Flag, TypeSigma
    from .verify import Certificate

    out = {f"theories/{name}.json": ser.theory_to_json(t) for name, t in THEORIES.items()}
    out["kernels/graph-half.json"] = ser.kernel_to_json(single_type_graph_kernel(Fraction(1, 2)))
    out["kernels/graph-three-quarters.json"] = ser.kernel_to_json(single_type_graph_kernel(Fraction(3, 4)))
    out["kernels/bipartite-two-type.json"] = ser.kernel_to_json(two_type_graph_kernel())
    out["certificates/vertex-square.json"] = ser.certificate_to_json(worked_certificate())
    out["certificates/minus-unit.json"] = ser.certificate_to_json(
        Certificate(unit(GRAPHS, TypeSigma.empty(GRAPHS)) * -1, [], []))
    out["flags/edge.json"] = ser.flag_to_json(Flag(EDGE, 0))
    out["flags/triangle.json"] = ser.flag_to_json(Flag(K3, 0))
    return out


def write_assets(directory) -> list:
    from pathlib import Path

    from .serialize import dumps

    written = []
    for rel, obj in asset_objects().items():
        path = Path(directory) / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(obj))
        written.append(str(path))
    return written
