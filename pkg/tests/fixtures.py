"""Hand-built covers shared by the test modules.

Every builder returns fresh objects so tests can mutate copies freely.
Source-graph ids mirror the target ids with an ASCII apostrophe.
"""

from __future__ import annotations

from fractions import Fraction

from skelcov.cover import DecoratedCover
from skelcov.galois import Automorphism, GaloisCoverModel
from skelcov.metric_graph import Edge, MetricGraph, Vertex, VertexKind
from skelcov.rationals import INF

P = VertexKind.PUNCTURE


def identity_cover(g: MetricGraph) -> DecoratedCover:
    """The identity cover of a graph, all decorations trivial."""
    return DecoratedCover(
        g,
        g,
        vertex_map={v: v for v in g.vertices},
        edge_map={e: e for e in g.edges},
        ram={e: 1 for e in g.edges},
        local_degree={v: 1 for v in g.vertices},
    )


def double_circle_cover() -> DecoratedCover:
    """Unramified 2:1 cover of a circle by a circle of twice the length."""
    target = MetricGraph([Vertex("p")], [Edge("s", "p", "p", Fraction(1))])
    source = MetricGraph(
        [Vertex("p'1"), Vertex("p'2")],
        [
            Edge("s'1", "p'1", "p'2", Fraction(1)),
            Edge("s'2", "p'2", "p'1", Fraction(1)),
        ],
    )
    return DecoratedCover(
        source,
        target,
        vertex_map={"p'1": "p", "p'2": "p"},
        edge_map={"s'1": "s", "s'2": "s"},
        ram={"s'1": 1, "s'2": 1},
        local_degree={"p'1": 1, "p'2": 1},
    )


def double_circle_model() -> GaloisCoverModel:
    """The double circle with its half-rotation deck group."""
    cover = double_circle_cover()
    identity = Automorphism(
        {"p'1": "p'1", "p'2": "p'2"}, {"s'1": "s'1", "s'2": "s'2"}
    )
    half_turn = Automorphism(
        {"p'1": "p'2", "p'2": "p'1"}, {"s'1": "s'2", "s'2": "s'1"}
    )
    return GaloisCoverModel(cover, (identity, half_turn))


def double_circle_punctured_model() -> GaloisCoverModel:
    """Double circle with one puncture per sheet over a single puncture."""
    target = MetricGraph(
        [Vertex("p"), Vertex("x", P)],
        [Edge("s", "p", "p", Fraction(1)), Edge("q", "p", "x", INF)],
    )
    source = MetricGraph(
        [Vertex("p'1"), Vertex("p'2"), Vertex("x'1", P), Vertex("x'2", P)],
        [
            Edge("s'1", "p'1", "p'2", Fraction(1)),
            Edge("s'2", "p'2", "p'1", Fraction(1)),
            Edge("q'1", "p'1", "x'1", INF),
            Edge("q'2", "p'2", "x'2", INF),
        ],
    )
    cover = DecoratedCover(
        source,
        target,
        vertex_map={"p'1": "p", "p'2": "p", "x'1": "x", "x'2": "x"},
        edge_map={"s'1": "s", "s'2": "s", "q'1": "q", "q'2": "q"},
        ram={"s'1": 1, "s'2": 1, "q'1": 1, "q'2": 1},
        local_degree={"p'1": 1, "p'2": 1, "x'1": 1, "x'2": 1},
    )
    identity = Automorphism(
        {v: v for v in source.vertices}, {e: e for e in source.edges}
    )
    half_turn = Automorphism(
        {"p'1": "p'2", "p'2": "p'1", "x'1": "x'2", "x'2": "x'1"},
        {"s'1": "s'2", "s'2": "s'1", "q'1": "q'2", "q'2": "q'1"},
    )
    return GaloisCoverModel(cover, (identity, half_turn))


def folded_segment_cover(source_length: Fraction = Fraction(1)) -> DecoratedCover:
    """Degree-2 fold of a segment: ram 2, the source at half length."""
    target = MetricGraph(
        [Vertex("a"), Vertex("b")], [Edge("s", "a", "b", Fraction(2))]
    )
    source = MetricGraph(
        [Vertex("a'"), Vertex("b'")], [Edge("s'", "a'", "b'", source_length)]
    )
    return DecoratedCover(
        source,
        target,
        vertex_map={"a'": "a", "b'": "b"},
        edge_map={"s'": "s"},
        ram={"s'": 2},
        local_degree={"a'": 2, "b'": 2},
        ram_div_degree={"a'": 2, "b'": 2},
    )


def punctured_fold_cover() -> DecoratedCover:
    """Degree-2 fold with puncture endpoints: two ram-2 rays off a center."""
    target = MetricGraph(
        [Vertex("m"), Vertex("a", P), Vertex("b", P)],
        [Edge("qa", "m", "a", INF), Edge("qb", "m", "b", INF)],
    )
    source = MetricGraph(
        [Vertex("m'"), Vertex("a'", P), Vertex("b'", P)],
        [Edge("qa'", "m'", "a'", INF), Edge("qb'", "m'", "b'", INF)],
    )
    return DecoratedCover(
        source,
        target,
        vertex_map={"m'": "m", "a'": "a", "b'": "b"},
        edge_map={"qa'": "qa", "qb'": "qb"},
        ram={"qa'": 2, "qb'": 2},
        local_degree={"m'": 2, "a'": 2, "b'": 2},
        ram_div_degree={"m'": 2, "a'": 0, "b'": 0},
    )


def branching_segment_cover() -> DecoratedCover:
    """Degree 2 over a segment: one vertex over c, two edges down to d."""
    target = MetricGraph(
        [Vertex("c"), Vertex("d")], [Edge("s", "c", "d", Fraction(1))]
    )
    source = MetricGraph(
        [Vertex("c'"), Vertex("d'1"), Vertex("d'2")],
        [
            Edge("s'1", "c'", "d'1", Fraction(1)),
            Edge("s'2", "c'", "d'2", Fraction(1)),
        ],
    )
    return DecoratedCover(
        source,
        target,
        vertex_map={"c'": "c", "d'1": "d", "d'2": "d"},
        edge_map={"s'1": "s", "s'2": "s"},
        ram={"s'1": 1, "s'2": 1},
        local_degree={"c'": 2, "d'1": 1, "d'2": 1},
        ram_div_degree={"c'": 2, "d'1": 0, "d'2": 0},
    )


def cyclic_star_cover() -> DecoratedCover:
    """Cyclic triple cover of a 3-ray star: one ray fully ramified, the
    other two split into three unramified rays each."""
    target = MetricGraph(
        [Vertex("p"), Vertex("x1", P), Vertex("x2", P), Vertex("x3", P)],
        [
            Edge("q1", "p", "x1", INF),
            Edge("q2", "p", "x2", INF),
            Edge("q3", "p", "x3", INF),
        ],
    )
    s_vertices = [Vertex("p'"), Vertex("x'1", P)]
    s_edges = [Edge("q'1", "p'", "x'1", INF)]
    vm = {"p'": "p", "x'1": "x1"}
    em = {"q'1": "q1"}
    ram = {"q'1": 3}
    ld = {"p'": 3, "x'1": 3}
    rd = {"p'": 4, "x'1": 0}
    for i in (2, 3):
        for j in (1, 2, 3):
            s_vertices.append(Vertex(f"x'{i}{j}", P))
            s_edges.append(Edge(f"q'{i}{j}", "p'", f"x'{i}{j}", INF))
            vm[f"x'{i}{j}"] = f"x{i}"
            em[f"q'{i}{j}"] = f"q{i}"
            ram[f"q'{i}{j}"] = 1
            ld[f"x'{i}{j}"] = 1
            rd[f"x'{i}{j}"] = 0
    return DecoratedCover(
        MetricGraph(s_vertices, s_edges),
        target,
        vertex_map=vm,
        edge_map=em,
        ram=ram,
        local_degree=ld,
        ram_div_degree=rd,
    )


def cyclic_star_model() -> GaloisCoverModel:
    """The cyclic star with its rotation group of order 3."""
    cover = cyclic_star_cover()
    group = []
    for t in range(3):
        vp = {"p'": "p'", "x'1": "x'1"}
        ep = {"q'1": "q'1"}
        for i in (2, 3):
            for j in (1, 2, 3):
                k = (j - 1 + t) % 3 + 1
                vp[f"x'{i}{j}"] = f"x'{i}{k}"
                ep[f"q'{i}{j}"] = f"q'{i}{k}"
        group.append(Automorphism(vp, ep))
    return GaloisCoverModel(cover, tuple(group))


def bad_local_decoration_cover() -> DecoratedCover:
    """Fold over a genus-1 endpoint whose decoration books cannot balance."""
    target = MetricGraph(
        [Vertex("a", genus=1), Vertex("b")], [Edge("s", "a", "b", Fraction(2))]
    )
    source = MetricGraph(
        [Vertex("a'"), Vertex("b'")], [Edge("s'", "a'", "b'", Fraction(1))]
    )
    return DecoratedCover(
        source,
        target,
        vertex_map={"a'": "a", "b'": "b"},
        edge_map={"s'": "s"},
        ram={"s'": 2},
        local_degree={"a'": 2, "b'": 2},
        ram_div_degree={"a'": 0, "b'": 2},
    )


def lopsided_star_model() -> GaloisCoverModel:
    """A valid degree-3 star cover that is NOT Galois: one target ray has
    lifts of unequal ram (1 and 2), so lift counts cannot be constant."""
    target = MetricGraph(
        [Vertex("p"), Vertex("x1", P), Vertex("x2", P)],
        [Edge("q1", "p", "x1", INF), Edge("q2", "p", "x2", INF)],
    )
    source = MetricGraph(
        [
            Vertex("p'"),
            Vertex("x'1a", P),
            Vertex("x'1b", P),
            Vertex("x'21", P),
            Vertex("x'22", P),
            Vertex("x'23", P),
        ],
        [
            Edge("q'1a", "p'", "x'1a", INF),
            Edge("q'1b", "p'", "x'1b", INF),
            Edge("q'21", "p'", "x'21", INF),
            Edge("q'22", "p'", "x'22", INF),
            Edge("q'23", "p'", "x'23", INF),
        ],
    )
    cover = DecoratedCover(
        source,
        target,
        vertex_map={
            "p'": "p",
            "x'1a": "x1",
            "x'1b": "x1",
            "x'21": "x2",
            "x'22": "x2",
            "x'23": "x2",
        },
        edge_map={
            "q'1a": "q1",
            "q'1b": "q1",
            "q'21": "q2",
            "q'22": "q2",
            "q'23": "q2",
        },
        ram={"q'1a": 1, "q'1b": 2, "q'21": 1, "q'22": 1, "q'23": 1},
        local_degree={
            "p'": 3,
            "x'1a": 1,
            "x'1b": 2,
            "x'21": 1,
            "x'22": 1,
            "x'23": 1,
        },
        ram_div_degree={
            "p'": 4,
            "x'1a": 0,
            "x'1b": 0,
            "x'21": 0,
            "x'22": 0,
            "x'23": 0,
        },
    )
    identity = Automorphism(
        {v: v for v in source.vertices}, {e: e for e in source.edges}
    )
    return GaloisCoverModel(cover, (identity,))


def banana_graph() -> MetricGraph:
    """Two vertices joined by edges of unequal length, plus one ray."""
    return MetricGraph(
        [Vertex("u"), Vertex("v"), Vertex("x", P)],
        [
            Edge("t1", "u", "v", Fraction(1)),
            Edge("t2", "u", "v", Fraction(2)),
            Edge("q", "u", "x", INF),
        ],
    )
