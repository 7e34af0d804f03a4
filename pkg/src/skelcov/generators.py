"""Parametric and randomized families of graphs, covers and point sets.

Everything here is driven by an explicit :class:`random.Random` instance, so
a fixed seed reproduces the same family member.  The random covers are built
to satisfy the cover axioms by construction: local degrees are chosen per
fiber, edge lifts are produced by a northwest-corner transport between the
two fibers of each target edge (which balances every germ sum exactly), and
the source is cut down to one connected component, over which the degree is
again constant because harmonic degrees are locally constant.

The Galois families (cyclic voltage covers, ramified cyclic stars, dihedral
necklaces) come with their deck groups, and :func:`tn_oracle_input` produces
valuation data of power-map fibers for the tree-of-balls oracle, including
the wild cubic case in residue characteristic three.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .cover import DecoratedCover
from .galois import Automorphism, GaloisCoverModel
from .metric_graph import Edge, MetricGraph, Vertex, VertexKind
from .pone_oracle import FactoredPolynomial, Fiber, UltrametricPointSet
from .rationals import INF, format_scalar
from .retraction import RetractionFlow


def _random_length(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(1, 8), rng.choice([1, 2, 3, 4]))


def _composition(rng: random.Random, total: int) -> list[int]:
    """A random ordered list of positive integers with the given sum."""
    parts = []
    rem = total
    while rem:
        p = rng.randint(1, rem)
        parts.append(p)
        rem -= p
    rng.shuffle(parts)
    return parts


def random_metric_graph(
    rng: random.Random,
    max_skeletal: int = 5,
    max_extra_edges: int = 2,
    max_rays: int = 2,
) -> MetricGraph:
    """A small random connected graph: a spanning tree plus a few extra
    edges (loops and parallels allowed) and a few rays to punctures."""
    n = rng.randint(1, max_skeletal)
    vertices = [
        Vertex(f"v{i}", VertexKind.SKELETAL, rng.choice([0, 0, 0, 1, 2]))
        for i in range(n)
    ]
    edges = []
    for i in range(1, n):
        edges.append(Edge(f"t{i}", f"v{rng.randrange(i)}", f"v{i}", _random_length(rng)))
    for j in range(rng.randint(0, max_extra_edges)):
        a, b = rng.randrange(n), rng.randrange(n)
        edges.append(Edge(f"e{j}", f"v{a}", f"v{b}", _random_length(rng)))
    for j in range(rng.randint(0, max_rays)):
        vertices.append(Vertex(f"x{j}", VertexKind.PUNCTURE, 0))
        edges.append(Edge(f"q{j}", f"v{rng.randrange(n)}", f"x{j}", INF))
    return MetricGraph(vertices, edges)


def random_cover(
    rng: random.Random,
    target: MetricGraph | None = None,
    degree: int | None = None,
) -> DecoratedCover:
    """A random valid decorated cover of a (random) target, residue char 0.

    Local degrees over each skeletal target vertex are a random composition
    of the degree; every target edge's lifts come from a northwest-corner
    transport between the endpoint fibers, so all germ sums balance.  The
    source is then restricted to the connected component of its smallest
    vertex (degrees stay constant on a component).  Vertex genera are chosen
    to satisfy the local genus formula, so only global audits can fail.
    """
    if target is None:
        target = random_metric_graph(rng)
    d = degree if degree is not None else rng.randint(2, 4)

    fibers: dict[str, list[str]] = {}
    ld: dict[str, int] = {}
    for w in target.skeletal_vertices():
        parts = _composition(rng, d)
        fibers[w] = [f"{w}.{i}" for i in range(len(parts))]
        for vid, part in zip(fibers[w], parts):
            ld[vid] = part

    vm: dict[str, str] = {v: w for w, fiber in fibers.items() for v in fiber}
    em: dict[str, int] = {}
    edge_map: dict[str, str] = {}
    ram: dict[str, int] = {}
    src_edges: list[Edge] = []
    puncture_ram: dict[str, int] = {}

    def transport(supply: list[list], demand: list[list]) -> list[tuple[str, str, int]]:
        pieces = []
        i = j = 0
        while i < len(supply) and j < len(demand):
            r = min(supply[i][1], demand[j][1])
            pieces.append((supply[i][0], demand[j][0], r))
            supply[i][1] -= r
            demand[j][1] -= r
            if supply[i][1] == 0:
                i += 1
            if demand[j][1] == 0:
                j += 1
        return pieces

    for fid in sorted(target.edges):
        f = target.edges[fid]
        k = 0
        if f.is_ray:
            x = f.v1
            for v in sorted(fibers[f.v0]):
                for r in _composition(rng, ld[v]):
                    eid, pid = f"{fid}.{k}", f"{x}.{len(puncture_ram)}"
                    src_edges.append(Edge(eid, v, pid, INF))
                    edge_map[eid] = fid
                    ram[eid] = r
                    vm[pid] = x
                    ld[pid] = r
                    puncture_ram[pid] = r
                    k += 1
            continue
        supply = [[v, ld[v]] for v in fibers[f.v0]]
        demand = [[v, ld[v]] for v in fibers[f.v1]]
        rng.shuffle(supply)
        rng.shuffle(demand)
        for vs, vd, r in transport(supply, demand):
            eid = f"{fid}.{k}"
            src_edges.append(Edge(eid, vs, vd, f.length / r))
            edge_map[eid] = fid
            ram[eid] = r
            k += 1

    # Restrict to the connected component of the smallest source vertex.
    comp = {v: v for v in vm}

    def find(v: str) -> str:
        while comp[v] != v:
            comp[v] = comp[comp[v]]
            v = comp[v]
        return v

    for e in src_edges:
        ra, rb = find(e.v0), find(e.v1)
        if ra != rb:
            comp[ra] = rb
    keep_root = find(min(vm))
    keep = {v for v in vm if find(v) == keep_root}

    src_vertices = []
    genus: dict[str, int] = {}
    rd: dict[str, int] = {}
    for v in sorted(keep):
        w = vm[v]
        if target.vertices[w].kind is VertexKind.PUNCTURE:
            src_vertices.append(Vertex(v, VertexKind.PUNCTURE, 0))
            rd[v] = 0
        else:
            extra = rng.choice((0, 0, 0, 1))
            genus[v] = ld[v] * target.vertices[w].genus + extra
            rd[v] = 2 * extra + 2 * (ld[v] - 1)
            src_vertices.append(Vertex(v, VertexKind.SKELETAL, genus[v]))
    source = MetricGraph(src_vertices, [e for e in src_edges if e.v0 in keep])

    return DecoratedCover(
        source,
        target,
        {v: vm[v] for v in keep},
        {e: edge_map[e] for e in edge_map if source.edges.get(e) is not None},
        {e: ram[e] for e in ram if e in source.edges},
        {v: ld[v] for v in keep},
        residue_char=0,
        ram_div_degree=rd,
        puncture_ram={x: puncture_ram[x] for x in puncture_ram if x in keep},
    )


def random_flow(rng: random.Random, cover: DecoratedCover) -> RetractionFlow:
    """A random valid flow on the cover's target, fit for skeleton growth.

    Starts from the bounded core plus, for every ramified source puncture,
    the image puncture and its ray (those may never leave the core), then
    strips random unprotected leaves.
    """
    target = cover.target
    protected_vertices: set[str] = set()
    protected_edges: set[str] = set()
    cv = set(target.skeletal_vertices())
    ce = set(target.finite_edges())
    for x in sorted(cover.source.punctures()):
        if cover.puncture_ram[x] > 1:
            img = cover.vertex_map[x]
            (ray, _), = target.edge_ends_at(img)
            protected_vertices.update({img, target.edges[ray].v0})
            protected_edges.add(ray)
            cv.add(img)
            ce.add(ray)
    for _ in range(rng.randint(0, 8)):
        if len(cv) <= 1:
            break
        candidates = []
        for v in sorted(cv):
            if v in protected_vertices:
                continue
            ends = [eid for eid, _ in target.edge_ends_at(v) if eid in ce]
            if len(ends) == 1 and ends[0] not in protected_edges:
                candidates.append((v, ends[0]))
        if not candidates:
            break
        v, e = candidates[rng.randrange(len(candidates))]
        cv.discard(v)
        ce.discard(e)
    return RetractionFlow(target, cv, ce)


# -- Galois families ----------------------------------------------------------


def cyclic_voltage_model(
    n: int, cycle_len: int = 1, rays: int = 0, rng: random.Random | None = None
) -> GaloisCoverModel:
    """Degree-n unramified cyclic cover of a cycle, with its rotation group.

    The target is a cycle of ``cycle_len`` vertices (a loop when 1) with
    ``rays`` punctures attached; one cycle edge carries voltage 1, the rest
    0, so the source is a single cycle ``n`` times as long.
    """
    if n < 2:
        raise ValueError("a cyclic cover needs n >= 2")
    rng = rng if rng is not None else random.Random(n * 31 + cycle_len)
    k = cycle_len
    t_vertices = [
        Vertex(f"w{i}", VertexKind.SKELETAL, rng.choice([0, 0, 1])) for i in range(k)
    ]
    t_edges = [
        Edge(f"c{i}", f"w{i}", f"w{(i + 1) % k}", _random_length(rng)) for i in range(k)
    ]
    for j in range(rays):
        t_vertices.append(Vertex(f"x{j}", VertexKind.PUNCTURE, 0))
        t_edges.append(Edge(f"q{j}", f"w{j % k}", f"x{j}", INF))
    target = MetricGraph(t_vertices, t_edges)

    voltage = {f"c{i}": 0 for i in range(k)}
    voltage[f"c{k - 1}"] = 1

    s_vertices, s_edges = [], []
    vm, em, ram, ld, pr = {}, {}, {}, {}, {}
    for i in range(k):
        for j in range(n):
            vid = f"w{i}.{j}"
            s_vertices.append(Vertex(vid, VertexKind.SKELETAL, target.vertices[f"w{i}"].genus))
            vm[vid] = f"w{i}"
            ld[vid] = 1
    for i in range(k):
        fid = f"c{i}"
        for j in range(n):
            eid = f"{fid}.{j}"
            s_edges.append(Edge(
                eid, f"w{i}.{j}", f"w{(i + 1) % k}.{(j + voltage[fid]) % n}",
                target.edges[fid].length,
            ))
            em[eid] = fid
            ram[eid] = 1
    for j in range(rays):
        for t in range(n):
            pid, eid = f"x{j}.{t}", f"q{j}.{t}"
            s_vertices.append(Vertex(pid, VertexKind.PUNCTURE, 0))
            s_edges.append(Edge(eid, f"w{j % k}.{t}", pid, INF))
            vm[pid] = f"x{j}"
            em[eid] = f"q{j}"
            ram[eid] = 1
            ld[pid] = 1
            pr[pid] = 1
    source = MetricGraph(s_vertices, s_edges)
    cover = DecoratedCover(source, target, vm, em, ram, ld, puncture_ram=pr)

    group = []
    for t in range(n):
        vperm = {f"w{i}.{j}": f"w{i}.{(j + t) % n}" for i in range(k) for j in range(n)}
        eperm = {f"c{i}.{j}": f"c{i}.{(j + t) % n}" for i in range(k) for j in range(n)}
        for j in range(rays):
            for s in range(n):
                vperm[f"x{j}.{s}"] = f"x{j}.{(s + t) % n}"
                eperm[f"q{j}.{s}"] = f"q{j}.{(s + t) % n}"
        group.append(Automorphism(vperm, eperm))
    return GaloisCoverModel(cover, group)


def ramified_cyclic_star(n: int, tame_rays: int = 2) -> GaloisCoverModel:
    """Degree-n cyclic cover of a star: one totally ramified ray, the rest
    split completely.  The deck group fixes the ramified ray and rotates
    each split ray fiber."""
    if n < 2:
        raise ValueError("a cyclic star needs n >= 2")
    if tame_rays < 1:
        raise ValueError("need at least one split ray")
    arms = 1 + tame_rays
    t_vertices = [Vertex("p", VertexKind.SKELETAL, 0)]
    t_edges = []
    for i in range(1, arms + 1):
        t_vertices.append(Vertex(f"x{i}", VertexKind.PUNCTURE, 0))
        t_edges.append(Edge(f"q{i}", "p", f"x{i}", INF))
    target = MetricGraph(t_vertices, t_edges)

    s_vertices = [Vertex("p.0", VertexKind.SKELETAL, 0)]
    s_edges = [Edge("q1.0", "p.0", "x1.0", INF)]
    s_vertices.append(Vertex("x1.0", VertexKind.PUNCTURE, 0))
    vm = {"p.0": "p", "x1.0": "x1"}
    em = {"q1.0": "q1"}
    ram = {"q1.0": n}
    ld = {"p.0": n, "x1.0": n}
    pr = {"x1.0": n}
    rd = {"p.0": 2 * (n - 1), "x1.0": 0}
    for i in range(2, arms + 1):
        for j in range(n):
            pid, eid = f"x{i}.{j}", f"q{i}.{j}"
            s_vertices.append(Vertex(pid, VertexKind.PUNCTURE, 0))
            s_edges.append(Edge(eid, "p.0", pid, INF))
            vm[pid] = f"x{i}"
            em[eid] = f"q{i}"
            ram[eid] = 1
            ld[pid] = 1
            pr[pid] = 1
            rd[pid] = 0
    source = MetricGraph(s_vertices, s_edges)
    cover = DecoratedCover(
        source, target, vm, em, ram, ld,
        sep_degree=dict(ld), ram_div_degree=rd, puncture_ram=pr,
    )
    group = []
    for t in range(n):
        vperm = {"p.0": "p.0", "x1.0": "x1.0"}
        eperm = {"q1.0": "q1.0"}
        for i in range(2, arms + 1):
            for j in range(n):
                vperm[f"x{i}.{j}"] = f"x{i}.{(j + t) % n}"
                eperm[f"q{i}.{j}"] = f"q{i}.{(j + t) % n}"
        group.append(Automorphism(vperm, eperm))
    return GaloisCoverModel(cover, group)


def dihedral_necklace(
    n: int, ramified_rays: bool = False, length: Fraction = Fraction(1)
) -> GaloisCoverModel:
    """The 2n-cycle folding onto a segment, with its dihedral deck group.

    Every vertex has local degree 2 and every edge is unramified; the
    reflections are needed to act transitively on germ fibers.  With
    ``ramified_rays`` each vertex over the segment's first endpoint carries
    a doubly ramified ray over one target ray.
    """
    if n < 1:
        raise ValueError("a necklace needs n >= 1")
    t_vertices = [Vertex("a", VertexKind.SKELETAL, 0), Vertex("b", VertexKind.SKELETAL, 0)]
    t_edges = [Edge("s", "a", "b", Fraction(length))]
    if ramified_rays:
        t_vertices.append(Vertex("x", VertexKind.PUNCTURE, 0))
        t_edges.append(Edge("q", "a", "x", INF))
    target = MetricGraph(t_vertices, t_edges)

    s_vertices, s_edges = [], []
    vm, em, ram, ld, pr, rd = {}, {}, {}, {}, {}, {}
    for i in range(n):
        for name, w in ((f"a.{i}", "a"), (f"b.{i}", "b")):
            s_vertices.append(Vertex(name, VertexKind.SKELETAL, 0))
            vm[name] = w
            ld[name] = 2
            rd[name] = 2
        s_edges.append(Edge(f"e{i}", f"a.{i}", f"b.{i}", Fraction(length)))
        s_edges.append(Edge(f"f{i}", f"b.{i}", f"a.{(i + 1) % n}", Fraction(length)))
        em[f"e{i}"] = "s"
        em[f"f{i}"] = "s"
        ram[f"e{i}"] = 1
        ram[f"f{i}"] = 1
        if ramified_rays:
            s_vertices.append(Vertex(f"x.{i}", VertexKind.PUNCTURE, 0))
            s_edges.append(Edge(f"q.{i}", f"a.{i}", f"x.{i}", INF))
            vm[f"x.{i}"] = "x"
            em[f"q.{i}"] = "q"
            ram[f"q.{i}"] = 2
            ld[f"x.{i}"] = 2
            pr[f"x.{i}"] = 2
            rd[f"x.{i}"] = 0
    source = MetricGraph(s_vertices, s_edges)
    cover = DecoratedCover(
        source, target, vm, em, ram, ld,
        ram_div_degree=rd, puncture_ram=pr or None,
    )

    def rotation(t: int) -> Automorphism:
        vperm = {}
        eperm = {}
        for i in range(n):
            vperm[f"a.{i}"] = f"a.{(i + t) % n}"
            vperm[f"b.{i}"] = f"b.{(i + t) % n}"
            eperm[f"e{i}"] = f"e{(i + t) % n}"
            eperm[f"f{i}"] = f"f{(i + t) % n}"
            if ramified_rays:
                vperm[f"x.{i}"] = f"x.{(i + t) % n}"
                eperm[f"q.{i}"] = f"q.{(i + t) % n}"
        return Automorphism(vperm, eperm)

    vperm = {}
    eperm = {}
    for i in range(n):
        vperm[f"a.{i}"] = f"a.{(-i) % n}"
        vperm[f"b.{i}"] = f"b.{(-i - 1) % n}"
        eperm[f"e{i}"] = f"f{(-i - 1) % n}"
        eperm[f"f{i}"] = f"e{(-i - 1) % n}"
        if ramified_rays:
            vperm[f"x.{i}"] = f"x.{(-i) % n}"
            eperm[f"q.{i}"] = f"q.{(-i) % n}"
    reflection = Automorphism(vperm, eperm)
    rotations = [rotation(t) for t in range(n)]
    group = rotations + [reflection.compose(r) for r in rotations]
    return GaloisCoverModel(cover, group)


def random_galois_model(rng: random.Random) -> GaloisCoverModel:
    kind = rng.randrange(3)
    if kind == 0:
        return cyclic_voltage_model(
            rng.randint(2, 5), rng.randint(1, 3), rng.randint(0, 2), rng
        )
    if kind == 1:
        return ramified_cyclic_star(rng.randint(2, 5), rng.randint(1, 3))
    return dihedral_necklace(rng.randint(1, 4), rng.random() < 0.5)


# -- ultrametric data ----------------------------------------------------------


def random_ultrametric_set(
    rng: random.Random, n_points: int | None = None
) -> UltrametricPointSet:
    """A random point set built from a random dendrogram, so the strong
    triangle law holds by construction."""
    n = n_points if n_points is not None else rng.randint(2, 8)
    labels = [f"a{i}" for i in range(n)]
    vals: dict[tuple[str, str], Fraction] = {}

    def split(group: list[str], level: Fraction) -> None:
        if len(group) == 1:
            return
        k = rng.randint(2, len(group))
        order = list(group)
        rng.shuffle(order)
        parts = [[x] for x in order[:k]]
        for x in order[k:]:
            parts[rng.randrange(k)].append(x)
        for i, p1 in enumerate(parts):
            for p2 in parts[i + 1:]:
                for x in p1:
                    for y in p2:
                        vals[(min(x, y), max(x, y))] = level
        for p in parts:
            split(p, level + Fraction(rng.randint(1, 6), rng.choice([1, 2, 3, 4])))

    split(labels, Fraction(rng.randint(-3, 3)))
    return UltrametricPointSet(labels, vals)


def random_factored_polynomial(
    rng: random.Random, points: UltrametricPointSet
) -> FactoredPolynomial:
    n_roots = rng.randint(1, len(points.labels))
    chosen = rng.sample(list(points.labels), n_roots)
    roots = [(label, rng.randint(1, 3)) for label in sorted(chosen)]
    lead = Fraction(rng.randint(-4, 4), rng.choice([1, 2]))
    return FactoredPolynomial(points, lead, roots)


@dataclass(frozen=True)
class TnOracleInput:
    """Valuation data of the fibers of a power map, ready for the oracle."""

    points: UltrametricPointSet
    fibers: tuple[Fiber, ...]
    base: Fraction
    residue_char: int
    insep_degrees: dict[str, int] | None
    wild_orders: dict[str, int] | None


def tn_oracle_input(rng: random.Random, wild: bool = False) -> TnOracleInput:
    """Fibers of the n-th power map over 0 and over k nonzero values.

    The fiber over 0 is one point of multiplicity n; the fiber over a value
    of valuation s consists of n simple roots at distance s/n from 0.  In
    the tame case (residue characteristic 0 or above every local degree) the
    n roots of one fiber are pairwise at distance s/n as well; in the wild
    cubic case (n = 3 in residue characteristic 3) they hug closer, at
    s/3 + 1/2, which inserts an extra, inseparable vertex per fiber.
    """
    if wild:
        n, p = 3, 3
        k = rng.randint(1, 3)
    else:
        n = rng.randint(2, 6)
        p = rng.choice([0, 0, 7, 11, 13])
        k = rng.randint(1, 4)
    den = rng.choice([1, 2, 3])
    svals = [Fraction(numer, den) for numer in sorted(rng.sample(range(1, 19), k))]

    labels = ["a0"] + [f"b{i}_{j}" for i in range(1, k + 1) for j in range(n)]
    vals: dict[tuple[str, str], Fraction] = {}

    def put(x: str, y: str, v: Fraction) -> None:
        vals[(min(x, y), max(x, y))] = v

    for i in range(1, k + 1):
        s = svals[i - 1]
        inner = s / n + Fraction(1, 2) if wild else s / n
        for j in range(n):
            put("a0", f"b{i}_{j}", s / n)
            for j2 in range(j + 1, n):
                put(f"b{i}_{j}", f"b{i}_{j2}", inner)
        for i2 in range(i + 1, k + 1):
            cross = min(s, svals[i2 - 1]) / n
            for j in range(n):
                for j2 in range(n):
                    put(f"b{i}_{j}", f"b{i2}_{j2}", cross)
    points = UltrametricPointSet(labels, vals)

    fibers = [Fiber("y0", Fraction(0), (("a0", n),))]
    for i in range(1, k + 1):
        fibers.append(Fiber(
            f"y{i}", Fraction(0), tuple((f"b{i}_{j}", 1) for j in range(n))
        ))

    top_join = min(svals) / n
    base = rng.choice([Fraction(0), top_join, top_join - rng.randint(1, 2)])
    if base > top_join:
        base = top_join

    insep = None
    wild_orders = None
    if wild:
        insep = {f"eta(a0,{format_scalar(base)})": 3}
        for s in svals:
            insep[f"eta(a0,{format_scalar(s / 3)})"] = 3
        for i, s in enumerate(svals, start=1):
            insep[f"eta(b{i}_0,{format_scalar(s / 3 + Fraction(1, 2))})"] = 3
        wild_orders = {"pt(a0)": 2, "pt(inf)": 2}
    return TnOracleInput(points, tuple(fibers), base, p, insep, wild_orders)
