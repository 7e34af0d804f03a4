"""Deck transformations and the fiber-count formulas of Galois covers.

A :class:`GaloisCoverModel` bundles a decorated cover with an extensionally
given group of source symmetries.  :func:`validate_galois` checks the whole
package — the maps are automorphisms, they form a group, they commute with
the cover, and they act transitively on vertex fibers and on germ fibers —
returning violations as data.  The remaining operations verify the exact
counting identities available for Galois covers: equal retraction class
sizes, fiber sizes ``n_p = deg/(r·ram)``, and constant germ lift counts
``l = deg/(n_p·ram)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .cover import DecoratedCover, Violation
from .errors import DomainError, InconsistencyError
from .genus_audit import AuditLine, AuditReport
from .metric_graph import (
    Germ,
    GraphPoint,
    InteriorPoint,
    MetricGraph,
    VertexKind,
    VertexPoint,
)
from .retraction import (
    Path,
    PathSegment,
    RetractionFlow,
    bounded_core_flow,
    preimage_flow,
    project_path,
    retraction_path,
)


class Automorphism:
    """A relabeling of a graph's vertices and edges.

    Whether it actually is a symmetry (bijective, incidence-, length- and
    decoration-preserving) is checked by :func:`validate_galois`, not here.
    A non-loop edge's orientation under the map is forced by the images of
    its endpoints; a loop maps onto a loop end-for-end.
    """

    def __init__(self, vertex_perm: Mapping[str, str], edge_perm: Mapping[str, str]):
        self.vertex_perm = dict(vertex_perm)
        self.edge_perm = dict(edge_perm)
        self._key = (
            tuple(sorted(self.vertex_perm.items())),
            tuple(sorted(self.edge_perm.items())),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Automorphism):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        moved = {v: w for v, w in sorted(self.vertex_perm.items()) if v != w}
        return f"Automorphism({moved or 'identity'})"

    def is_identity(self) -> bool:
        return all(v == w for v, w in self.vertex_perm.items()) and all(
            e == f for e, f in self.edge_perm.items()
        )

    def compose(self, other: Automorphism) -> Automorphism:
        """The map ``self after other``."""
        return Automorphism(
            {v: self.vertex_perm[w] for v, w in other.vertex_perm.items()},
            {e: self.edge_perm[f] for e, f in other.edge_perm.items()},
        )

    def flip(self, graph: MetricGraph, edge: str) -> bool:
        e = graph.edges[edge]
        f = graph.edges[self.edge_perm[edge]]
        im0 = self.vertex_perm[e.v0]
        return im0 == f.v1 and im0 != f.v0

    def point_image(self, graph: MetricGraph, p: GraphPoint) -> GraphPoint:
        if isinstance(p, VertexPoint):
            return VertexPoint(self.vertex_perm[p.vertex])
        f = graph.edges[self.edge_perm[p.edge]]
        offset = f.length - p.offset if self.flip(graph, p.edge) else p.offset
        return InteriorPoint(f.id, offset)

    def germ_image(self, graph: MetricGraph, g: Germ) -> Germ:
        return Germ(
            self.point_image(graph, g.base),
            self.edge_perm[g.edge],
            g.end ^ int(self.flip(graph, g.edge)),
        )

    def path_image(self, graph: MetricGraph, path: Path) -> Path:
        points = tuple(self.point_image(graph, p) for p in path.points)
        segments = tuple(
            PathSegment(
                self.edge_perm[s.edge],
                s.toward ^ int(self.flip(graph, s.edge)),
                s.length,
            )
            for s in path.segments
        )
        return Path(points, segments)


def identity_automorphism(g: MetricGraph) -> Automorphism:
    return Automorphism({v: v for v in g.vertices}, {e: e for e in g.edges})


class GaloisCoverModel:
    """A decorated cover together with a candidate deck group on its source."""

    def __init__(self, cover: DecoratedCover, group):
        self.cover = cover
        self.group = tuple(group)


def _structural_ok(m: GaloisCoverModel, s: Automorphism) -> bool:
    g = m.cover.source
    return (
        set(s.vertex_perm) == set(g.vertices)
        and set(s.vertex_perm.values()) == set(g.vertices)
        and set(s.edge_perm) == set(g.edges)
        and set(s.edge_perm.values()) == set(g.edges)
    )


def validate_galois(m: GaloisCoverModel) -> list[Violation]:
    """All defects of the model, as data: cover axioms first, then the
    group axioms, symmetry/decoration preservation, commutation with the
    cover, and transitivity on vertex and germ fibers."""
    out = list(m.cover.validate())
    c = m.cover
    src = c.source

    usable: list[Automorphism] = []
    for i, s in enumerate(m.group):
        if not _structural_ok(m, s):
            out.append(Violation(
                "galois-bijection", f"group[{i}]",
                "vertex or edge maps are not bijections of the source",
            ))
        else:
            usable.append(s)

    for s in usable:
        for vid in sorted(src.vertices):
            v, w = src.vertices[vid], src.vertices[s.vertex_perm[vid]]
            if v.kind is not w.kind or v.genus != w.genus:
                out.append(Violation(
                    "galois-symmetry", vid,
                    f"image vertex {w.id!r} has different kind or genus",
                ))
        for eid in sorted(src.edges):
            e, f = src.edges[eid], src.edges[s.edge_perm[eid]]
            if sorted((s.vertex_perm[e.v0], s.vertex_perm[e.v1])) != sorted(f.ends):
                out.append(Violation(
                    "galois-symmetry", eid,
                    f"endpoint images do not match the ends of {f.id!r}",
                ))
            elif e.length != f.length:
                out.append(Violation(
                    "galois-symmetry", eid,
                    f"length {e.length} maps onto length {f.length}",
                ))

    if not any(s.is_identity() for s in usable):
        out.append(Violation("galois-identity", "*", "the identity is not in the group"))
    keys = {s._key for s in usable}
    for s in usable:
        for t in usable:
            if s.compose(t)._key not in keys:
                out.append(Violation(
                    "galois-closure", "*",
                    f"composite of {s!r} and {t!r} is not in the group",
                ))

    for s in usable:
        for vid in sorted(src.vertices):
            img = s.vertex_perm[vid]
            for table, label in (
                (c.local_degree, "local_degree"),
                (c.insep_degree, "insep_degree"),
                (c.sep_degree, "sep_degree"),
                (c.ram_div_degree, "ram_div_degree"),
            ):
                if table[vid] != table[img]:
                    out.append(Violation(
                        "galois-decoration", vid,
                        f"{label} changes from {table[vid]} to {table[img]}",
                    ))
            if c.vertex_map[vid] != c.vertex_map[img]:
                out.append(Violation(
                    "galois-commutation", vid,
                    f"vertex moves off its fiber: {c.vertex_map[vid]!r} != "
                    f"{c.vertex_map[img]!r}",
                ))
        for x in sorted(src.punctures()):
            # .get: the image may fail to be a puncture at all, which the
            # kind check above already reports
            if c.puncture_ram[x] != c.puncture_ram.get(s.vertex_perm[x]):
                out.append(Violation(
                    "galois-decoration", x,
                    "puncture ram changes along the orbit",
                ))
        for eid in sorted(src.edges):
            img = s.edge_perm[eid]
            if c.ram[eid] != c.ram[img]:
                out.append(Violation(
                    "galois-decoration", eid,
                    f"ram changes from {c.ram[eid]} to {c.ram[img]}",
                ))
            if c.edge_map[eid] != c.edge_map[img]:
                out.append(Violation(
                    "galois-commutation", eid,
                    f"edge moves off its fiber: {c.edge_map[eid]!r} != "
                    f"{c.edge_map[img]!r}",
                ))
            elif c.end_image(eid, 0) != c.end_image(img, int(s.flip(src, eid))):
                out.append(Violation(
                    "galois-commutation", eid,
                    "edge orientation does not commute with the cover",
                ))

    if not out:
        fibers: dict[str, list[str]] = {}
        for v in sorted(src.vertices):
            fibers.setdefault(c.vertex_map[v], []).append(v)
        for w, fiber in sorted(fibers.items()):
            orbit = {s.vertex_perm[fiber[0]] for s in usable}
            if orbit != set(fiber):
                out.append(Violation(
                    "galois-transitivity", w,
                    f"group orbit {sorted(orbit)} is not the whole fiber {fiber}",
                ))
        for w in sorted(c.target.vertices):
            for u in c.target.tangent_germs(VertexPoint(w)):
                lifts = [
                    g
                    for v in fibers.get(w, ())
                    for g in src.tangent_germs(VertexPoint(v))
                    if c.germ_image(g) == u
                ]
                if not lifts:
                    continue
                orbit = {s.germ_image(src, lifts[0]) for s in usable}
                if orbit != set(lifts):
                    out.append(Violation(
                        "galois-transitivity", w,
                        f"germ fiber over ({u.edge!r}, end {u.end}) is not one orbit",
                    ))
    return out


def require_galois(m: GaloisCoverModel) -> None:
    bad = validate_galois(m)
    if bad:
        head = "; ".join(str(v) for v in bad[:3])
        more = f" (+{len(bad) - 3} more)" if len(bad) > 3 else ""
        raise InconsistencyError(f"not a Galois model: {head}{more}")


def verify_equivariance(
    m: GaloisCoverModel, source_flow: RetractionFlow, target_flow: RetractionFlow
) -> bool:
    """Whether every group element carries retraction paths to retraction
    paths: σ(path of q) must equal the path of σ(q) for every source vertex.
    The source flow must be the preimage of the target flow."""
    require_galois(m)
    if source_flow != preimage_flow(m.cover, target_flow):
        raise DomainError("source flow is not the preimage of the target flow")
    g = m.cover.source
    for s in m.group:
        for v in sorted(g.vertices):
            path = retraction_path(source_flow, VertexPoint(v))
            image = s.path_image(g, path)
            if image != retraction_path(source_flow, VertexPoint(s.vertex_perm[v])):
                return False
    return True


def retraction_class_size(
    m: GaloisCoverModel,
    source_puncture: str,
    target_vertex: str,
    flow: RetractionFlow | None = None,
) -> int:
    """Size of the class of punctures retracting through the same preimage
    of ``target_vertex`` as ``source_puncture``.

    The target vertex must lie on the retraction path of the puncture's
    image; the classes partition the fiber of that image puncture, and for a
    Galois cover they all have the same size — checked, and the common size
    returned.
    """
    c = m.cover
    c.require_valid()
    if c.source.vertex(source_puncture).kind is not VertexKind.PUNCTURE:
        raise DomainError(f"{source_puncture!r} is not a source puncture")
    if flow is None:
        flow = bounded_core_flow(c.target)
    if flow.ambient != c.target:
        raise DomainError("flow does not live on the cover's target")
    x = c.vertex_map[source_puncture]
    target_path = retraction_path(flow, VertexPoint(x))
    index = None
    for j, pt in enumerate(target_path.points):
        if pt == VertexPoint(target_vertex):
            index = j
            break
    if index is None:
        raise DomainError(
            f"{target_vertex!r} is not on the retraction path of {x!r}"
        )
    source_flow = preimage_flow(c, flow)
    anchors: dict[str, list[str]] = {}
    for x2 in sorted(c.source.punctures()):
        if c.vertex_map[x2] != x:
            continue
        path = retraction_path(source_flow, VertexPoint(x2))
        if project_path(c, path) != target_path:
            raise InconsistencyError(
                f"retraction path of {x2!r} does not project onto the path of {x!r}"
            )
        anchor = path.points[index]
        assert isinstance(anchor, VertexPoint)
        anchors.setdefault(anchor.vertex, []).append(x2)
    sizes = {len(cls) for cls in anchors.values()}
    if len(sizes) != 1:
        detail = ", ".join(f"{a}:{len(cls)}" for a, cls in sorted(anchors.items()))
        raise InconsistencyError(
            f"retraction classes over {x!r} at {target_vertex!r} have unequal "
            f"sizes ({detail}); the cover is not Galois-symmetric"
        )
    return sizes.pop()


def n_p_check(
    m: GaloisCoverModel, target_vertex: str, flow: RetractionFlow | None = None
) -> AuditLine:
    """Fiber size against deg/(r·ram) through a witnessing puncture.

    The witness is the first target puncture (in sorted order) whose
    retraction path passes through the vertex; without one the line is
    marked not applicable.  The ram in the denominator is the common
    puncture ram of the witness's fiber (its constancy is checked).
    """
    c = m.cover
    c.require_valid()
    c.target.vertex(target_vertex)
    if flow is None:
        flow = bounded_core_flow(c.target)
    name = f"n-p[{target_vertex}]"
    witness = None
    for x in sorted(c.target.punctures()):
        path = retraction_path(flow, VertexPoint(x))
        if any(pt == VertexPoint(target_vertex) for pt in path.points):
            witness = x
            break
    if witness is None:
        return AuditLine(
            name, 0, 0, 0, passed=True, applicable=False,
            note="no puncture retracts through this vertex",
        )
    fiber_punctures = sorted(
        x2 for x2 in c.source.punctures() if c.vertex_map[x2] == witness
    )
    rams = {c.puncture_ram[x2] for x2 in fiber_punctures}
    if len(rams) != 1:
        raise InconsistencyError(
            f"puncture ram is not constant over the fiber of {witness!r}"
        )
    ram_x = rams.pop()
    r = retraction_class_size(m, fiber_punctures[0], target_vertex, flow)
    d = c.global_degree()
    n_p = len(c.fiber(VertexPoint(target_vertex)))
    rhs = Fraction(d, r * ram_x)
    form = f"deg/(r*ram) = {d}/({r}*{ram_x})"
    if ram_x == 1:
        form += f" = {d}/{r}"
    return AuditLine(
        name, n_p, rhs, n_p - rhs, passed=n_p == rhs,
        note=f"witness puncture {witness!r}; {form}",
    )


def germ_lift_audit(m: GaloisCoverModel, target_germ: Germ) -> list[AuditLine]:
    """Constancy of the lift count over the fiber and the count formula.

    All lifts of the germ must carry one common ram (a Galois cover cannot
    mix expansion factors over one direction); unequal rams raise.  Returns
    the constancy line and the ``l = deg/(n_p·ram)`` line.
    """
    c = m.cover
    c.require_valid()
    if not isinstance(target_germ.base, VertexPoint):
        raise DomainError("the germ must sit at a target vertex")
    p = target_germ.base.vertex
    c.target.vertex(p)
    fiber = c.fiber(VertexPoint(p))
    if not fiber:
        raise DomainError(f"target vertex {p!r} has an empty fiber")
    counts = {}
    rams = set()
    for q in fiber:
        assert isinstance(q, VertexPoint)
        lifts = c.germ_lifts(target_germ, q)
        counts[q.vertex] = len(lifts)
        rams.update(c.ram[g.edge] for g in lifts)
    if len(rams) > 1:
        raise InconsistencyError(
            f"lifts of the germ along {target_germ.edge!r} carry unequal rams "
            f"{sorted(rams)}; the cover is not Galois-symmetric"
        )
    tag = f"{target_germ.edge},{target_germ.end}"
    lo, hi = min(counts.values()), max(counts.values())
    constancy = AuditLine(
        f"lift-count-constancy[{tag}]",
        lo,
        hi,
        hi - lo,
        passed=lo == hi,
        note=", ".join(f"{v}:{k}" for v, k in sorted(counts.items())),
    )
    ram_e = rams.pop()
    d = c.global_degree()
    n_p = len(fiber)
    common = counts[min(counts)]
    rhs = Fraction(d, n_p * ram_e)
    formula = AuditLine(
        f"lift-count-formula[{tag}]",
        common,
        rhs,
        common - rhs,
        passed=common == rhs,
        note=f"deg/(n_p*ram) = {d}/({n_p}*{ram_e})",
    )
    return [constancy, formula]


def galois_audit(m: GaloisCoverModel, flow: RetractionFlow | None = None) -> AuditReport:
    """All counting audits of a validated Galois model in one report:
    per-vertex degree counting deg = n_p·local_degree, the fiber-size
    formula at every skeletal target vertex, both germ-lift lines for every
    target germ, and path equivariance for the given (default bounded-core)
    flow."""
    require_galois(m)
    c = m.cover
    if flow is None:
        flow = bounded_core_flow(c.target)
    lines: list[AuditLine] = []
    d = c.global_degree()
    for w in sorted(c.target.vertices):
        fiber = sorted(v for v in c.source.vertices if c.vertex_map[v] == w)
        n_p = len(fiber)
        rhs = n_p * c.local_degree[fiber[0]]
        ok = all(d == n_p * c.local_degree[v] for v in fiber)
        lines.append(AuditLine(
            f"degree-count[{w}]", d, rhs, d - rhs, passed=ok,
            note=f"n_p = {n_p}, local degrees {[c.local_degree[v] for v in fiber]}",
        ))
    for w in sorted(c.target.skeletal_vertices()):
        lines.append(n_p_check(m, w, flow))
    for w in sorted(c.target.skeletal_vertices()):
        for u in c.target.tangent_germs(VertexPoint(w)):
            lines.extend(germ_lift_audit(m, u))
    equivariant = verify_equivariance(m, preimage_flow(c, flow), flow)
    lines.append(AuditLine(
        "path-equivariance", int(equivariant), 1, int(equivariant) - 1,
        passed=equivariant,
        note="group elements map retraction paths onto retraction paths",
    ))
    return AuditReport(tuple(lines))
