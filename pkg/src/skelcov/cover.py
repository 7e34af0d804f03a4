"""Decorated covers of metric graphs.

A :class:`DecoratedCover` is a pair of metric graphs together with vertex and
edge maps and the numerical decorations of a finite morphism: edge expansion
factors (``ram``), local degrees at vertices, the inseparable/separable split
of each local degree, local ramification-divisor degrees, and ramification
indices at punctures.  Nothing about the decorations is assumed at
construction beyond structural totality; :meth:`DecoratedCover.validate`
checks the eight compatibility axioms and returns the violations as data.

Orientation convention: a source edge maps onto its image edge end-for-end
(first end to first end) unless the images of its endpoints force the
reverse.  When the image edge is a loop the endpoint images cannot force
anything, and the stored orientation of the source edge is taken as written;
orientation over loops is therefore genuine input data.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .divisor import Divisor
from .errors import DomainError, InconsistencyError, StructuralError
from .metric_graph import (
    Edge,
    Germ,
    GraphPoint,
    InteriorPoint,
    MetricGraph,
    Vertex,
    VertexKind,
    VertexPoint,
)
from .rationals import is_inf

AXIOMS = (
    "endpoint-compatibility",
    "length-law",
    "harmonicity",
    "fiber-degree",
    "insep-sep-split",
    "surjectivity",
    "kind-preservation",
    "puncture-ram",
)


@dataclass(frozen=True)
class Violation:
    """One failed axiom instance, attached to the offending vertex or edge."""

    axiom: str
    where: str
    detail: str

    def __str__(self) -> str:
        return f"{self.axiom} at {self.where}: {self.detail}"


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def _check_table(
    name: str, table: Mapping[str, int], domain: set[str], minimum: int
) -> dict[str, int]:
    got = set(table)
    if got != domain:
        missing = sorted(domain - got)
        extra = sorted(got - domain)
        raise StructuralError(f"{name}: missing keys {missing}, unexpected keys {extra}")
    for k, v in table.items():
        if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
            raise StructuralError(f"{name}[{k!r}] must be an integer >= {minimum}")
    return dict(table)


class DecoratedCover:
    """A decorated finite morphism between two metric graphs."""

    def __init__(
        self,
        source: MetricGraph,
        target: MetricGraph,
        vertex_map: Mapping[str, str],
        edge_map: Mapping[str, str],
        ram: Mapping[str, int],
        local_degree: Mapping[str, int],
        insep_degree: Mapping[str, int] | None = None,
        sep_degree: Mapping[str, int] | None = None,
        residue_char: int = 0,
        ram_div_degree: Mapping[str, int] | None = None,
        puncture_ram: Mapping[str, int] | None = None,
    ):
        self.source = source
        self.target = target

        src_v = set(source.vertices)
        src_e = set(source.edges)
        vm = dict(vertex_map)
        em = dict(edge_map)
        if set(vm) != src_v:
            raise StructuralError("vertex_map must be defined on exactly the source vertices")
        if set(em) != src_e:
            raise StructuralError("edge_map must be defined on exactly the source edges")
        for v, w in vm.items():
            if w not in target.vertices:
                raise StructuralError(f"vertex_map[{v!r}] = {w!r} is not a target vertex")
        for e, f in em.items():
            if f not in target.edges:
                raise StructuralError(f"edge_map[{e!r}] = {f!r} is not a target edge")
        self.vertex_map = vm
        self.edge_map = em

        if not isinstance(residue_char, int) or residue_char < 0:
            raise StructuralError("residue_char must be 0 or a prime")
        if residue_char != 0 and not _is_prime(residue_char):
            raise StructuralError(f"residue_char {residue_char} is neither 0 nor prime")
        self.residue_char = residue_char

        self.ram = _check_table("ram", ram, src_e, 1)
        self.local_degree = _check_table("local_degree", local_degree, src_v, 1)
        self.insep_degree = _check_table(
            "insep_degree",
            insep_degree if insep_degree is not None else {v: 1 for v in src_v},
            src_v,
            1,
        )
        self.sep_degree = _check_table(
            "sep_degree",
            sep_degree if sep_degree is not None else dict(self.local_degree),
            src_v,
            1,
        )
        self.ram_div_degree = _check_table(
            "ram_div_degree",
            ram_div_degree if ram_div_degree is not None else {v: 0 for v in src_v},
            src_v,
            0,
        )
        punctures = set(source.punctures())
        if puncture_ram is None:
            derived = {}
            for x in punctures:
                (eid, _), = source.edge_ends_at(x)
                derived[x] = self.ram[eid]
            puncture_ram = derived
        self.puncture_ram = _check_table("puncture_ram", puncture_ram, punctures, 1)

        # Orientation of each source edge relative to its image: end k of e'
        # maps to end k ^ flip(e') of edge_map(e').
        flip: dict[str, bool] = {}
        for eid in src_e:
            e = source.edges[eid]
            f = target.edges[em[eid]]
            im0 = vm[e.v0]
            flip[eid] = im0 == f.v1 and im0 != f.v0
        self._flip = flip
        self._violations: list[Violation] | None = None

    # -- the induced map on points and germs ---------------------------------

    def end_image(self, source_edge: str, end: int) -> int:
        return end ^ int(self._flip[source_edge])

    def point_image(self, p: GraphPoint) -> GraphPoint:
        self.source.require_point(p)
        if isinstance(p, VertexPoint):
            return VertexPoint(self.vertex_map[p.vertex])
        e = self.source.edges[p.edge]
        f = self.target.edges[self.edge_map[p.edge]]
        r = self.ram[p.edge]
        t = r * p.offset
        if self._flip[p.edge]:
            t = f.length - t
        return InteriorPoint(f.id, t)

    def germ_image(self, g: Germ) -> Germ:
        base = self.point_image(g.base)
        return Germ(base, self.edge_map[g.edge], self.end_image(g.edge, g.end))

    def fiber(self, p: GraphPoint) -> list[GraphPoint]:
        """All preimages of a target point, sorted deterministically."""
        self.target.require_point(p)
        if isinstance(p, VertexPoint):
            return [
                VertexPoint(v) for v in sorted(self.source.vertices)
                if self.vertex_map[v] == p.vertex
            ]
        f = self.target.edges[p.edge]
        out = []
        for eid in sorted(self.source.edges):
            if self.edge_map[eid] != p.edge:
                continue
            r = self.ram[eid]
            t = f.length - p.offset if self._flip[eid] else p.offset
            out.append(InteriorPoint(eid, Fraction(t, r)))
        return out

    def germ_lifts(self, target_germ: Germ, source_point: GraphPoint) -> list[Germ]:
        """Germs at a point over ``target_germ.base`` that map to ``target_germ``."""
        self.target.require_point(target_germ.base)
        if self.point_image(source_point) != target_germ.base:
            raise DomainError("source point does not lie over the germ's base point")
        return [
            g for g in self.source.tangent_germs(source_point)
            if self.germ_image(g) == target_germ
        ]

    def lift_count(self, target_germ: Germ, source_point: GraphPoint) -> int:
        return len(self.germ_lifts(target_germ, source_point))

    # -- validation -----------------------------------------------------------

    def validate(self) -> list[Violation]:
        """Check the eight cover axioms; returns all violations (empty = valid)."""
        if self._violations is not None:
            return list(self._violations)
        out: list[Violation] = []
        src, tgt = self.source, self.target
        vm, em = self.vertex_map, self.edge_map

        for eid in sorted(src.edges):
            e = src.edges[eid]
            f = tgt.edges[em[eid]]
            if sorted((vm[e.v0], vm[e.v1])) != sorted(f.ends):
                out.append(Violation(
                    "endpoint-compatibility", eid,
                    f"endpoints map to {sorted((vm[e.v0], vm[e.v1]))}, "
                    f"image edge {f.id!r} has {sorted(f.ends)}",
                ))

        for eid in sorted(src.edges):
            e = src.edges[eid]
            f = tgt.edges[em[eid]]
            if is_inf(e.length) != is_inf(f.length):
                out.append(Violation(
                    "length-law", eid,
                    "finite edges must map to finite edges and rays to rays",
                ))
            elif not is_inf(e.length) and f.length != self.ram[eid] * e.length:
                out.append(Violation(
                    "length-law", eid,
                    f"ram {self.ram[eid]} * length {e.length} != image length {f.length}",
                ))

        for vid in sorted(src.vertices):
            p = VertexPoint(vid)
            want = self.local_degree[vid]
            for tg in tgt.tangent_germs(VertexPoint(vm[vid])):
                got = sum(
                    self.ram[g.edge] for g in src.tangent_germs(p)
                    if em[g.edge] == tg.edge and self.end_image(g.edge, g.end) == tg.end
                )
                if got != want:
                    out.append(Violation(
                        "harmonicity", vid,
                        f"germ sums over ({tg.edge!r}, end {tg.end}) give {got}, "
                        f"local degree is {want}",
                    ))

        fiber_deg: dict[str, int] = {w: 0 for w in tgt.vertices}
        for vid, w in vm.items():
            fiber_deg[w] += self.local_degree[vid]
        seen = {d for d in fiber_deg.values() if d > 0}
        if len(seen) > 1:
            detail = ", ".join(f"{w}:{fiber_deg[w]}" for w in sorted(fiber_deg))
            out.append(Violation("fiber-degree", "*", f"fiber degrees differ: {detail}"))

        for vid in sorted(src.vertices):
            n, s, d = self.insep_degree[vid], self.sep_degree[vid], self.local_degree[vid]
            if n * s != d:
                out.append(Violation(
                    "insep-sep-split", vid, f"insep {n} * sep {s} != local degree {d}"
                ))
            if self.residue_char == 0:
                if n != 1:
                    out.append(Violation(
                        "insep-sep-split", vid,
                        f"insep {n} must be 1 in residue characteristic 0",
                    ))
            else:
                m = n
                while m % self.residue_char == 0:
                    m //= self.residue_char
                if m != 1:
                    out.append(Violation(
                        "insep-sep-split", vid,
                        f"insep {n} is not a power of the residue characteristic "
                        f"{self.residue_char}",
                    ))

        unhit_v = sorted(set(tgt.vertices) - set(vm.values()))
        unhit_e = sorted(set(tgt.edges) - set(em.values()))
        for w in unhit_v:
            out.append(Violation("surjectivity", w, "target vertex has empty fiber"))
        for f in unhit_e:
            out.append(Violation("surjectivity", f, "target edge has empty fiber"))

        for vid in sorted(src.vertices):
            if src.vertices[vid].kind is not tgt.vertices[vm[vid]].kind:
                out.append(Violation(
                    "kind-preservation", vid,
                    f"{src.vertices[vid].kind.value} vertex maps to "
                    f"{tgt.vertices[vm[vid]].kind.value} vertex {vm[vid]!r}",
                ))

        for x in src.punctures():
            incident = src.edge_ends_at(x)
            if len(incident) != 1:
                out.append(Violation(
                    "puncture-ram", x, f"puncture has {len(incident)} incident edges"
                ))
                continue
            ray = incident[0][0]
            if self.puncture_ram[x] != self.ram[ray]:
                out.append(Violation(
                    "puncture-ram", x,
                    f"puncture_ram {self.puncture_ram[x]} != ram {self.ram[ray]} "
                    f"of its ray {ray!r}",
                ))

        self._violations = out
        return list(out)

    def is_valid(self) -> bool:
        return not self.validate()

    def require_valid(self) -> None:
        bad = self.validate()
        if bad:
            head = "; ".join(str(v) for v in bad[:3])
            more = f" (+{len(bad) - 3} more)" if len(bad) > 3 else ""
            raise InconsistencyError(f"cover is not valid: {head}{more}")

    # -- degree and the divisor w ----------------------------------------------

    def degree_over(self, target_vertex: str) -> int:
        self.target.vertex(target_vertex)
        return sum(
            self.local_degree[v] for v, w in self.vertex_map.items() if w == target_vertex
        )

    def global_degree(self) -> int:
        degrees = {w: self.degree_over(w) for w in self.target.vertices}
        values = set(degrees.values())
        if len(values) != 1:
            detail = ", ".join(f"{w}:{degrees[w]}" for w in sorted(degrees))
            raise InconsistencyError(f"fiber degrees are not constant: {detail}")
        return values.pop()

    def w_divisor(self) -> Divisor:
        """The divisor w on the target: at each vertex p, the total number of
        germ lifts over all tangent directions at p minus twice the fiber
        size.  Interior points always get two lifts per preimage, so w is
        supported on vertices; its degree is 2*genus(source) - 2.
        """
        self.require_valid()
        coeffs: dict[GraphPoint, int] = {}
        for w in self.target.vertices:
            p = VertexPoint(w)
            fib = self.fiber(p)
            total = 0
            for tg in self.target.tangent_germs(p):
                for q in fib:
                    total += self.lift_count(tg, q)
            coeffs[p] = total - 2 * len(fib)
        return Divisor(self.target, coeffs)

    # -- plumbing ---------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DecoratedCover):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.vertex_map == other.vertex_map
            and self.edge_map == other.edge_map
            and self.ram == other.ram
            and self.local_degree == other.local_degree
            and self.insep_degree == other.insep_degree
            and self.sep_degree == other.sep_degree
            and self.residue_char == other.residue_char
            and self.ram_div_degree == other.ram_div_degree
            and self.puncture_ram == other.puncture_ram
        )

    def __repr__(self) -> str:
        return f"DecoratedCover({self.source!r} -> {self.target!r})"


def identity_cover(g: MetricGraph, residue_char: int = 0) -> DecoratedCover:
    """The identity morphism on a graph, with all decorations trivial."""
    return DecoratedCover(
        source=g,
        target=g,
        vertex_map={v: v for v in g.vertices},
        edge_map={e: e for e in g.edges},
        ram={e: 1 for e in g.edges},
        local_degree={v: 1 for v in g.vertices},
        insep_degree={v: 1 for v in g.vertices},
        sep_degree={v: 1 for v in g.vertices},
        residue_char=residue_char,
        ram_div_degree={v: 0 for v in g.vertices},
        puncture_ram={x: 1 for x in g.punctures()},
    )


def compose(outer: DecoratedCover, inner: DecoratedCover) -> DecoratedCover:
    """The composite cover of ``inner`` (A -> B) followed by ``outer`` (B -> C).

    Decorations multiply (ram along edges, degrees at vertices); ram_div
    composes by the tower rule rd = rd_inner + sep_inner * rd_outer.  Source
    edges whose orientation data would be lost over an image loop are
    re-oriented in the returned cover's source graph, which changes nothing
    but the presentation.
    """
    if inner.target != outer.source:
        raise DomainError("covers do not compose: middle graphs differ")
    if inner.residue_char != outer.residue_char:
        raise DomainError("covers do not compose: residue characteristics differ")
    inner.require_valid()
    outer.require_valid()

    vm = {v: outer.vertex_map[inner.vertex_map[v]] for v in inner.source.vertices}
    em = {e: outer.edge_map[inner.edge_map[e]] for e in inner.source.edges}

    edges = []
    for eid in inner.source.edges:
        e = inner.source.edges[eid]
        true_flip = inner._flip[eid] ^ outer._flip[inner.edge_map[eid]]
        f = outer.target.edges[em[eid]]
        derived = vm[e.v0] == f.v1 and vm[e.v0] != f.v0
        if derived != true_flip:
            e = Edge(e.id, e.v1, e.v0, e.length)
        edges.append(e)
    src = MetricGraph(inner.source.vertices.values(), edges)

    mid_of = inner.vertex_map
    return DecoratedCover(
        source=src,
        target=outer.target,
        vertex_map=vm,
        edge_map=em,
        ram={
            e: inner.ram[e] * outer.ram[inner.edge_map[e]] for e in inner.source.edges
        },
        local_degree={
            v: inner.local_degree[v] * outer.local_degree[mid_of[v]]
            for v in inner.source.vertices
        },
        insep_degree={
            v: inner.insep_degree[v] * outer.insep_degree[mid_of[v]]
            for v in inner.source.vertices
        },
        sep_degree={
            v: inner.sep_degree[v] * outer.sep_degree[mid_of[v]]
            for v in inner.source.vertices
        },
        residue_char=inner.residue_char,
        ram_div_degree={
            v: inner.ram_div_degree[v]
            + inner.sep_degree[v] * outer.ram_div_degree[mid_of[v]]
            for v in inner.source.vertices
        },
        puncture_ram={
            x: inner.puncture_ram[x] * outer.puncture_ram[mid_of[x]]
            for x in inner.source.punctures()
        },
    )
