"""Finite metric graphs with genus-decorated vertices.

A :class:`MetricGraph` is a connected multigraph (loops and parallel edges
allowed) whose edges carry exact positive rational lengths.  Infinite-length
edges are *rays*: each ray joins a skeletal vertex to a puncture vertex, and
punctures always have valence one and genus zero.  Rays are stored with the
skeletal endpoint first, so interior offsets are always finite and are
uniformly measured from an edge's first endpoint.

Points of the underlying metric space are either vertices
(:class:`VertexPoint`) or interior points of an edge (:class:`InteriorPoint`,
offset strictly between the endpoints).  A :class:`Germ` is a tangent
direction at a point: at a vertex it names an incident edge end (a loop
contributes both of its ends), at an interior point it names the edge end the
direction points toward.

Graphs are immutable after construction; all constructor invariants are
enforced eagerly and raise :class:`~skelcov.errors.StructuralError`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import DomainError, StructuralError
from .rationals import Scalar, format_scalar, is_inf


class VertexKind(str, Enum):
    SKELETAL = "skeletal"
    PUNCTURE = "puncture"


@dataclass(frozen=True)
class Vertex:
    id: str
    kind: VertexKind = VertexKind.SKELETAL
    genus: int = 0


@dataclass(frozen=True)
class Edge:
    id: str
    v0: str
    v1: str
    length: Scalar

    @property
    def is_ray(self) -> bool:
        return is_inf(self.length)

    @property
    def is_loop(self) -> bool:
        return self.v0 == self.v1

    def end(self, k: int) -> str:
        if k == 0:
            return self.v0
        if k == 1:
            return self.v1
        raise DomainError(f"edge end must be 0 or 1, got {k}")

    @property
    def ends(self) -> tuple[str, str]:
        return (self.v0, self.v1)


@dataclass(frozen=True)
class VertexPoint:
    vertex: str


@dataclass(frozen=True)
class InteriorPoint:
    edge: str
    offset: Fraction


GraphPoint = VertexPoint | InteriorPoint


@dataclass(frozen=True)
class Germ:
    """A tangent direction at a graph point.

    At a vertex, ``end`` is the incident end of ``edge`` (motion into the
    edge away from the vertex).  At an interior point, ``end`` is the edge
    end the direction points toward.
    """

    base: GraphPoint
    edge: str
    end: int


def point_sort_key(p: GraphPoint) -> tuple:
    """Deterministic ordering key for graph points (vertices first)."""
    if isinstance(p, VertexPoint):
        return (0, p.vertex, Fraction(0))
    return (1, p.edge, p.offset)


class MetricGraph:
    """A connected metric multigraph. See the module docstring for the model."""

    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[Edge]):
        vmap: dict[str, Vertex] = {}
        for v in vertices:
            if not isinstance(v.id, str) or not v.id:
                raise StructuralError(f"vertex id must be a nonempty string: {v!r}")
            if v.id in vmap:
                raise StructuralError(f"duplicate vertex id {v.id!r}")
            if not isinstance(v.genus, int) or isinstance(v.genus, bool) or v.genus < 0:
                raise StructuralError(f"vertex {v.id!r} genus must be a nonnegative integer")
            if not isinstance(v.kind, VertexKind):
                raise StructuralError(f"vertex {v.id!r} kind must be a VertexKind")
            if v.kind is VertexKind.PUNCTURE and v.genus != 0:
                raise StructuralError(f"puncture {v.id!r} must have genus 0")
            vmap[v.id] = v
        if not vmap:
            raise StructuralError("a metric graph needs at least one vertex")

        emap: dict[str, Edge] = {}
        for e in edges:
            if not isinstance(e.id, str) or not e.id:
                raise StructuralError(f"edge id must be a nonempty string: {e!r}")
            if e.id in emap:
                raise StructuralError(f"duplicate edge id {e.id!r}")
            for w in e.ends:
                if w not in vmap:
                    raise StructuralError(f"edge {e.id!r} endpoint {w!r} is not a vertex")
            if is_inf(e.length):
                kinds = (vmap[e.v0].kind, vmap[e.v1].kind)
                if sorted(k.value for k in kinds) != ["puncture", "skeletal"]:
                    raise StructuralError(
                        f"infinite edge {e.id!r} must join a skeletal vertex to a puncture"
                    )
                if kinds[0] is VertexKind.PUNCTURE:
                    e = Edge(e.id, e.v1, e.v0, e.length)  # skeletal endpoint first
            else:
                if not isinstance(e.length, Fraction) or e.length <= 0:
                    raise StructuralError(
                        f"edge {e.id!r} length must be a positive rational or inf"
                    )
            emap[e.id] = e

        self.vertices: dict[str, Vertex] = vmap
        self.edges: dict[str, Edge] = emap
        incidence: dict[str, list[tuple[str, int]]] = {v: [] for v in vmap}
        for eid in sorted(emap):
            e = emap[eid]
            incidence[e.v0].append((eid, 0))
            incidence[e.v1].append((eid, 1))
        for pairs in incidence.values():
            pairs.sort()
        self._incidence = incidence

        # Puncture shape: valence one and the unique incident edge is a ray.
        for vid, v in vmap.items():
            if v.kind is VertexKind.PUNCTURE:
                incident = self.edge_ends_at(vid)
                if len(incident) != 1 or not emap[incident[0][0]].is_ray:
                    raise StructuralError(
                        f"puncture {vid!r} must have exactly one incident edge, a ray"
                    )

        if self._component_count() != 1:
            raise StructuralError("graph is not connected")

    # -- basic accessors ----------------------------------------------------

    def vertex(self, vid: str) -> Vertex:
        try:
            return self.vertices[vid]
        except KeyError:
            raise DomainError(f"no vertex {vid!r}") from None

    def edge(self, eid: str) -> Edge:
        try:
            return self.edges[eid]
        except KeyError:
            raise DomainError(f"no edge {eid!r}") from None

    def edge_ends_at(self, vid: str) -> list[tuple[str, int]]:
        """All incident (edge id, end index) pairs at a vertex, sorted."""
        try:
            return list(self._incidence[vid])
        except KeyError:
            raise DomainError(f"no vertex {vid!r}") from None

    def valence(self, vid: str) -> int:
        self.vertex(vid)
        return len(self.edge_ends_at(vid))

    def skeletal_vertices(self) -> list[str]:
        return sorted(v for v, d in self.vertices.items() if d.kind is VertexKind.SKELETAL)

    def punctures(self) -> list[str]:
        return sorted(v for v, d in self.vertices.items() if d.kind is VertexKind.PUNCTURE)

    def finite_edges(self) -> list[str]:
        return sorted(e for e, d in self.edges.items() if not d.is_ray)

    def rays(self) -> list[str]:
        return sorted(e for e, d in self.edges.items() if d.is_ray)

    # -- points and germs ---------------------------------------------------

    def contains(self, p: GraphPoint) -> bool:
        if isinstance(p, VertexPoint):
            return p.vertex in self.vertices
        if isinstance(p, InteriorPoint):
            e = self.edges.get(p.edge)
            if e is None or not isinstance(p.offset, Fraction) or p.offset <= 0:
                return False
            return is_inf(e.length) or p.offset < e.length
        return False

    def require_point(self, p: GraphPoint) -> None:
        if not self.contains(p):
            raise DomainError(f"{p!r} is not a point of this graph")

    def interior_point(self, eid: str, offset: Fraction) -> InteriorPoint:
        p = InteriorPoint(eid, Fraction(offset))
        self.require_point(p)
        return p

    def tangent_germs(self, p: GraphPoint) -> list[Germ]:
        """All tangent directions at a point, in a deterministic order."""
        self.require_point(p)
        if isinstance(p, VertexPoint):
            return [Germ(p, eid, k) for eid, k in self.edge_ends_at(p.vertex)]
        return [Germ(p, p.edge, 0), Germ(p, p.edge, 1)]

    # -- global invariants --------------------------------------------------

    def _component_count(self) -> int:
        parent = {v: v for v in self.vertices}

        def find(a: str) -> str:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for e in self.edges.values():
            ra, rb = find(e.v0), find(e.v1)
            if ra != rb:
                parent[ra] = rb
        return len({find(v) for v in self.vertices})

    def genus(self) -> int:
        """First Betti number: |E| - |V| + number of components."""
        return len(self.edges) - len(self.vertices) + self._component_count()

    # -- surgery ------------------------------------------------------------

    def subdivide_at(self, p: InteriorPoint, vertex_id: str | None = None) -> "MetricGraph":
        """Split an edge at an interior point, inserting a skeletal vertex.

        The new vertex id defaults to ``"{edge}@{offset}"``; the two pieces
        are named ``"{edge}:0"`` (first-endpoint side) and ``"{edge}:1"``.
        Lengths add up to the original length; the infinite side of a ray
        stays infinite.  Returns a new graph; genus is unchanged.
        """
        self.require_point(p)
        if not isinstance(p, InteriorPoint):
            raise DomainError("subdivide_at needs an interior point")
        e = self.edges[p.edge]
        new_vid = vertex_id if vertex_id is not None else f"{e.id}@{format_scalar(p.offset)}"
        id0, id1 = f"{e.id}:0", f"{e.id}:1"
        for fresh in (new_vid, ):
            if fresh in self.vertices:
                raise DomainError(f"vertex id {fresh!r} already in use")
        for fresh in (id0, id1):
            if fresh in self.edges:
                raise DomainError(f"edge id {fresh!r} already in use")
        tail = e.length - p.offset if not is_inf(e.length) else e.length
        verts = list(self.vertices.values()) + [Vertex(new_vid, VertexKind.SKELETAL, 0)]
        edges = [d for d in self.edges.values() if d.id != e.id]
        edges.append(Edge(id0, e.v0, new_vid, p.offset))
        edges.append(Edge(id1, new_vid, e.v1, tail))
        return MetricGraph(verts, edges)

    # -- plumbing -----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MetricGraph):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def __iter__(self) -> Iterator[str]:
        return iter(self.vertices)

    def __repr__(self) -> str:
        return f"MetricGraph({len(self.vertices)} vertices, {len(self.edges)} edges)"
