"""Retraction flows, path lifting, and the compatible-skeleton algorithm.

A :class:`RetractionFlow` singles out a connected core subgraph onto which the
whole graph deformation-retracts: every complement component must be a tree
hanging off the core by exactly one edge, so each point has a unique geodesic
into the core.  On top of that this module provides unique-path computation
(:func:`retraction_path`), lifting of target paths through a cover
(:func:`lift_path`), detection of forward branching points, and the
core-enlargement algorithm :func:`compatible_skeleton` which grows a target
core until its preimage is connected and all forward branching disappears.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction

from .cover import DecoratedCover
from .errors import DomainError, InconsistencyError, StructuralError
from .metric_graph import (
    Germ,
    GraphPoint,
    InteriorPoint,
    MetricGraph,
    VertexPoint,
    point_sort_key,
)
from .rationals import INF, Scalar, is_inf


@dataclass(frozen=True)
class PathSegment:
    """One traversed stretch of a single edge.

    ``toward`` is the index of the edge end the motion heads toward, and
    ``length`` is the distance traveled (infinite exactly when the segment
    runs out to a puncture or in from one).
    """

    edge: str
    toward: int
    length: Scalar


@dataclass(frozen=True)
class Path:
    """A concatenation of edge segments between consecutive points.

    ``points`` has one more entry than ``segments``; segment ``i`` runs from
    ``points[i]`` to ``points[i + 1]``.  A trivial path has a single point
    and no segments.
    """

    points: tuple[GraphPoint, ...]
    segments: tuple[PathSegment, ...]

    @property
    def start(self) -> GraphPoint:
        return self.points[0]

    @property
    def end(self) -> GraphPoint:
        return self.points[-1]

    @property
    def length(self) -> Scalar:
        total = Fraction(0)
        for s in self.segments:
            if is_inf(s.length):
                return INF
            total += s.length
        return total

    def is_trivial(self) -> bool:
        return not self.segments


def segment_departure_germ(point: GraphPoint, seg: PathSegment) -> Germ:
    """The germ at a segment's start point along the segment."""
    if isinstance(point, VertexPoint):
        return Germ(point, seg.edge, 1 - seg.toward)
    return Germ(point, seg.edge, seg.toward)


def segment_arrival_germ(point: GraphPoint, seg: PathSegment) -> Germ:
    """The germ at a segment's end point looking back along the segment."""
    if isinstance(point, VertexPoint):
        return Germ(point, seg.edge, seg.toward)
    return Germ(point, seg.edge, 1 - seg.toward)


def arrival_germ(path: Path) -> Germ | None:
    """The germ at the path's endpoint containing its final stretch."""
    if path.is_trivial():
        return None
    return segment_arrival_germ(path.points[-1], path.segments[-1])


class RetractionFlow:
    """A graph together with a core subgraph it deformation-retracts onto."""

    def __init__(self, ambient: MetricGraph, core_vertices, core_edges):
        self.ambient = ambient
        cv = frozenset(core_vertices)
        ce = frozenset(core_edges)
        for v in cv:
            ambient.vertex(v)
        for e in ce:
            ambient.edge(e)
        if not cv:
            raise StructuralError("core must contain at least one vertex")
        for eid in sorted(ce):
            e = ambient.edges[eid]
            if e.v0 not in cv or e.v1 not in cv:
                raise StructuralError(f"core edge {eid!r} has an endpoint outside the core")

        comp = {v: v for v in ambient.vertices}

        def find(v: str) -> str:
            while comp[v] != v:
                comp[v] = comp[comp[v]]
                v = comp[v]
            return v

        def union(a: str, b: str) -> None:
            ra, rb = find(a), find(b)
            if ra != rb:
                comp[ra] = rb

        for eid in ce:
            e = ambient.edges[eid]
            union(e.v0, e.v1)
        if len({find(v) for v in cv}) != 1:
            raise StructuralError("core is not connected")

        internal: list[str] = []
        for eid in sorted(set(ambient.edges) - ce):
            e = ambient.edges[eid]
            if e.v0 in cv and e.v1 in cv:
                raise StructuralError(
                    f"edge {eid!r} joins two core vertices but is not a core edge"
                )
            if e.v0 not in cv and e.v1 not in cv:
                internal.append(eid)

        comp = {v: v for v in ambient.vertices if v not in cv}

        def cfind(v: str) -> str:
            while comp[v] != v:
                comp[v] = comp[comp[v]]
                v = comp[v]
            return v

        for eid in internal:
            e = ambient.edges[eid]
            ra, rb = cfind(e.v0), cfind(e.v1)
            if ra != rb:
                comp[ra] = rb

        members: dict[str, list[str]] = {}
        for v in comp:
            members.setdefault(cfind(v), []).append(v)
        attach: dict[str, list[tuple[str, str, str]]] = {r: [] for r in members}
        for eid in sorted(set(ambient.edges) - ce):
            e = ambient.edges[eid]
            if (e.v0 in cv) != (e.v1 in cv):
                inside = e.v1 if e.v0 in cv else e.v0
                outside = e.v0 if e.v0 in cv else e.v1
                attach[cfind(inside)].append((eid, outside, inside))
        n_internal = {r: 0 for r in members}
        for eid in internal:
            n_internal[cfind(ambient.edges[eid].v0)] += 1

        internal_set = set(internal)
        parent: dict[str, tuple[str, str]] = {}
        for root, verts in members.items():
            arms = attach[root]
            if len(arms) != 1:
                raise StructuralError(
                    f"complement component {{{', '.join(sorted(verts))}}} meets the "
                    f"core through {len(arms)} edges; a flow needs exactly one"
                )
            if n_internal[root] != len(verts) - 1:
                raise StructuralError(
                    f"complement component {{{', '.join(sorted(verts))}}} is not a tree"
                )
            a_edge, a_core, a_root = arms[0]
            parent[a_root] = (a_edge, a_core)
            queue = [a_root]
            while queue:
                v = queue.pop(0)
                for eid, end in ambient.edge_ends_at(v):
                    if eid not in internal_set:
                        continue
                    other = ambient.edges[eid].end(1 - end)
                    if other not in parent and other not in cv:
                        parent[other] = (eid, v)
                        queue.append(other)

        self.core_vertices = cv
        self.core_edges = ce
        self._parent = parent

    def contains(self, p: GraphPoint) -> bool:
        self.ambient.require_point(p)
        if isinstance(p, VertexPoint):
            return p.vertex in self.core_vertices
        return p.edge in self.core_edges

    def parent_step(self, vertex: str) -> tuple[str, str]:
        """For a non-core vertex: the first (edge, next vertex) toward the core."""
        if vertex in self.core_vertices:
            raise DomainError(f"vertex {vertex!r} is already in the core")
        return self._parent[vertex]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RetractionFlow):
            return NotImplemented
        return (
            self.ambient == other.ambient
            and self.core_vertices == other.core_vertices
            and self.core_edges == other.core_edges
        )

    def __repr__(self) -> str:
        return (
            f"RetractionFlow(core_vertices={sorted(self.core_vertices)}, "
            f"core_edges={sorted(self.core_edges)})"
        )


def bounded_core_flow(g: MetricGraph) -> RetractionFlow:
    """The flow onto the bounded part: all skeletal vertices and finite edges."""
    return RetractionFlow(g, g.skeletal_vertices(), g.finite_edges())


def forward_germ(flow: RetractionFlow, p: GraphPoint) -> Germ:
    """The germ at a non-core point in the direction of the core."""
    flow.ambient.require_point(p)
    if flow.contains(p):
        raise DomainError("point lies in the core; it has no forward direction")
    g = flow.ambient
    if isinstance(p, VertexPoint):
        eid, nxt = flow.parent_step(p.vertex)
        e = g.edges[eid]
        end = 0 if e.v0 == p.vertex else 1
        return Germ(p, eid, end)
    e = g.edges[p.edge]
    in0, in1 = e.v0 in flow.core_vertices, e.v1 in flow.core_vertices
    if in0 or in1:
        toward = 0 if in0 else 1
    elif flow.parent_step(e.v1) == (e.id, e.v0):
        toward = 0
    else:
        toward = 1
    return Germ(p, p.edge, toward)


def retraction_path(flow: RetractionFlow, p: GraphPoint) -> Path:
    """The unique geodesic from a point to the core (trivial if already there)."""
    g = flow.ambient
    g.require_point(p)
    if flow.contains(p):
        return Path((p,), ())
    points: list[GraphPoint] = [p]
    segments: list[PathSegment] = []
    if isinstance(p, InteriorPoint):
        u = forward_germ(flow, p)
        e = g.edges[p.edge]
        length = p.offset if u.end == 0 else e.length - p.offset
        segments.append(PathSegment(p.edge, u.end, length))
        points.append(VertexPoint(e.end(u.end)))
    while True:
        last = points[-1]
        assert isinstance(last, VertexPoint)
        if last.vertex in flow.core_vertices:
            break
        eid, nxt = flow.parent_step(last.vertex)
        e = g.edges[eid]
        toward = 0 if e.v0 == nxt else 1
        segments.append(PathSegment(eid, toward, e.length))
        points.append(VertexPoint(nxt))
    return Path(tuple(points), tuple(segments))


def _advance(g: MetricGraph, start: GraphPoint, eid: str, toward: int, dist: Scalar) -> GraphPoint:
    """The landing point after moving ``dist`` along an edge from ``start``."""
    e = g.edges[eid]
    if is_inf(dist):
        if not e.is_ray:
            raise InconsistencyError(f"infinite motion along finite edge {eid!r}")
        return VertexPoint(e.end(toward))
    if isinstance(start, VertexPoint):
        pos = Fraction(0) if toward == 1 else e.length
    else:
        pos = start.offset
    if is_inf(pos):
        raise InconsistencyError(f"finite motion from the infinite end of {eid!r}")
    new = pos + dist if toward == 1 else pos - dist
    if new == 0:
        return VertexPoint(e.v0)
    if not is_inf(e.length) and new == e.length:
        return VertexPoint(e.v1)
    if new < 0 or (not is_inf(e.length) and new > e.length):
        raise InconsistencyError(f"motion overruns edge {eid!r}")
    return InteriorPoint(eid, new)


def lift_path(c: DecoratedCover, path: Path, start: GraphPoint) -> list[Path]:
    """All lifts of a target path through the cover, starting at ``start``.

    Segment lengths divide by the ram of the traversed source edge.  Exactly
    one lift exists when no branching is met along the way; the list is
    sorted deterministically by the traversed edges.
    """
    c.require_valid()
    c.source.require_point(start)
    if c.point_image(start) != path.points[0]:
        raise DomainError("start point does not lie over the path's start")
    partials: list[tuple[tuple[GraphPoint, ...], tuple[PathSegment, ...]]] = [((start,), ())]
    for i, seg in enumerate(path.segments):
        dep = segment_departure_germ(path.points[i], seg)
        grown = []
        for pts, segs in partials:
            q = pts[-1]
            cands = [g for g in c.source.tangent_germs(q) if c.germ_image(g) == dep]
            if not cands:
                raise InconsistencyError(
                    f"no lift of segment {i} of the path exists at {q!r}"
                )
            for g0 in sorted(cands, key=lambda g: (g.edge, g.end)):
                length = seg.length if is_inf(seg.length) else seg.length / c.ram[g0.edge]
                toward = 1 - g0.end if isinstance(q, VertexPoint) else g0.end
                landing = _advance(c.source, q, g0.edge, toward, length)
                if c.point_image(landing) != path.points[i + 1]:
                    raise InconsistencyError(
                        f"lift of segment {i} lands at {landing!r}, "
                        f"not over {path.points[i + 1]!r}"
                    )
                grown.append((pts + (landing,), segs + (PathSegment(g0.edge, toward, length),)))
        partials = grown
    lifts = [Path(pts, segs) for pts, segs in partials]
    lifts.sort(key=lambda q: tuple((s.edge, s.toward) for s in q.segments))
    return lifts


def project_path(c: DecoratedCover, path: Path) -> Path:
    """The image of a source path under the cover (segment lengths scale by ram)."""
    points = tuple(c.point_image(p) for p in path.points)
    segments = []
    for i, seg in enumerate(path.segments):
        dep = segment_departure_germ(path.points[i], seg)
        img = c.germ_image(dep)
        toward = 1 - img.end if isinstance(points[i], VertexPoint) else img.end
        length = seg.length if is_inf(seg.length) else seg.length * c.ram[seg.edge]
        segments.append(PathSegment(img.edge, toward, length))
    return Path(points, tuple(segments))


def forward_branching_points(c: DecoratedCover, flow: RetractionFlow) -> list[str]:
    """Source vertices off the core preimage with several forward lifts.

    Branching only happens at vertices: along open edge interiors the cover
    is a homeomorphism onto its image, so the unique forward direction lifts
    uniquely there.
    """
    if flow.ambient != c.target:
        raise DomainError("flow does not live on the cover's target")
    c.require_valid()
    out = []
    for v in sorted(c.source.vertices):
        w = c.vertex_map[v]
        if w in flow.core_vertices:
            continue
        u = forward_germ(flow, VertexPoint(w))
        if c.lift_count(u, VertexPoint(v)) >= 2:
            out.append(v)
    return out


def preimage_flow(c: DecoratedCover, flow: RetractionFlow) -> RetractionFlow:
    """The flow on the source whose core is the full preimage of the target core."""
    if flow.ambient != c.target:
        raise DomainError("flow does not live on the cover's target")
    cv = {v for v in c.source.vertices if c.vertex_map[v] in flow.core_vertices}
    ce = {e for e in c.source.edges if c.edge_map[e] in flow.core_edges}
    return RetractionFlow(c.source, cv, ce)


def skeleton_vertex_conditions(
    c: DecoratedCover, target_flow: RetractionFlow, source_flow: RetractionFlow
) -> list[str]:
    """Violations of the three vertex-set conditions of a compatible pair.

    (1) the source vertex set is exactly the preimage of the target vertex
    set; (2) each core is a genuine subgraph spanned by its vertex set;
    (3) every point where at least three core branches meet is a core vertex.
    Returns an empty list when all three hold.
    """
    out: list[str] = []
    want = {v for v in c.source.vertices if c.vertex_map[v] in target_flow.core_vertices}
    if set(source_flow.core_vertices) != want:
        out.append(
            "source skeleton vertices are not exactly the preimage "
            "of the target skeleton vertices"
        )
    for flow, side in ((target_flow, "target"), (source_flow, "source")):
        for eid in sorted(flow.core_edges):
            e = flow.ambient.edges[eid]
            if e.v0 not in flow.core_vertices or e.v1 not in flow.core_vertices:
                out.append(f"{side} skeleton edge {eid!r} has an endpoint off the vertex set")
        for v in sorted(flow.ambient.vertices):
            k = sum(1 for eid, _ in flow.ambient.edge_ends_at(v) if eid in flow.core_edges)
            if k >= 3 and v not in flow.core_vertices:
                out.append(f"{side} branch point {v!r} is not a skeleton vertex")
    return out


@dataclass(frozen=True)
class CompatibleSkeletonResult:
    """Output of :func:`compatible_skeleton`: the enlarged target flow, the
    induced source flow on the full preimage, and the forward branching
    points eliminated along the way (in elimination order)."""

    target_flow: RetractionFlow
    source_flow: RetractionFlow
    eliminated: tuple[str, ...]


def _core_components(g: MetricGraph, cv: set[str], ce: set[str]) -> list[set[str]]:
    comp = {v: v for v in cv}

    def find(v: str) -> str:
        while comp[v] != v:
            comp[v] = comp[comp[v]]
            v = comp[v]
        return v

    for eid in ce:
        e = g.edges[eid]
        ra, rb = find(e.v0), find(e.v1)
        if ra != rb:
            comp[ra] = rb
    groups: dict[str, set[str]] = {}
    for v in cv:
        groups.setdefault(find(v), set()).add(v)
    return [groups[r] for r in sorted(groups, key=lambda r: min(groups[r]))]


def _connecting_geodesic(
    g: MetricGraph, components: list[set[str]]
) -> tuple[list[str], list[str]]:
    """A shortest path in the source between the component holding the
    smallest vertex id and the nearest vertex of any other component.

    Distance is lexicographic (number of infinite edges, total finite
    length); exact ties resolve toward the smallest vertex id.  Returns the
    path's vertices and edges.
    """
    start = min(components, key=min)
    others = set().union(*(comp for comp in components if comp is not start))
    dist: dict[str, tuple[int, Fraction]] = {v: (0, Fraction(0)) for v in start}
    prev: dict[str, tuple[str, str]] = {}
    heap = [((0, Fraction(0)), v) for v in sorted(start)]
    heapq.heapify(heap)
    done: set[str] = set()
    goal = None
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        if v in others:
            goal = v
            break
        for eid, end in sorted(g.edge_ends_at(v)):
            e = g.edges[eid]
            step = (1, Fraction(0)) if e.is_ray else (0, e.length)
            nd = (d[0] + step[0], d[1] + step[1])
            other = e.end(1 - end)
            if other not in dist or nd < dist[other]:
                dist[other] = nd
                prev[other] = (eid, v)
                heapq.heappush(heap, (nd, other))
    if goal is None:
        raise InconsistencyError("no geodesic between core components in a connected graph")
    vertices = [goal]
    edges = []
    v = goal
    while v not in start:
        eid, v = prev[v]
        edges.append(eid)
        vertices.append(v)
    vertices.reverse()
    edges.reverse()
    return vertices, edges


def compatible_skeleton(c: DecoratedCover, initial: RetractionFlow) -> CompatibleSkeletonResult:
    """Enlarge a target core until the cover retracts compatibly onto it.

    Alternates two moves until both stabilize: add the images of all forward
    branching points together with their retraction paths into the current
    core; and, while the core's preimage is disconnected, push forward a
    geodesic between two preimage components.  The core only grows and the
    graphs are finite, so this terminates.  Running the algorithm on its own
    output is a fixed point.
    """
    c.require_valid()
    if initial.ambient != c.target:
        raise DomainError("initial flow does not live on the cover's target")
    for x in sorted(c.source.punctures()):
        if c.puncture_ram[x] > 1:
            img = c.vertex_map[x]
            (ray, _), = c.target.edge_ends_at(img)
            if img not in initial.core_vertices or ray not in initial.core_edges:
                raise DomainError(
                    f"ramified puncture {x!r} maps to {img!r}; the initial core must "
                    f"contain that puncture and its ray"
                )

    cv = set(initial.core_vertices)
    ce = set(initial.core_edges)
    eliminated: list[str] = []
    while True:
        flow = RetractionFlow(c.target, cv, ce)
        fbps = forward_branching_points(c, flow)
        if fbps:
            for q in fbps:
                if q not in eliminated:
                    eliminated.append(q)
                path = retraction_path(flow, VertexPoint(c.vertex_map[q]))
                for pt in path.points:
                    assert isinstance(pt, VertexPoint)
                    cv.add(pt.vertex)
                for seg in path.segments:
                    ce.add(seg.edge)
            continue
        pcv = {v for v in c.source.vertices if c.vertex_map[v] in cv}
        pce = {e for e in c.source.edges if c.edge_map[e] in ce}
        components = _core_components(c.source, pcv, pce)
        if len(components) > 1:
            verts, edges = _connecting_geodesic(c.source, components)
            for v in verts:
                cv.add(c.vertex_map[v])
            for e in edges:
                ce.add(c.edge_map[e])
            continue
        break

    target_flow = RetractionFlow(c.target, cv, ce)
    source_flow = preimage_flow(c, target_flow)
    leftovers = forward_branching_points(c, target_flow)
    if leftovers:
        raise InconsistencyError(f"forward branching points survived enlargement: {leftovers}")
    conditions = skeleton_vertex_conditions(c, target_flow, source_flow)
    if conditions:
        raise InconsistencyError("; ".join(conditions))
    return CompatibleSkeletonResult(target_flow, source_flow, tuple(eliminated))
