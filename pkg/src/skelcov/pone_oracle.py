"""Exact tree-of-balls arithmetic over the projective line.

A finite set of distinct points of a valued field is described purely by the
pairwise valuations ``v(a - b)`` (an :class:`UltrametricPointSet`).  Closed
balls ``{x : v(x - c) >= rho}`` are :class:`BallPoint` values, and a
polynomial given in factored form (:class:`FactoredPolynomial`) can be
evaluated on balls exactly:

* :func:`ball_valuation` — the minimal valuation the polynomial takes on the
  ball (lead valuation plus one clamped term per root);
* :func:`zeros_in_ball` — how many roots, with multiplicity, the closed ball
  contains, which is also the slope of the ball valuation in ``rho``.

:func:`ball_tree` turns a point set into its tree of closed balls: one
skeletal vertex per ball in the joint hierarchy down from a root ball of
radius ``rho0``, an edge of length ``rho2 - rho1`` between nested
consecutive balls, and an infinite ray from each minimal ball down to the
point itself (a puncture).

:func:`induced_cover` is the oracle proper: given fibers of a polynomial map
(the roots of ``f - y_i`` for several values ``y_i``), it computes the image
tree, enriches both trees until the map is simplicial, and emits a fully
decorated cover whose every number was derived by exact ball arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .cover import DecoratedCover
from .errors import AmbiguousTieError, DomainError, InconsistencyError
from .metric_graph import Edge, MetricGraph, Vertex, VertexKind
from .rationals import INF, Scalar, format_scalar, is_inf


class UltrametricPointSet:
    """Finitely many distinct points known only through pairwise valuations.

    ``valuations`` maps unordered label pairs (keys are normalized to
    ``(min, max)``) to finite rationals; every pair must be present, and the
    strong triangle law must hold: among the three valuations of any triple,
    the minimum is attained at least twice.
    """

    def __init__(
        self,
        labels: Iterable[str],
        valuations: Mapping[tuple[str, str], Scalar],
    ):
        self.labels = tuple(labels)
        if len(set(self.labels)) != len(self.labels):
            raise DomainError("point labels must be distinct")
        if not self.labels:
            raise DomainError("a point set needs at least one point")
        known = set(self.labels)
        table: dict[tuple[str, str], Fraction] = {}
        for (a, b), val in valuations.items():
            if a not in known or b not in known:
                raise DomainError(f"valuation key ({a!r}, {b!r}) uses unknown labels")
            if a == b:
                raise DomainError(f"diagonal valuation key for {a!r}; v(a-a) is implicit")
            if is_inf(val):
                raise DomainError(
                    f"v({a!r}-{b!r}) is infinite; the points must be distinct"
                )
            key = (min(a, b), max(a, b))
            val = Fraction(val)
            if key in table and table[key] != val:
                raise DomainError(f"conflicting valuations for pair {key!r}")
            table[key] = val
        for i, a in enumerate(self.labels):
            for b in self.labels[i + 1:]:
                if (min(a, b), max(a, b)) not in table:
                    raise DomainError(f"missing valuation for pair ({a!r}, {b!r})")
        self._table = table
        for i, a in enumerate(self.labels):
            for b in self.labels[i + 1:]:
                for c in self.labels:
                    if c in (a, b):
                        continue
                    vs = sorted((self.valuation(a, b), self.valuation(b, c),
                                 self.valuation(a, c)))
                    if vs[0] != vs[1]:
                        raise DomainError(
                            f"ultrametric law fails on ({a!r}, {b!r}, {c!r}): "
                            f"minimum valuation is attained only once"
                        )

    def valuation(self, a: str, b: str) -> Scalar:
        """v(a - b); infinite on the diagonal."""
        for x in (a, b):
            if x not in self._table_labels():
                raise DomainError(f"unknown point label {x!r}")
        if a == b:
            return INF
        return self._table[(min(a, b), max(a, b))]

    def _table_labels(self) -> tuple[str, ...]:
        return self.labels

    def _key(self) -> tuple:
        return (tuple(sorted(self.labels)), tuple(sorted(self._table.items())))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UltrametricPointSet):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return f"UltrametricPointSet({list(self.labels)!r})"


@dataclass(frozen=True)
class BallPoint:
    """The closed ball of radius ``rho`` around the point labeled ``center``."""

    center: str
    rho: Scalar


class FactoredPolynomial:
    """``lead * prod (T - root)^multiplicity`` with all roots in a point set."""

    def __init__(
        self,
        points: UltrametricPointSet,
        lead_val: Scalar,
        roots: Sequence[tuple[str, int]],
    ):
        self.points = points
        if is_inf(lead_val):
            raise DomainError("lead valuation must be finite")
        self.lead_val = Fraction(lead_val)
        seen = set()
        clean = []
        for label, mult in roots:
            if label not in points.labels:
                raise DomainError(f"root {label!r} is not a labeled point")
            if label in seen:
                raise DomainError(f"duplicate root {label!r}; merge multiplicities")
            if not isinstance(mult, int) or isinstance(mult, bool) or mult < 1:
                raise DomainError(f"multiplicity of {label!r} must be a positive integer")
            seen.add(label)
            clean.append((label, mult))
        self.roots = tuple(clean)

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.roots)

    def __repr__(self) -> str:
        return f"FactoredPolynomial(lead_val={self.lead_val}, roots={self.roots!r})"


def ball_valuation(f: FactoredPolynomial, ball: BallPoint) -> Scalar:
    """Minimal valuation of ``f`` on the closed ball: each root contributes
    its distance to the center clamped from above by the radius."""
    total: Scalar = f.lead_val
    for label, mult in f.roots:
        v = f.points.valuation(ball.center, label)
        term = ball.rho if is_inf(v) else (v if is_inf(ball.rho) else min(v, ball.rho))
        if is_inf(term):
            return INF
        total = total + mult * term
    return total


def zeros_in_ball(f: FactoredPolynomial, ball: BallPoint) -> int:
    """Number of roots (with multiplicity) in the closed ball; equals the
    growth rate of :func:`ball_valuation` in the radius just below it."""
    return sum(
        mult
        for label, mult in f.roots
        if f.points.valuation(ball.center, label) >= ball.rho
    )


def difference_valuation(v_ab: Scalar, v_bc: Scalar) -> Scalar:
    """v(a - c) from v(a - b) and v(b - c).

    The strong triangle rule determines the answer only when the inputs
    differ (it is then their minimum); on a tie the valuation is merely
    bounded below, so the tie is refused rather than guessed.
    """
    if v_ab == v_bc:
        raise AmbiguousTieError(
            f"both valuations equal {format_scalar(v_ab) if not is_inf(v_ab) else 'inf'};"
            " the difference valuation is only bounded below"
        )
    if is_inf(v_ab):
        return v_bc
    if is_inf(v_bc):
        return v_ab
    return min(v_ab, v_bc)


# -- the tree of balls -------------------------------------------------------


@dataclass(frozen=True)
class BallTree:
    """A point set's tree of balls.

    ``graph`` is the metric tree; ``ball`` maps each skeletal vertex id to
    the ball it stands for (canonical center), ``point_label`` maps each
    puncture id back to its point label, and ``root`` is the vertex of the
    outermost ball.
    """

    graph: MetricGraph
    ball: dict[str, BallPoint]
    point_label: dict[str, str]
    root: str


def _canonical_ball(points: UltrametricPointSet, ball: BallPoint) -> BallPoint:
    center = min(
        a for a in points.labels if points.valuation(a, ball.center) >= ball.rho
    )
    return BallPoint(center, ball.rho)


def _ball_id(ball: BallPoint) -> str:
    return f"eta({ball.center},{format_scalar(ball.rho)})"


def _join_balls(points: UltrametricPointSet, labels: Sequence[str]) -> set[BallPoint]:
    """Cluster balls of the hierarchy on ``labels`` (each of size >= 2)."""
    out: set[BallPoint] = set()
    stack = [tuple(sorted(labels))]
    while stack:
        group = stack.pop()
        if len(group) < 2:
            continue
        rho = min(
            points.valuation(a, b)
            for i, a in enumerate(group)
            for b in group[i + 1:]
        )
        out.add(_canonical_ball(points, BallPoint(group[0], rho)))
        classes: dict[str, list[str]] = {}
        for a in group:
            for rep in classes:
                if points.valuation(a, rep) > rho:
                    classes[rep].append(a)
                    break
            else:
                classes[a] = [a]
        for members in classes.values():
            if len(members) >= 2:
                stack.append(tuple(sorted(members)))
    return out


def _assemble(
    points: UltrametricPointSet, base: Scalar, balls: Iterable[BallPoint]
) -> BallTree:
    """Build the metric tree from a closed-under-joins family of balls.

    Each label's containing balls form a chain by nesting; consecutive links
    become finite edges (named ``arc(<child>)``) and the innermost ball gets
    an infinite ray to the puncture ``pt(<label>)``.
    """
    canon = {_canonical_ball(points, b) for b in balls}
    ids = {b: _ball_id(b) for b in canon}
    root_ball = _canonical_ball(points, BallPoint(min(points.labels), base))
    if root_ball not in canon:
        raise DomainError("the ball family does not include the root ball")
    vertices = [Vertex(ids[b], VertexKind.SKELETAL, 0) for b in sorted(ids, key=_ball_id)]
    edges: dict[str, Edge] = {}
    ball_of: dict[str, BallPoint] = {ids[b]: b for b in canon}
    point_label: dict[str, str] = {}
    for a in sorted(points.labels):
        chain = sorted(
            (b for b in canon if points.valuation(b.center, a) >= b.rho),
            key=lambda b: b.rho,
        )
        if not chain or chain[0] != root_ball:
            raise DomainError(f"point {a!r} is not in the root ball")
        for outer, inner in zip(chain, chain[1:]):
            eid = f"arc({ids[inner]})"
            edge = Edge(eid, ids[outer], ids[inner], inner.rho - outer.rho)
            if eid in edges and edges[eid] != edge:
                raise InconsistencyError(f"conflicting parents for ball {ids[inner]!r}")
            edges[eid] = edge
        pid = f"pt({a})"
        vertices.append(Vertex(pid, VertexKind.PUNCTURE, 0))
        point_label[pid] = a
        edges[f"arc({pid})"] = Edge(f"arc({pid})", ids[chain[-1]], pid, INF)
    graph = MetricGraph(vertices, edges.values())
    return BallTree(graph, ball_of, point_label, ids[root_ball])


def ball_tree(points: UltrametricPointSet, rho0: Scalar) -> BallTree:
    """Tree of balls of the point set inside the root ball of radius ``rho0``.

    The root radius may not exceed the first join (the largest radius at
    which all points still share one ball); when it is strictly smaller the
    root is a valence-one vertex below the first branch point.
    """
    if is_inf(rho0):
        raise DomainError("the root radius must be finite")
    rho0 = Fraction(rho0)
    if len(points.labels) >= 2:
        top = min(
            points.valuation(a, b)
            for i, a in enumerate(points.labels)
            for b in points.labels[i + 1:]
        )
        if rho0 > top:
            raise DomainError(
                f"root radius {format_scalar(rho0)} exceeds the first join "
                f"{format_scalar(top)}; no single ball of that radius contains "
                "all points"
            )
        balls = _join_balls(points, points.labels)
        balls.add(_canonical_ball(points, BallPoint(min(points.labels), rho0)))
    else:
        balls = {BallPoint(points.labels[0], rho0)}
    return _assemble(points, rho0, balls)


# -- the induced cover of trees ----------------------------------------------


@dataclass(frozen=True)
class Fiber:
    """The roots (with multiplicity) of ``f - y`` for one target value ``y``."""

    target_label: str
    lead_val: Scalar
    roots: tuple[tuple[str, int], ...]


def _depth(poly: FactoredPolynomial, label: str, rho: Scalar) -> Scalar:
    return ball_valuation(poly, BallPoint(label, rho))


def _invert_depth(poly: FactoredPolynomial, label: str, target: Fraction) -> Fraction:
    """The radius at which the depth function of ``label`` reaches ``target``.

    The depth is piecewise linear and strictly increasing in the radius, with
    kinks exactly at the distances from ``label`` to the other roots; the
    slope below a kink counts the roots at that distance or farther out.
    """
    kinks = sorted({
        Fraction(poly.points.valuation(label, b))
        for b, _ in poly.roots
        if b != label
    })

    def slope_above(k: Fraction) -> int:
        # Roots farther than k from the label still track the ball boundary.
        return sum(
            m for b, m in poly.roots
            if b == label or poly.points.valuation(label, b) > k
        )

    if not kinks:
        return Fraction(target - poly.lead_val, poly.degree)
    d_lo = _depth(poly, label, kinks[0])
    if target <= d_lo:
        return kinks[0] - Fraction(d_lo - target, poly.degree)
    for k1, k2 in zip(kinks, kinks[1:]):
        d2 = _depth(poly, label, k2)
        if target <= d2:
            return k2 - Fraction(d2 - target, slope_above(k1))
    return kinks[-1] + Fraction(
        target - _depth(poly, label, kinks[-1]), slope_above(kinks[-1])
    )


def induced_cover(
    points: UltrametricPointSet,
    fibers: Sequence[Fiber],
    base: Scalar,
    residue_char: int = 0,
    insep_degrees: Mapping[str, int] | None = None,
) -> DecoratedCover:
    """The decorated cover of ball trees induced by a polynomial map.

    ``fibers`` lists, for each of several target values, the roots of
    ``f - y`` (all fibers of one polynomial, so they must partition the
    labels of ``points``, share one degree and share one lead valuation).
    ``base`` is the root radius of the source tree.  Every decoration is
    computed by exact ball arithmetic and cross-checked; books that cannot
    balance raise :class:`~skelcov.errors.InconsistencyError`.

    Positive residue characteristic makes local degrees divisible by the
    characteristic inseparable in an amount the tree cannot see, so
    ``insep_degrees`` must then supply the inseparability degree of every
    such skeletal source vertex (by vertex id).
    """
    if not fibers:
        raise DomainError("at least one fiber is required")
    target_labels = [fb.target_label for fb in fibers]
    if len(set(target_labels)) != len(target_labels):
        raise DomainError("fiber target labels must be distinct")
    degrees = {sum(m for _, m in fb.roots) for fb in fibers}
    if len(degrees) != 1:
        raise DomainError(f"fibers have unequal degrees {sorted(degrees)}")
    d = degrees.pop()
    if d < 1:
        raise DomainError("fibers must be nonempty")
    leads = {Fraction(fb.lead_val) for fb in fibers}
    if len(leads) != 1:
        raise DomainError("fibers must share one lead valuation")
    lead = leads.pop()
    covered: dict[str, Fiber] = {}
    for fb in fibers:
        for label, _ in fb.roots:
            if label in covered:
                raise DomainError(f"label {label!r} appears in two fibers")
            covered[label] = fb
    if set(covered) != set(points.labels):
        missing = sorted(set(points.labels) - set(covered))
        raise DomainError(f"labels {missing} belong to no fiber")

    poly_of = {
        fb.target_label: FactoredPolynomial(points, fb.lead_val, fb.roots)
        for fb in fibers
    }
    fiber_of = {label: fb.target_label for label, fb in covered.items()}

    def depth(label: str, rho: Scalar) -> Scalar:
        return _depth(poly_of[fiber_of[label]], label, rho)

    # Pairwise target valuations via the product formula: v(y_i - y_j) is the
    # value of fiber j's polynomial at any root of fiber i.  Every root of
    # both fibers must tell the same story.
    tvals: dict[tuple[str, str], Fraction] = {}
    for i, fi in enumerate(fibers):
        for fj in fibers[i + 1:]:
            samples = set()
            for a, _ in fi.roots:
                samples.add(ball_valuation(poly_of[fj.target_label],
                                           BallPoint(a, INF)))
            for b, _ in fj.roots:
                samples.add(ball_valuation(poly_of[fi.target_label],
                                           BallPoint(b, INF)))
            if len(samples) != 1:
                raise InconsistencyError(
                    f"the valuation of {fi.target_label!r} - {fj.target_label!r} "
                    f"is not well defined: samples {sorted(samples)}"
                )
            val = samples.pop()
            if is_inf(val):
                raise InconsistencyError(
                    f"fibers {fi.target_label!r} and {fj.target_label!r} "
                    "collide: their difference has infinite valuation"
                )
            key = (min(fi.target_label, fj.target_label),
                   max(fi.target_label, fj.target_label))
            tvals[key] = Fraction(val)
    target_points = UltrametricPointSet(sorted(target_labels), tvals)

    base = Fraction(base)
    target_base = lead + d * base
    for a in points.labels:
        if depth(a, base) != target_base:
            raise InconsistencyError(
                f"the root ball is not mapped with one depth: point {a!r} "
                f"gives {depth(a, base)}, expected {format_scalar(target_base)}"
            )

    source_tree = ball_tree(points, base)
    source_balls = set(source_tree.ball.values())
    if len(target_labels) >= 2:
        target_balls = set(ball_tree(target_points, target_base).ball.values())
    else:
        target_balls = {BallPoint(target_labels[0], target_base)}

    def image_ball(b: BallPoint) -> BallPoint:
        depth_b = depth(b.center, b.rho)
        members = [
            a for a in points.labels if points.valuation(a, b.center) >= b.rho
        ]
        for a in members:
            if depth(a, b.rho) != depth_b:
                raise InconsistencyError(
                    f"ball {_ball_id(b)} has no single image: depths differ "
                    f"between {b.center!r} and {a!r}"
                )
            ya, yc = fiber_of[a], fiber_of[b.center]
            if ya != yc and target_points.valuation(ya, yc) < depth_b:
                raise InconsistencyError(
                    f"ball {_ball_id(b)} has no single image: centers "
                    f"{yc!r} and {ya!r} are farther apart than its depth"
                )
        return _canonical_ball(target_points, BallPoint(fiber_of[b.center], depth_b))

    # Enrichment round A: every source ball must have an image vertex.
    for b in sorted(source_balls, key=_ball_id):
        target_balls.add(image_ball(b))
    # Round B: every target ball must be hit simplicially, so cut each
    # point's ray at the radius whose depth matches each ball it maps into.
    target_balls = {_canonical_ball(target_points, b) for b in target_balls}
    for tb in sorted(target_balls, key=_ball_id):
        for a in sorted(points.labels):
            if target_points.valuation(fiber_of[a], tb.center) >= tb.rho:
                rho = _invert_depth(poly_of[fiber_of[a]], a, Fraction(tb.rho))
                if rho < base:
                    raise InconsistencyError(
                        f"cut for {_ball_id(tb)} at {a!r} lands outside the "
                        "root ball"
                    )
                source_balls.add(_canonical_ball(points, BallPoint(a, rho)))
    for b in sorted(source_balls, key=_ball_id):
        if image_ball(b) not in target_balls:
            raise InconsistencyError(
                f"enrichment did not close: image of {_ball_id(b)} is missing"
            )

    src_tree = _assemble(points, base, source_balls)
    tgt_tree = _assemble(target_points, target_base, target_balls)

    # Both trees get an infinite ray out of the root: the part of the line
    # outside the root ball, where the map is totally ramified of degree d.
    def with_top_ray(tree: BallTree) -> MetricGraph:
        verts = list(tree.graph.vertices.values())
        verts.append(Vertex("pt(inf)", VertexKind.PUNCTURE, 0))
        edges = list(tree.graph.edges.values())
        edges.append(Edge("arc(pt(inf))", tree.root, "pt(inf)", INF))
        return MetricGraph(verts, edges)

    source = with_top_ray(src_tree)
    target = with_top_ray(tgt_tree)

    vertex_map: dict[str, str] = {"pt(inf)": "pt(inf)"}
    for vid, b in src_tree.ball.items():
        vertex_map[vid] = _ball_id(image_ball(b))
    for pid, label in src_tree.point_label.items():
        vertex_map[pid] = f"pt({fiber_of[label]})"

    edge_map: dict[str, str] = {"arc(pt(inf))": "arc(pt(inf))"}
    ram: dict[str, int] = {"arc(pt(inf))": d}
    for eid in sorted(source.edges):
        if eid == "arc(pt(inf))":
            continue
        e = source.edges[eid]
        child = e.v1
        image_child = vertex_map[child]
        fid = f"arc({image_child})"
        if fid not in target.edges:
            raise InconsistencyError(
                f"image of edge {eid!r} has no target edge (child {image_child!r}"
                " would be a root)"
            )
        if target.edges[fid].v0 != vertex_map[e.v0]:
            raise InconsistencyError(
                f"edge {eid!r} does not map parent-to-parent onto {fid!r}"
            )
        edge_map[eid] = fid
        if e.is_ray:
            label = src_tree.point_label[child]
            ram[eid] = dict(poly_of[fiber_of[label]].roots)[label]
        else:
            b1, b2 = src_tree.ball[e.v0], src_tree.ball[e.v1]
            poly = poly_of[fiber_of[b2.center]]
            r = zeros_in_ball(poly, BallPoint(b2.center, b2.rho))
            slope_num = depth(b2.center, b2.rho) - depth(b2.center, b1.rho)
            if slope_num != r * (b2.rho - b1.rho):
                raise InconsistencyError(
                    f"expansion of edge {eid!r} is ambiguous: zero count {r} "
                    f"but depth slope {slope_num / (b2.rho - b1.rho)}"
                )
            ram[eid] = r

    local_degree: dict[str, int] = {}
    for pid, label in src_tree.point_label.items():
        local_degree[pid] = dict(poly_of[fiber_of[label]].roots)[label]
    local_degree["pt(inf)"] = d
    for vid in sorted(src_tree.ball):
        per_image: dict[str, int] = {}
        for eid, _ in source.edge_ends_at(vid):
            per_image[edge_map[eid]] = per_image.get(edge_map[eid], 0) + ram[eid]
        image_arcs = {fid for fid, _ in target.edge_ends_at(vertex_map[vid])}
        if set(per_image) - image_arcs:
            raise InconsistencyError(
                f"vertex {vid!r} sends germs off its image's directions"
            )
        degrees = set(per_image.values())
        if len(degrees) != 1:
            raise InconsistencyError(
                f"vertex {vid!r} has no single local degree: direction sums "
                f"{sorted(per_image.items())}"
            )
        local_degree[vid] = degrees.pop()

    insep: dict[str, int] = {v: 1 for v in source.vertices}
    needed = sorted(
        vid
        for vid in src_tree.ball
        if residue_char > 0 and local_degree[vid] % residue_char == 0
    )
    given = dict(insep_degrees or {})
    missing = [v for v in needed if v not in given]
    if missing:
        raise DomainError(
            "residue characteristic divides the local degree at "
            f"{missing}; supply insep_degrees for these vertices"
        )
    for vid, value in given.items():
        if vid not in source.vertices:
            raise DomainError(f"insep_degrees names unknown vertex {vid!r}")
        if vid not in needed and value != 1:
            raise DomainError(
                f"vertex {vid!r} has local degree prime to the residue "
                "characteristic; its inseparability degree must be 1"
            )
        insep[vid] = value
    sep = {v: local_degree[v] // insep[v] for v in source.vertices}
    rd = {
        v: 2 * (sep[v] - 1) if source.vertices[v].kind is VertexKind.SKELETAL else 0
        for v in source.vertices
    }
    puncture_ram = {pid: local_degree[pid] for pid in source.punctures()}

    cover = DecoratedCover(
        source,
        target,
        vertex_map,
        edge_map,
        ram,
        local_degree,
        insep_degree=insep,
        sep_degree=sep,
        residue_char=residue_char,
        ram_div_degree=rd,
        puncture_ram=puncture_ram,
    )
    bad = cover.validate()
    if bad:
        head = "; ".join(str(v) for v in bad[:3])
        raise InconsistencyError(f"induced cover fails its own axioms: {head}")
    return cover
