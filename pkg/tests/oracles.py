"""Independent oracles used to cross-check the library.

Everything here recomputes quantities from first principles using only the
raw public data of the objects (vertex/edge dicts, decoration tables) —
never the library's own derived methods — so that agreement between the two
is meaningful evidence.
"""

from __future__ import annotations

from fractions import Fraction

from skelcov.cover import DecoratedCover
from skelcov.metric_graph import MetricGraph, VertexKind
from skelcov.pone_oracle import FactoredPolynomial, UltrametricPointSet
from skelcov.rationals import INF, Scalar, is_inf


# -- graph invariants ---------------------------------------------------------


def oracle_components(g: MetricGraph) -> int:
    """Connected components via a hand-rolled union-find on raw dicts."""
    parent = {v: v for v in g.vertices}

    def find(v: str) -> str:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in g.edges.values():
        ra, rb = find(e.v0), find(e.v1)
        if ra != rb:
            parent[ra] = rb
    return len({find(v) for v in g.vertices})


def oracle_genus(g: MetricGraph) -> int:
    """First Betti number = |E| - |V| + #components."""
    return len(g.edges) - len(g.vertices) + oracle_components(g)


def oracle_total_genus(g: MetricGraph) -> int:
    return oracle_genus(g) + sum(v.genus for v in g.vertices.values())


def oracle_valence(g: MetricGraph, vid: str) -> int:
    """Edge-end count at a vertex straight off the edge table (loops twice)."""
    return sum((e.v0 == vid) + (e.v1 == vid) for e in g.edges.values())


# -- the divisor w, via the pushforward route ---------------------------------


def oracle_w(c: DecoratedCover) -> dict[str, int]:
    """w as the pushforward of the source's canonical graph divisor.

    The library computes w at each target vertex by germ-lift counting;
    this oracle instead sums (valence - 2) over each fiber, which is the
    other side of the identity under test.  (The canonical graph divisor
    sees only the metric graph, never the genus decorations; its degree is
    2*betti - 2.)  Zero coefficients are dropped to ease comparison with
    Divisor.support().
    """
    out: dict[str, int] = {}
    for vid in c.source.vertices:
        coeff = oracle_valence(c.source, vid) - 2
        image = c.vertex_map[vid]
        out[image] = out.get(image, 0) + coeff
    return {k: n for k, n in out.items() if n != 0}


# -- germ-lift counting by brute enumeration ----------------------------------


def oracle_lift_count(
    c: DecoratedCover, target_edge: str, target_end: int, source_vertex: str
) -> int:
    """Germs at the source vertex mapping onto the given target germ,
    enumerated straight from the edge table and the stored flips."""
    count = 0
    for eid, e in c.source.edges.items():
        if c.edge_map[eid] != target_edge:
            continue
        for k in (0, 1):
            if e.end(k) == source_vertex and c.end_image(eid, k) == target_end:
                count += 1
    return count


def oracle_degree(c: DecoratedCover, target_vertex: str) -> int:
    return sum(
        c.local_degree[v]
        for v, w in c.vertex_map.items()
        if w == target_vertex
    )


# -- ball trees by agglomerative clustering -----------------------------------


def oracle_clusters(points: UltrametricPointSet) -> list[tuple[frozenset, Fraction]]:
    """Every dendrogram node with >= 2 members, as (member set, join radius).

    The join radius of a cluster is the minimum pairwise valuation inside
    it; the nodes are the equivalence classes of v(a,b) >= t over all
    thresholds t.  Computed by brute force over the O(n^2) thresholds.
    """
    labels = sorted(points.labels)
    thresholds = sorted(
        {
            points.valuation(a, b)
            for i, a in enumerate(labels)
            for b in labels[i + 1 :]
        },
        reverse=True,
    )
    seen: dict[frozenset, Fraction] = {}
    for t in thresholds:
        parent = {a: a for a in labels}

        def find(a: str) -> str:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for i, a in enumerate(labels):
            for b in labels[i + 1 :]:
                if points.valuation(a, b) >= t:
                    ra, rb = find(a), find(b)
                    if ra != rb:
                        parent[ra] = rb
        classes: dict[str, set[str]] = {}
        for a in labels:
            classes.setdefault(find(a), set()).add(a)
        for members in classes.values():
            if len(members) < 2:
                continue
            cluster = frozenset(members)
            join = min(
                points.valuation(a, b)
                for a in members
                for b in members
                if a < b
            )
            if cluster not in seen:
                seen[cluster] = join
    return sorted(seen.items(), key=lambda kv: (sorted(kv[0]), kv[1]))


def oracle_ball_vertices(
    points: UltrametricPointSet, rho0: Scalar
) -> set[tuple[str, Scalar]]:
    """Expected ball set of the tree inside radius rho0: one ball per
    dendrogram node with join >= rho0, plus the root ball at rho0."""
    balls = {
        (min(members), join)
        for members, join in oracle_clusters(points)
        if join >= rho0
    }
    balls.add((min(points.labels), rho0))
    return balls


# -- polynomial valuations by direct formula and finite differences ------------


def oracle_ball_valuation(
    f: FactoredPolynomial, center: str, rho: Scalar
) -> Scalar:
    """lead + sum of m * min(v(center, root), rho), INF-aware."""
    total: Scalar = f.lead_val
    for label, mult in f.roots:
        v = f.points.valuation(center, label)
        term = v if (is_inf(rho) or (not is_inf(v) and v < rho)) else rho
        if is_inf(term):
            return INF
        total += mult * term
    return total


def oracle_zeros_closed(f: FactoredPolynomial, center: str, rho: Scalar) -> int:
    """Roots with multiplicity in the CLOSED ball: v(center, root) >= rho."""
    return sum(
        mult
        for label, mult in f.roots
        if f.points.valuation(center, label) >= rho
    )


def nearest_kink_gap(f: FactoredPolynomial, center: str, rho: Fraction) -> Fraction:
    """Distance from rho down to the nearest strictly smaller kink of
    rho -> oracle_ball_valuation (kinks sit at the root valuations and 0
    is a safe floor); used to pick a valid finite-difference step."""
    below = [
        v
        for label, _ in f.roots
        for v in [f.points.valuation(center, label)]
        if not is_inf(v) and v < rho
    ]
    floor = max(below) if below else rho - 1
    return rho - floor


def oracle_slope_below(f: FactoredPolynomial, center: str, rho: Fraction) -> Fraction:
    """Backward finite difference of the valuation, step strictly inside
    the kink-free window, so it equals the exact one-sided slope."""
    eps = nearest_kink_gap(f, center, rho) / 2
    hi = oracle_ball_valuation(f, center, rho)
    lo = oracle_ball_valuation(f, center, rho - eps)
    assert not is_inf(hi) and not is_inf(lo)
    return Fraction(hi - lo, 1) / eps
