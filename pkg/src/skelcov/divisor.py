"""Integer divisors supported on points of a metric graph."""

from __future__ import annotations

from typing import TYPE_CHECKING, Iterator, Mapping

from .errors import DomainError
from .metric_graph import GraphPoint, MetricGraph, VertexPoint, point_sort_key

if TYPE_CHECKING:  # avoids a runtime cycle; pushforward only needs duck typing
    from .cover import DecoratedCover


class Divisor:
    """A finite formal integer combination of graph points.

    Coefficients equal to zero are dropped on construction, so two divisors
    are equal exactly when they have the same ambient graph and the same
    nonzero support.
    """

    def __init__(self, ambient: MetricGraph, coeffs: Mapping[GraphPoint, int]):
        cleaned: dict[GraphPoint, int] = {}
        for p, c in coeffs.items():
            if not isinstance(c, int) or isinstance(c, bool):
                raise DomainError(f"coefficient of {p!r} must be an integer")
            ambient.require_point(p)
            if c != 0:
                cleaned[p] = c
        self.ambient = ambient
        self.coeffs = cleaned

    @property
    def degree(self) -> int:
        return sum(self.coeffs.values())

    def coefficient(self, p: GraphPoint) -> int:
        return self.coeffs.get(p, 0)

    def support(self) -> list[GraphPoint]:
        return sorted(self.coeffs, key=point_sort_key)

    def items(self) -> Iterator[tuple[GraphPoint, int]]:
        for p in self.support():
            yield p, self.coeffs[p]

    def __add__(self, other: "Divisor") -> "Divisor":
        if not isinstance(other, Divisor):
            return NotImplemented
        if self.ambient != other.ambient:
            raise DomainError("cannot add divisors on different graphs")
        merged = dict(self.coeffs)
        for p, c in other.coeffs.items():
            merged[p] = merged.get(p, 0) + c
        return Divisor(self.ambient, merged)

    def __neg__(self) -> "Divisor":
        return Divisor(self.ambient, {p: -c for p, c in self.coeffs.items()})

    def __sub__(self, other: "Divisor") -> "Divisor":
        if not isinstance(other, Divisor):
            return NotImplemented
        return self + (-other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Divisor):
            return NotImplemented
        return self.ambient == other.ambient and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        body = " + ".join(f"{c}*{p!r}" for p, c in self.items()) or "0"
        return f"Divisor({body})"


def degree(d: Divisor) -> int:
    return d.degree


def canonical_graph_divisor(g: MetricGraph) -> Divisor:
    """The divisor sum over vertices of (valence - 2) * vertex.

    Its degree is 2*genus(g) - 2; valence-one vertices (punctures, leaves)
    contribute -1.
    """
    return Divisor(g, {VertexPoint(v): g.valence(v) - 2 for v in g.vertices})


def pushforward(c: "DecoratedCover", d: Divisor) -> Divisor:
    """Push a divisor on the source of a cover forward along the cover map."""
    if d.ambient != c.source:
        raise DomainError("divisor does not live on the cover's source graph")
    out: dict[GraphPoint, int] = {}
    for p, coeff in d.coeffs.items():
        q = c.point_image(p)
        out[q] = out.get(q, 0) + coeff
    return Divisor(c.target, out)
