"""The JSON document format for decorated covers.

A document carries the two graphs, the maps, all decoration tables, and
optionally a deck group (``galois``), retraction flows (``flow`` on the
target, ``source_flow`` on the source) and wild ramification orders.
:func:`parse_document` turns text into a :class:`CoverDocument`, reporting
every malformation — bad JSON, missing keys, structural defects of graphs or
flows — as :class:`~skelcov.errors.SpecParseError`.  Cover *axiom* failures
are not parse errors: a structurally well-formed document always parses, and
validation is a separate step.

:func:`emit_document` is canonical: keys sorted, two-space indent, lengths
and scalars as exact strings, every decoration table written out, one
trailing newline.  Emitting a parsed emission is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .cover import DecoratedCover
from .errors import SkelcovError, SpecParseError
from .galois import Automorphism
from .metric_graph import Edge, MetricGraph, Vertex, VertexKind
from .rationals import format_scalar, parse_scalar
from .retraction import RetractionFlow


@dataclass
class CoverDocument:
    """A parsed document: the cover plus its optional companion blocks."""

    cover: DecoratedCover
    flow: RetractionFlow | None = None
    source_flow: RetractionFlow | None = None
    galois: tuple[Automorphism, ...] | None = None
    wild_orders: dict[str, int] | None = None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoverDocument):
            return NotImplemented
        mine = None if self.galois is None else frozenset(self.galois)
        theirs = None if other.galois is None else frozenset(other.galois)
        return (
            self.cover == other.cover
            and self.flow == other.flow
            and self.source_flow == other.source_flow
            and mine == theirs
            and self.wild_orders == other.wild_orders
        )


def _parse_length(value: Any) -> Fraction | float:
    if isinstance(value, str):
        return parse_scalar(value)
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    raise ValueError(f"length must be a string like \"3/2\" or \"inf\", got {value!r}")


def _parse_graph(obj: Any, side: str) -> MetricGraph:
    vertices = []
    for item in obj["vertices"]:
        kind = VertexKind(item.get("kind", "skeletal"))
        vertices.append(Vertex(item["id"], kind, item.get("genus", 0)))
    edges = []
    for item in obj["edges"]:
        a, b = item["ends"]
        edges.append(Edge(item["id"], a, b, _parse_length(item["length"])))
    try:
        return MetricGraph(vertices, edges)
    except SkelcovError as exc:
        raise SpecParseError(f"{side} graph: {exc}") from exc


def _int_table(obj: Any, name: str) -> dict[str, int]:
    out = {}
    for key, value in obj.items():
        if not isinstance(value, int) or isinstance(value, bool):
            raise ValueError(f"{name}[{key!r}] must be an integer, got {value!r}")
        out[str(key)] = value
    return out


def _parse_flow(obj: Any, graph: MetricGraph, block: str) -> RetractionFlow:
    try:
        return RetractionFlow(graph, obj["vertices"], obj["edges"])
    except SkelcovError as exc:
        raise SpecParseError(f"{block} block: {exc}") from exc


def parse_document(text: str) -> CoverDocument:
    """Parse document text; any malformation raises SpecParseError."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"not valid JSON: {exc}") from exc
    try:
        if not isinstance(obj, dict):
            raise SpecParseError("the document must be a JSON object")
        source = _parse_graph(obj["source"], "source")
        target = _parse_graph(obj["target"], "target")
        optional: dict[str, Any] = {}
        for key in ("insep_degree", "sep_degree", "ram_div_degree", "puncture_ram"):
            if key in obj:
                optional[key] = _int_table(obj[key], key)
        try:
            cover = DecoratedCover(
                source,
                target,
                {str(k): str(v) for k, v in obj["vertex_map"].items()},
                {str(k): str(v) for k, v in obj["edge_map"].items()},
                _int_table(obj["ram"], "ram"),
                _int_table(obj["local_degree"], "local_degree"),
                insep_degree=optional.get("insep_degree"),
                sep_degree=optional.get("sep_degree"),
                residue_char=obj.get("residue_char", 0),
                ram_div_degree=optional.get("ram_div_degree"),
                puncture_ram=optional.get("puncture_ram"),
            )
        except SkelcovError as exc:
            raise SpecParseError(f"cover tables: {exc}") from exc
        flow = _parse_flow(obj["flow"], target, "flow") if "flow" in obj else None
        source_flow = (
            _parse_flow(obj["source_flow"], source, "source_flow")
            if "source_flow" in obj
            else None
        )
        galois = None
        if "galois" in obj:
            galois = tuple(
                Automorphism(
                    {str(k): str(v) for k, v in item["vertices"].items()},
                    {str(k): str(v) for k, v in item["edges"].items()},
                )
                for item in obj["galois"]
            )
        wild_orders = (
            _int_table(obj["wild_orders"], "wild_orders")
            if "wild_orders" in obj
            else None
        )
    except SpecParseError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        kind = type(exc).__name__
        raise SpecParseError(f"malformed document ({kind}): {exc}") from exc
    return CoverDocument(cover, flow, source_flow, galois, wild_orders)


def _graph_object(g: MetricGraph) -> dict:
    return {
        "vertices": [
            {
                "id": vid,
                "kind": g.vertices[vid].kind.value,
                "genus": g.vertices[vid].genus,
            }
            for vid in sorted(g.vertices)
        ],
        "edges": [
            {
                "id": eid,
                "ends": list(g.edges[eid].ends),
                "length": format_scalar(g.edges[eid].length),
            }
            for eid in sorted(g.edges)
        ],
    }


def _flow_object(flow: RetractionFlow) -> dict:
    return {
        "vertices": sorted(flow.core_vertices),
        "edges": sorted(flow.core_edges),
    }


def emit_document(doc: CoverDocument) -> str:
    """Serialize canonically; see the module docstring for the guarantees."""
    c = doc.cover
    obj: dict[str, Any] = {
        "residue_char": c.residue_char,
        "source": _graph_object(c.source),
        "target": _graph_object(c.target),
        "vertex_map": dict(c.vertex_map),
        "edge_map": dict(c.edge_map),
        "ram": dict(c.ram),
        "local_degree": dict(c.local_degree),
        "insep_degree": dict(c.insep_degree),
        "sep_degree": dict(c.sep_degree),
        "ram_div_degree": dict(c.ram_div_degree),
        "puncture_ram": dict(c.puncture_ram),
    }
    if doc.galois is not None:
        obj["galois"] = [
            {
                "vertices": dict(sorted(a.vertex_perm.items())),
                "edges": dict(sorted(a.edge_perm.items())),
            }
            for a in sorted(doc.galois, key=lambda a: a._key)
        ]
    if doc.flow is not None:
        obj["flow"] = _flow_object(doc.flow)
    if doc.source_flow is not None:
        obj["source_flow"] = _flow_object(doc.source_flow)
    if doc.wild_orders is not None:
        obj["wild_orders"] = dict(doc.wild_orders)
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
