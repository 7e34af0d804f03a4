"""Rendering covers for humans: Graphviz DOT text and matplotlib figures.

:func:`to_dot` is deterministic text (sorted ids, stable quoting), so its
output can be compared byte-for-byte.  :func:`render_figure` imports
matplotlib lazily and uses the Agg backend, so it works headless and costs
nothing unless called.
"""

from __future__ import annotations

import math

from .cover import DecoratedCover
from .metric_graph import MetricGraph, VertexKind
from .rationals import format_scalar


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _graph_block(out: list[str], g: MetricGraph, prefix: str, title: str) -> None:
    out.append(f"  subgraph cluster_{title} {{")
    out.append(f"    label={_quote(title)};")
    for vid in sorted(g.vertices):
        v = g.vertices[vid]
        node = _quote(f"{prefix}:{vid}")
        if v.kind is VertexKind.PUNCTURE:
            out.append(f"    {node} [label={_quote(vid)}, shape=diamond];")
        else:
            out.append(f"    {node} [label={_quote(f'{vid} (g={v.genus})')}];")
    for eid in sorted(g.edges):
        e = g.edges[eid]
        a, b = _quote(f"{prefix}:{e.v0}"), _quote(f"{prefix}:{e.v1}")
        label = _quote(f"{eid} ({format_scalar(e.length)})")
        out.append(f"    {a} -> {b} [label={label}, dir=none];")
    out.append("  }")


def to_dot(cover: DecoratedCover) -> str:
    """The cover as a Graphviz digraph: both graphs as clusters, plus dashed
    arrows showing where each source vertex lands."""
    out = ["digraph skelcov {"]
    _graph_block(out, cover.source, "src", "source")
    _graph_block(out, cover.target, "tgt", "target")
    for vid in sorted(cover.vertex_map):
        a = _quote(f"src:{vid}")
        b = _quote(f"tgt:{cover.vertex_map[vid]}")
        out.append(f"  {a} -> {b} [style=dashed, constraint=false];")
    out.append("}")
    return "\n".join(out) + "\n"


def render_figure(cover: DecoratedCover, path: str) -> None:
    """Draw source and target side by side (circular layouts, punctures as
    diamonds, rays dashed) and save to ``path``."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(11, 5.5))
    for ax, graph, title in (
        (axes[0], cover.source, "source"),
        (axes[1], cover.target, "target"),
    ):
        ids = sorted(graph.vertices)
        pos = {}
        for i, vid in enumerate(ids):
            angle = 2 * math.pi * i / len(ids)
            pos[vid] = (math.cos(angle), math.sin(angle))
        for eid in sorted(graph.edges):
            e = graph.edges[eid]
            x0, y0 = pos[e.v0]
            if e.is_loop:
                loop = plt.Circle((x0 * 1.15, y0 * 1.15), 0.12, fill=False, color="gray")
                ax.add_patch(loop)
                ax.annotate(eid, (x0 * 1.3, y0 * 1.3), fontsize=8, color="gray")
                continue
            x1, y1 = pos[e.v1]
            style = "--" if e.is_ray else "-"
            ax.plot([x0, x1], [y0, y1], style, color="gray", zorder=1)
            ax.annotate(
                f"{eid} ({format_scalar(e.length)})",
                ((x0 + x1) / 2, (y0 + y1) / 2),
                fontsize=8,
                color="gray",
            )
        for vid in ids:
            v = graph.vertices[vid]
            x, y = pos[vid]
            marker = "D" if v.kind is VertexKind.PUNCTURE else "o"
            ax.scatter([x], [y], marker=marker, s=90, color="black", zorder=2)
            text = vid if v.kind is VertexKind.PUNCTURE else f"{vid} (g={v.genus})"
            ax.annotate(text, (x, y + 0.1), fontsize=9, ha="center")
        ax.set_title(title)
        ax.set_aspect("equal")
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
