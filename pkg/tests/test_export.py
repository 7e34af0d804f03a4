from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from skelcov.export import render_figure, to_dot
from skelcov.metric_graph import Edge, MetricGraph, Vertex

from fixtures import (
    double_circle_cover,
    identity_cover,
    punctured_fold_cover,
)

DATA = Path(__file__).parent / "data"


class TestToDot:
    def test_matches_golden_file(self):
        golden = (DATA / "double_circle.dot").read_text()
        assert to_dot(double_circle_cover()) == golden

    def test_deterministic(self):
        assert to_dot(punctured_fold_cover()) == to_dot(punctured_fold_cover())

    def test_overall_shape(self):
        out = to_dot(double_circle_cover())
        lines = out.splitlines()
        assert lines[0] == "digraph skelcov {"
        assert lines[-1] == "}"
        assert out.endswith("}\n")
        assert "  subgraph cluster_source {" in lines
        assert "  subgraph cluster_target {" in lines

    def test_every_source_vertex_gets_a_map_arrow(self):
        c = punctured_fold_cover()
        out = to_dot(c)
        for vid, wid in c.vertex_map.items():
            assert f'"src:{vid}" -> "tgt:{wid}" [style=dashed' in out

    def test_punctures_are_diamonds(self):
        c = punctured_fold_cover()
        out = to_dot(c)
        for x in c.source.punctures():
            assert f'"src:{x}" [label="{x}", shape=diamond];' in out
        for v in c.source.skeletal_vertices():
            g = c.source.vertices[v].genus
            assert f'"src:{v}" [label="{v} (g={g})"];' in out

    def test_edge_labels_carry_exact_lengths(self):
        seg = MetricGraph(
            [Vertex("a"), Vertex("b")],
            [Edge("e", "a", "b", Fraction(3, 2))],
        )
        out = to_dot(identity_cover(seg))
        assert '"src:a" -> "src:b" [label="e (3/2)", dir=none];' in out
        assert "(inf)" in to_dot(punctured_fold_cover())

    def test_quotes_in_identifiers_are_escaped(self):
        odd = MetricGraph([Vertex('a"b')], [])
        out = to_dot(identity_cover(odd))
        assert '"src:a\\"b" [label="a\\"b (g=0)"];' in out

    def test_loops_render_as_self_arrows(self):
        loopy = MetricGraph([Vertex("p")], [Edge("l", "p", "p", Fraction(1))])
        out = to_dot(identity_cover(loopy))
        assert '    "src:p" -> "src:p" [label="l (1)", dir=none];' in out


class TestRenderFigure:
    def test_writes_png(self, tmp_path):
        path = tmp_path / "cover.png"
        render_figure(punctured_fold_cover(), str(path))
        data = path.read_bytes()
        assert data[:8] == b"\x89PNG\r\n\x1a\n"
        assert len(data) > 1000

    def test_handles_loops_and_rays(self, tmp_path):
        loopy = MetricGraph(
            [Vertex("p")], [Edge("l", "p", "p", Fraction(1))]
        )
        path = tmp_path / "loop.png"
        render_figure(identity_cover(loopy), str(path))
        assert path.exists() and path.stat().st_size > 0
