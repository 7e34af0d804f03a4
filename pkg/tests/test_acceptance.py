"""The acceptance gate: one test per shipped guarantee, exact arithmetic only.

Every check below runs at zero tolerance — residuals are compared to 0,
divisors and documents to exact equality — and `pytest -v` prints one
pass/fail line per criterion.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction
from pathlib import Path

import pytest
from click.testing import CliRunner

from skelcov.cli import main as cli_main
from skelcov.divisor import canonical_graph_divisor, pushforward
from skelcov.errors import InconsistencyError
from skelcov.export import to_dot
from skelcov.galois import (
    galois_audit,
    germ_lift_audit,
    retraction_class_size,
    validate_galois,
)
from skelcov.generators import (
    cyclic_voltage_model,
    dihedral_necklace,
    ramified_cyclic_star,
    random_cover,
    random_factored_polynomial,
    random_flow,
    random_ultrametric_set,
    tn_oracle_input,
)
from skelcov.genus_audit import (
    combined_formula_report,
    global_rh_audit,
    local_rh_report,
)
from skelcov.metric_graph import Germ, VertexPoint
from skelcov.pone_oracle import (
    BallPoint,
    ball_tree,
    ball_valuation,
    induced_cover,
    zeros_in_ball,
)
from skelcov.retraction import (
    RetractionFlow,
    bounded_core_flow,
    compatible_skeleton,
    forward_branching_points,
    preimage_flow,
)
from skelcov.specdoc import emit_document, parse_document

from fixtures import (
    branching_segment_cover,
    cyclic_star_cover,
    cyclic_star_model,
    double_circle_cover,
    double_circle_model,
    double_circle_punctured_model,
    folded_segment_cover,
    lopsided_star_model,
    punctured_fold_cover,
)
from oracles import nearest_kink_gap

DATA = Path(__file__).parent / "data"

DOCUMENT_FILES = [
    "bad_local_decoration",
    "branching_segment",
    "broken_galois",
    "cyclic_star",
    "double_circle",
    "double_circle_punctured",
    "folded_segment",
    "folded_segment_bad_length",
    "lopsided_star",
    "punctured_fold",
]


def run_cli(*args):
    return CliRunner().invoke(cli_main, [str(a) for a in args])


def zero_residuals(report) -> bool:
    return all(
        line.residual == 0
        for line in report.lines
        if line.asserted and line.applicable
    )


def test_criterion_1():
    """w carries the canonical degree and is the pushforward divisor."""
    start = time.monotonic()
    covers = [
        double_circle_cover(),
        folded_segment_cover(),
        branching_segment_cover(),
        cyclic_star_cover(),
    ]
    rng = random.Random(101)
    covers += [random_cover(rng) for _ in range(200)]
    for c in covers:
        assert len(c.source.edges) <= 200
        assert c.validate() == []
        w = c.w_divisor()
        assert w.degree == 2 * c.source.genus() - 2
        assert w == pushforward(c, canonical_graph_divisor(c.source))
    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    print(
        f"criterion 1: PASS — deg w = 2g'-2 and w = pushforward on "
        f"{len(covers)} covers in {elapsed:.2f}s"
    )


def test_criterion_2():
    """Every induced ball-tree cover satisfies all cover axioms."""
    rng = random.Random(102)
    count = 0
    for _ in range(50):
        spec = tn_oracle_input(rng)
        c = induced_cover(
            spec.points, spec.fibers, spec.base, spec.residue_char,
            spec.insep_degrees,
        )
        assert 2 <= c.global_degree() <= 6
        assert c.validate() == []
        count += 1
    for _ in range(8):
        spec = tn_oracle_input(rng, wild=True)
        c = induced_cover(
            spec.points, spec.fibers, spec.base, spec.residue_char,
            spec.insep_degrees,
        )
        assert c.validate() == []
        count += 1
    print(f"criterion 2: PASS — {count} induced covers, zero violations each")


def _outgoing_slope_sum(tree, f, vid) -> int:
    """Exact sum of outgoing slopes of the ball valuation at a tree vertex.

    Along a germ into a deeper branch the slope is the number of roots
    strictly below the vertex in that branch; along the germ toward the
    root it is minus the number of roots in the vertex's closed ball.
    """
    ball = tree.ball[vid]
    g = tree.graph
    total = 0
    for eid, end in g.edge_ends_at(vid):
        other = g.edges[eid].end(1 - end)
        if other in tree.point_label:
            center = tree.point_label[other]
            total += sum(
                mult for label, mult in f.roots
                if f.points.valuation(center, label) > ball.rho
            )
        else:
            child = tree.ball[other]
            if child.rho > ball.rho:
                total += sum(
                    mult for label, mult in f.roots
                    if f.points.valuation(child.center, label) > ball.rho
                )
            else:
                total -= sum(
                    mult for label, mult in f.roots
                    if f.points.valuation(ball.center, label) >= ball.rho
                )
    return total


def test_criterion_3():
    """Zeros in a ball equal the exact slope of the ball valuation, and
    germ slopes balance at every internal vertex of every ball tree."""
    rng = random.Random(103)
    pairs = 0
    balanced_vertices = 0
    trees = 0
    while pairs < 1000:
        points = random_ultrametric_set(rng)
        f = random_factored_polynomial(rng, points)
        for _ in range(4):
            center = rng.choice(points.labels)
            rho = Fraction(rng.randint(-12, 24), rng.choice([1, 2, 3]))
            ball = BallPoint(center, rho)
            eps = nearest_kink_gap(f, center, rho) / 2
            hi = ball_valuation(f, ball)
            lo = ball_valuation(f, BallPoint(center, rho - eps))
            assert Fraction(hi - lo) / eps == zeros_in_ball(f, ball)
            pairs += 1
        labels = points.labels
        if len(labels) >= 2:
            first_join = min(
                points.valuation(a, b)
                for i, a in enumerate(labels)
                for b in labels[i + 1:]
            )
            tree = ball_tree(points, first_join - rng.randint(0, 3))
            trees += 1
            for vid in tree.ball:
                if vid == tree.root:
                    continue
                assert _outgoing_slope_sum(tree, f, vid) == 0
                balanced_vertices += 1
    assert balanced_vertices >= 100
    print(
        f"criterion 3: PASS — {pairs} (f, ball) slope checks; germ slopes "
        f"balance at {balanced_vertices} internal vertices of {trees} trees"
    )


def test_criterion_4():
    """Skeleton growth kills forward branching, matches the preimage, and
    is idempotent; the branching fixture eliminates exactly c'."""
    doc = parse_document((DATA / "branching_segment.json").read_text())
    first = compatible_skeleton(doc.cover, doc.flow)
    assert first.eliminated == ("c'",)

    def seeded_flow(c):
        # the bounded core, extended by the images (and rays) of ramified
        # punctures, which skeleton growth requires up front
        base = bounded_core_flow(c.target)
        vids, eids = set(base.core_vertices), set(base.core_edges)
        for x in c.source.punctures():
            if c.puncture_ram[x] > 1:
                img = c.vertex_map[x]
                (ray, _), = c.target.edge_ends_at(img)
                vids.add(img)
                eids.add(ray)
        return RetractionFlow(c.target, vids, eids)

    cases = [(doc.cover, doc.flow)]
    for fix in (
        double_circle_cover(),
        folded_segment_cover(),
        cyclic_star_cover(),
        punctured_fold_cover(),
    ):
        cases.append((fix, seeded_flow(fix)))
    rng = random.Random(104)
    for _ in range(100):
        c = random_cover(rng)
        cases.append((c, random_flow(rng, c)))

    for c, flow in cases:
        res = compatible_skeleton(c, flow)
        assert forward_branching_points(c, res.target_flow) == []
        assert preimage_flow(c, res.target_flow) == res.source_flow
        again = compatible_skeleton(c, res.target_flow)
        assert again.eliminated == ()
        assert again.target_flow == res.target_flow
        assert again.source_flow == res.source_flow
    print(
        f"criterion 4: PASS — {len(cases)} covers: no forward branching "
        f"points, source core is the preimage, growth is idempotent"
    )


def test_criterion_5():
    """Fiber class sizes and germ lift counts obey the deck-group formulas
    exactly; broken decorations fail with exit code 2."""
    models = [
        double_circle_model(),
        double_circle_punctured_model(),
        cyclic_star_model(),
    ]
    constructed = (
        [
            cyclic_voltage_model(n, cycle_len=l, rays=r)
            for n, l, r in (
                (2, 1, 0), (3, 1, 1), (4, 2, 1), (5, 1, 2), (2, 3, 2), (3, 2, 0),
            )
        ]
        + [
            ramified_cyclic_star(n, tame_rays=t)
            for n, t in ((2, 1), (2, 2), (3, 1), (3, 2), (4, 2), (5, 1), (6, 2))
        ]
        + [
            dihedral_necklace(n, ramified_rays=rr)
            for n, rr in (
                (1, False), (2, False), (2, True), (3, False),
                (3, True), (4, False), (5, True),
            )
        ]
    )
    assert len(constructed) >= 20
    models += constructed

    class_sizes = 0
    for m in models:
        assert validate_galois(m) == []
        report = galois_audit(m)
        assert zero_residuals(report)
        assert report.passed
        for x in sorted(m.cover.source.punctures()):
            # constancy across the fiber is enforced inside the call
            (ray, end), = m.cover.source.edge_ends_at(x)
            base = m.cover.source.edges[ray].end(1 - end)
            size = retraction_class_size(m, x, m.cover.vertex_map[base])
            assert size >= 1
            class_sizes += 1

    lopsided = lopsided_star_model()
    with pytest.raises(InconsistencyError, match="unequal rams"):
        germ_lift_audit(lopsided, Germ(VertexPoint("p"), "q1", 0))
    assert run_cli("galois-check", DATA / "lopsided_star.json").exit_code == 2
    assert run_cli("galois-check", DATA / "broken_galois.json").exit_code == 2
    print(
        f"criterion 5: PASS — {len(models)} deck-group models audit clean "
        f"({class_sizes} class sizes); broken documents exit 2"
    )


def test_criterion_6():
    """Genus audits: zero residuals wherever the books are consistent, and
    the combined counting formula is derived, not asserted, when printed."""
    rng = random.Random(106)
    tame = []
    for _ in range(20):
        spec = tn_oracle_input(rng)
        tame.append(
            induced_cover(
                spec.points, spec.fibers, spec.base, spec.residue_char,
                spec.insep_degrees,
            )
        )
    for c in tame:
        report = global_rh_audit(c)
        assert report.passed and zero_residuals(report)

    consistent = [
        punctured_fold_cover(),
        double_circle_cover(),
        folded_segment_cover(),
        cyclic_star_cover(),
    ] + [random_cover(rng) for _ in range(30)]
    for c in consistent:
        report = local_rh_report(c)
        assert report.passed and zero_residuals(report)

    derived_checked = 0
    for c in tame + consistent:
        if global_rh_audit(c).passed and local_rh_report(c).passed:
            report = combined_formula_report(c)
            assert zero_residuals(report)
            derived_checked += 1
    assert derived_checked >= 20

    report = combined_formula_report(cyclic_star_cover())
    printed = [line for line in report.lines if not line.asserted]
    assert printed
    for line in printed:
        assert line.verdict() == "REPORTED"
        assert isinstance(line.lhs, int) and isinstance(line.rhs, int)
    print(
        f"criterion 6: PASS — global residual 0 on {len(tame)} tame covers, "
        f"local residual 0 on {len(consistent)} covers, derived combined "
        f"identity 0 on {derived_checked}; printed formula stays REPORTED"
    )


def test_criterion_7():
    """Documents round-trip byte-stably, the exit-code table holds, and the
    DOT export is deterministic."""
    for name in DOCUMENT_FILES:
        text = (DATA / f"{name}.json").read_text()
        assert emit_document(parse_document(text)) == text

    table = [
        (("validate", DATA / "folded_segment.json"), 0),
        (("validate", DATA / "folded_segment_bad_length.json"), 2),
        (("validate", DATA / "empty.json"), 1),
        (("validate", DATA / "no_such_file.json"), 1),
        (("validate", DATA / "malformed.json"), 1),
        (("audit", DATA / "cyclic_star.json", "--w"), 0),
        (("audit", DATA / "cyclic_star.json", "--global-rh"), 2),
        (("audit", DATA / "bad_local_decoration.json", "--local-rh"), 2),
        (("skeletonize", DATA / "branching_segment.json", "--check-idempotent"), 0),
        (("galois-check", DATA / "double_circle_punctured.json"), 0),
        (("galois-check", DATA / "broken_galois.json"), 2),
        (("export", DATA / "double_circle.json"), 0),
    ]
    for args, code in table:
        result = run_cli(*args)
        assert result.exit_code == code, (args, result.exit_code, result.output)

    golden = (DATA / "double_circle.dot").read_text()
    assert to_dot(double_circle_cover()) == golden
    assert to_dot(double_circle_cover()) == to_dot(double_circle_cover())
    print(
        f"criterion 7: PASS — {len(DOCUMENT_FILES)} byte-stable round trips, "
        f"{len(table)}-row exit-code table, deterministic DOT export"
    )
