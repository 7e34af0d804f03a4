"""The ``skelcov`` command line.

Exit codes are uniform across commands: 0 when everything checked out, 1 for
input problems (unreadable files, malformed documents, usage errors), 2 when
the mathematics fails (axiom violations, failed audits, inconsistent books).

Report-producing commands print their lines, then ``-- summary``, then a
single-line JSON summary.  Document-producing commands (``oracle induce``,
``export``) print only the document when no ``--out`` is given, so their
output can be piped straight into the next command.
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import click

from . import __version__
from .errors import (
    AmbiguousTieError,
    DomainError,
    InconsistencyError,
    SpecParseError,
    StructuralError,
    TamenessError,
)
from .export import render_figure, to_dot
from .galois import GaloisCoverModel, galois_audit, validate_galois
from .genus_audit import (
    AuditLine,
    combined_formula_report,
    global_rh_audit,
    local_rh_report,
)
from .metric_graph import VertexPoint
from .pone_oracle import (
    BallPoint,
    FactoredPolynomial,
    Fiber,
    UltrametricPointSet,
    ball_tree,
    ball_valuation,
    induced_cover,
    zeros_in_ball,
)
from .rationals import format_scalar, parse_scalar
from .retraction import compatible_skeleton
from .specdoc import CoverDocument, emit_document, parse_document


def _color() -> bool | None:
    return False if os.environ.get("SKELCOV_NO_COLOR") else None


def _echo(message: str = "", err: bool = False) -> None:
    click.echo(message, err=err, color=_color())


def _summary(payload: dict) -> None:
    _echo("-- summary")
    _echo(json.dumps(payload, sort_keys=True, separators=(",", ":")))


def _fmt(x) -> str:
    return format_scalar(x) if isinstance(x, Fraction) else str(x)


def _render_audit_line(line: AuditLine) -> str:
    text = (
        f"{line.name}: lhs = {_fmt(line.lhs)}, rhs = {_fmt(line.rhs)}, "
        f"residual = {_fmt(line.residual)}, {line.verdict()}"
    )
    if line.note:
        text += f" ({line.note})"
    return text


def _read_document(path: str) -> CoverDocument:
    return parse_document(Path(path).read_text())


class SkelcovCli(click.Group):
    """Group enforcing the 0/1/2 exit-code contract (usage errors exit 1)."""

    def main(self, *args, **kwargs):  # noqa: D102 - see class docstring
        kwargs["standalone_mode"] = False
        try:
            rv = super().main(*args, **kwargs)
        except click.exceptions.Exit as exc:
            sys.exit(exc.exit_code)
        except click.ClickException as exc:
            exc.show()
            sys.exit(1)
        except click.exceptions.Abort:
            sys.exit(1)
        sys.exit(rv if isinstance(rv, int) else 0)


@click.group(cls=SkelcovCli)
@click.version_option(version=__version__, prog_name="skelcov")
def main() -> None:
    """Decorated covers of metric graphs: validation, audits, skeleton
    growth, Galois checks, and the exact tree-of-balls oracle."""


# -- validate -----------------------------------------------------------------


@main.command()
@click.argument("spec", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def validate(ctx: click.Context, spec: str) -> None:
    """Check the cover axioms of a document."""
    try:
        doc = _read_document(spec)
    except SpecParseError as exc:
        _echo(f"parse error: {exc}", err=True)
        ctx.exit(1)
    violations = doc.cover.validate()
    for v in violations:
        _echo(str(v))
    if not violations:
        _echo("valid: all cover axioms hold")
    _summary({"file": spec, "ok": not violations, "violations": len(violations)})
    ctx.exit(2 if violations else 0)


# -- audit --------------------------------------------------------------------


def _audit_one(
    path: str,
    sections: tuple[bool, bool, bool, bool],
) -> tuple[list[str], dict, int, object]:
    do_global, do_local, do_combined, do_w = sections
    try:
        doc = _read_document(path)
    except SpecParseError as exc:
        return [f"parse error: {exc}"], {"error": str(exc), "file": path}, 1, None
    cover = doc.cover
    violations = cover.validate()
    if violations:
        lines = [f"invalid: {v}" for v in violations]
        return (
            lines,
            {"file": path, "ok": False, "violations": len(violations)},
            2,
            None,
        )

    lines: list[str] = []
    failures = 0

    def render_report(report) -> None:
        nonlocal failures
        for line in report.lines:
            lines.append(_render_audit_line(line))
            if line.asserted and line.applicable and not line.passed:
                failures += 1

    def guarded(name: str, run) -> None:
        nonlocal failures
        try:
            run()
        except (TamenessError, DomainError) as exc:
            lines.append(f"{name}: ERROR: {exc}")
            failures += 1

    if do_global:
        guarded("global-rh", lambda: render_report(global_rh_audit(cover, doc.wild_orders)))
    if do_local:
        guarded("local-rh", lambda: render_report(local_rh_report(cover)))
    if do_combined:
        guarded(
            "combined",
            lambda: render_report(combined_formula_report(cover, doc.wild_orders)),
        )
    if do_w:
        w = cover.w_divisor()
        for p in w.support():
            assert isinstance(p, VertexPoint)
            lines.append(f"w({p.vertex}) = {w.coefficient(p)}")
        lhs = w.degree
        # the graph-canonical identity: vertex genus decorations do not enter
        rhs = 2 * cover.source.genus() - 2
        ok = lhs == rhs
        if not ok:
            failures += 1
        lines.append(f"deg w = {lhs}, 2g'-2 = {rhs}, {'PASS' if ok else 'FAIL'}")

    code = 2 if failures else 0
    return lines, {"failures": failures, "file": path, "ok": not failures}, code, cover


@main.command()
@click.argument("specs", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--global-rh", "do_global", is_flag=True, help="Genus-degree balance of the whole cover.")
@click.option("--local-rh", "do_local", is_flag=True, help="Per-vertex genus balance.")
@click.option("--combined", "do_combined", is_flag=True, help="The combined counting formula.")
@click.option("--w", "do_w", is_flag=True, help="The canonical-degree divisor w.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Audit files in parallel.")
@click.option("--figure", type=click.Path(dir_okay=False), default=None,
              help="Also render the graphs to this image file.")
@click.pass_context
def audit(ctx, specs, do_global, do_local, do_combined, do_w, jobs, figure) -> None:
    """Run genus/degree audits on one or more documents (default: all)."""
    if not (do_global or do_local or do_combined or do_w):
        do_global = do_local = do_combined = do_w = True
    sections = (do_global, do_local, do_combined, do_w)
    with ThreadPoolExecutor(max_workers=max(jobs, 1)) as pool:
        results = list(pool.map(lambda p: _audit_one(p, sections), specs))
    code = 0
    for index, (path, (lines, summary, one_code, cover)) in enumerate(zip(specs, results)):
        if len(specs) > 1:
            _echo(f"== {path}")
        for line in lines:
            _echo(line)
        if figure is not None and cover is not None:
            stem, dot, suffix = str(figure).rpartition(".")
            fig_path = (
                figure if len(specs) == 1
                else f"{stem}-{index}{dot}{suffix}" if dot
                else f"{figure}-{index}"
            )
            render_figure(cover, fig_path)
            summary = dict(summary, figure=fig_path)
            _echo(f"figure: {fig_path}")
        _summary(summary)
        code = max(code, one_code)
    ctx.exit(code)


# -- skeletonize ----------------------------------------------------------------


@main.command()
@click.argument("spec", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the document back with the grown flows.")
@click.option("--check-idempotent", is_flag=True,
              help="Re-run on the result and confirm nothing changes.")
@click.pass_context
def skeletonize(ctx, spec, out, check_idempotent) -> None:
    """Grow the document's flow into a compatible pair of skeleta."""
    try:
        doc = _read_document(spec)
    except SpecParseError as exc:
        _echo(f"parse error: {exc}", err=True)
        ctx.exit(1)
    if doc.flow is None:
        _echo("error: the document has no flow block to grow", err=True)
        ctx.exit(1)
    try:
        result = compatible_skeleton(doc.cover, doc.flow)
    except (DomainError, InconsistencyError) as exc:
        _echo(f"error: {exc}", err=True)
        ctx.exit(2)
    for q in result.eliminated:
        _echo(f"eliminated forward branching point: {q}")
    tf, sf = result.target_flow, result.source_flow
    _echo(f"target core: {len(tf.core_vertices)} vertices, {len(tf.core_edges)} edges")
    _echo(f"source core: {len(sf.core_vertices)} vertices, {len(sf.core_edges)} edges")
    summary = {
        "eliminated": list(result.eliminated),
        "file": spec,
        "target_core_edges": len(tf.core_edges),
        "target_core_vertices": len(tf.core_vertices),
    }
    code = 0
    if check_idempotent:
        again = compatible_skeleton(doc.cover, result.target_flow)
        idempotent = (
            again.target_flow == result.target_flow and not again.eliminated
        )
        _echo("IDEMPOTENT" if idempotent else "NOT IDEMPOTENT")
        summary["idempotent"] = idempotent
        if not idempotent:
            code = 2
    if out is not None:
        enlarged = CoverDocument(
            doc.cover,
            flow=result.target_flow,
            source_flow=result.source_flow,
            galois=doc.galois,
            wild_orders=doc.wild_orders,
        )
        Path(out).write_text(emit_document(enlarged))
        _echo(f"wrote {out}")
        summary["out"] = out
    _summary(summary)
    ctx.exit(code)


# -- galois-check ---------------------------------------------------------------


@main.command(name="galois-check")
@click.argument("spec", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def galois_check(ctx, spec) -> None:
    """Validate a document's deck group and run the Galois fiber audits."""
    try:
        doc = _read_document(spec)
    except SpecParseError as exc:
        _echo(f"parse error: {exc}", err=True)
        ctx.exit(1)
    if doc.galois is None:
        _echo("error: the document has no galois block", err=True)
        ctx.exit(1)
    model = GaloisCoverModel(doc.cover, doc.galois)
    violations = validate_galois(model)
    if violations:
        for v in violations:
            _echo(str(v))
        _summary({"file": spec, "ok": False, "violations": len(violations)})
        ctx.exit(2)
    try:
        report = galois_audit(model, doc.flow)
    except InconsistencyError as exc:
        _echo(f"error: {exc}")
        _summary({"error": str(exc), "file": spec, "ok": False})
        ctx.exit(2)
    failures = 0
    for line in report.lines:
        _echo(_render_audit_line(line))
        if line.asserted and line.applicable and not line.passed:
            failures += 1
    _summary({
        "failures": failures,
        "file": spec,
        "group_order": len(model.group),
        "ok": not failures,
    })
    ctx.exit(2 if failures else 0)


# -- oracle ---------------------------------------------------------------------


@main.group()
def oracle() -> None:
    """Exact ball arithmetic from pairwise valuations."""


def _load_oracle_input(path: str) -> dict:
    try:
        obj = json.loads(Path(path).read_text())
        if not isinstance(obj, dict):
            raise SpecParseError("oracle input must be a JSON object")
        return obj
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"not valid JSON: {exc}") from exc


def _oracle_points(obj: dict) -> UltrametricPointSet:
    block = obj["points"]
    vals = {}
    for key, value in block["valuations"].items():
        a, sep, b = key.partition("|")
        if not sep or not a or not b:
            raise SpecParseError(f"valuation key {key!r} is not of the form \"a|b\"")
        vals[(a, b)] = parse_scalar(str(value))
    return UltrametricPointSet(block["labels"], vals)


def _oracle_poly(obj: dict, points: UltrametricPointSet) -> FactoredPolynomial:
    block = obj["polynomial"]
    roots = [(str(label), int(mult)) for label, mult in block["roots"]]
    return FactoredPolynomial(points, parse_scalar(str(block["lead_val"])), roots)


def _oracle_ball(obj: dict) -> BallPoint:
    block = obj["ball"]
    return BallPoint(str(block["center"]), parse_scalar(str(block["rho"])))


def _oracle_guard(ctx: click.Context, fn):
    try:
        return fn()
    except SpecParseError as exc:
        _echo(f"parse error: {exc}", err=True)
        ctx.exit(1)
    except (KeyError, TypeError, ValueError) as exc:
        _echo(f"parse error: malformed oracle input ({type(exc).__name__}): {exc}", err=True)
        ctx.exit(1)
    except (AmbiguousTieError, DomainError, InconsistencyError, StructuralError) as exc:
        _echo(f"error: {exc}", err=True)
        ctx.exit(2)


@oracle.command()
@click.argument("data", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def val(ctx, data) -> None:
    """Minimal valuation of the polynomial on the ball."""

    def run():
        obj = _load_oracle_input(data)
        points = _oracle_points(obj)
        value = ball_valuation(_oracle_poly(obj, points), _oracle_ball(obj))
        _echo(f"ball_valuation = {format_scalar(value)}")
        _summary({"file": data, "value": format_scalar(value)})

    _oracle_guard(ctx, run)
    ctx.exit(0)


@oracle.command()
@click.argument("data", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def zeros(ctx, data) -> None:
    """Number of roots (with multiplicity) inside the closed ball."""

    def run():
        obj = _load_oracle_input(data)
        points = _oracle_points(obj)
        count = zeros_in_ball(_oracle_poly(obj, points), _oracle_ball(obj))
        _echo(f"zeros_in_ball = {count}")
        _summary({"file": data, "zeros": count})

    _oracle_guard(ctx, run)
    ctx.exit(0)


@oracle.command()
@click.argument("data", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def tree(ctx, data) -> None:
    """The tree of balls of the point set inside the given root radius."""

    def run():
        obj = _load_oracle_input(data)
        points = _oracle_points(obj)
        result = ball_tree(points, parse_scalar(str(obj["base"])))
        g = result.graph
        _echo(f"root: {result.root}")
        for vid in sorted(g.vertices):
            kind = g.vertices[vid].kind.value
            _echo(f"vertex {vid} [{kind}]")
        for eid in sorted(g.edges):
            e = g.edges[eid]
            _echo(f"edge {eid}: {e.v0} -- {e.v1} ({format_scalar(e.length)})")
        _summary({
            "edges": len(g.edges),
            "file": data,
            "root": result.root,
            "vertices": len(g.vertices),
        })

    _oracle_guard(ctx, run)
    ctx.exit(0)


@oracle.command()
@click.argument("data", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the induced cover document here instead of stdout.")
@click.pass_context
def induce(ctx, data, out) -> None:
    """Emit the decorated cover of ball trees induced by the given fibers.

    The output is a canonical cover document, ready for ``validate``,
    ``audit`` or ``export``.
    """

    def run():
        obj = _load_oracle_input(data)
        points = _oracle_points(obj)
        fibers = [
            Fiber(
                str(f["target_label"]),
                parse_scalar(str(f["lead_val"])),
                tuple((str(label), int(mult)) for label, mult in f["roots"]),
            )
            for f in obj["fibers"]
        ]
        insep = obj.get("insep_degrees")
        cover = induced_cover(
            points,
            fibers,
            parse_scalar(str(obj["base"])),
            residue_char=int(obj.get("residue_char", 0)),
            insep_degrees={str(k): int(v) for k, v in insep.items()} if insep else None,
        )
        wild = obj.get("wild_orders")
        doc = CoverDocument(
            cover,
            wild_orders={str(k): int(v) for k, v in wild.items()} if wild else None,
        )
        text = emit_document(doc)
        if out is not None:
            Path(out).write_text(text)
            _echo(f"wrote {out}")
        else:
            click.echo(text, nl=False, color=_color())

    _oracle_guard(ctx, run)
    ctx.exit(0)


# -- export ---------------------------------------------------------------------


@main.command()
@click.argument("spec", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the DOT text here instead of stdout.")
@click.option("--figure", type=click.Path(dir_okay=False), default=None,
              help="Also render the graphs to this image file.")
@click.pass_context
def export(ctx, spec, out, figure) -> None:
    """Render a document as Graphviz DOT (and optionally a figure)."""
    try:
        doc = _read_document(spec)
    except SpecParseError as exc:
        _echo(f"parse error: {exc}", err=True)
        ctx.exit(1)
    dot = to_dot(doc.cover)
    if out is not None:
        Path(out).write_text(dot)
        _echo(f"wrote {out}")
    else:
        click.echo(dot, nl=False, color=_color())
    if figure is not None:
        render_figure(doc.cover, figure)
        _echo(f"figure: {figure}", err=True)
    ctx.exit(0)


if __name__ == "__main__":
    main()
