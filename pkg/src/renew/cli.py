"""Command-line front end for the renewal pipeline.

Exit codes: 0 success, 1 error, 2 completed with conflicts (artifacts
are still written so the conflicts can be inspected in the overlay).
All file outputs are written atomically and are byte-identical across
repeated runs on identical inputs.
"""

from __future__ import annotations

import os
import sys
import tempfile

import click

from .diff import IDENTITY, AlignmentSpec, RenewalPlan, run_renewal
from .fabplan import plan_artifacts
from .ingest import BoardParseError, ParseDiagnostic, parse_canonical_json, parse_sexpr_board
from .model import Board
from .sustain import (
    SustainParams,
    SustainabilityReport,
    analyze,
    load_params,
    params_from_mapping,
    render_report_json,
)

PARAMS_ENV_VAR = "RENEW_PARAMS"


class CliError(Exception):
    """Operational failure that maps to exit code 1."""


def _load_board(path: str) -> tuple[Board, list[ParseDiagnostic]]:
    """Parse a board file, picking the format from the extension."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}") from None
    try:
        if path.endswith(".json"):
            diagnostics: list[ParseDiagnostic] = []
            board = parse_canonical_json(data, diagnostics)
            return board, diagnostics
        return parse_sexpr_board(data)
    except BoardParseError as exc:
        raise CliError(f"{path}: {exc}") from None


def _parse_alignment(text: str) -> AlignmentSpec:
    if text == "none":
        return AlignmentSpec.explicit(IDENTITY)
    if text.startswith("bbox-"):
        try:
            return AlignmentSpec.bbox_corner(text[len("bbox-"):].upper())
        except ValueError as exc:
            raise CliError(str(exc)) from None
    if text.startswith("footprint:"):
        ref = text[len("footprint:"):]
        if not ref:
            raise CliError("footprint alignment needs a reference, "
                           "e.g. footprint:U1")
        return AlignmentSpec.footprint_center(ref, ref)
    raise CliError(f"unknown alignment {text!r}; expected none, bbox-bl or "
                   "footprint:REF")


def _parse_layers(text: str | None, old_board: Board) -> tuple[str, ...]:
    if text is None:
        return old_board.layers
    layers = tuple(part.strip() for part in text.split(",") if part.strip())
    if not layers:
        raise CliError("--layers must name at least one layer")
    return layers


def _gather_params(params_path: str | None,
                   overrides: tuple[str, ...]) -> SustainParams:
    """Defaults, then $RENEW_PARAMS, then --params, then --set, last wins."""
    params = SustainParams()
    env_path = os.environ.get(PARAMS_ENV_VAR)
    try:
        if env_path:
            params = load_params(env_path, params)
        if params_path:
            params = load_params(params_path, params)
        if overrides:
            values = {}
            for item in overrides:
                key, sep, raw = item.partition("=")
                if not sep or not key:
                    raise CliError(f"--set expects key=value, got {item!r}")
                try:
                    values[key] = float(raw)
                except ValueError:
                    raise CliError(f"--set {key}: {raw!r} is not a number") \
                        from None
            params = params_from_mapping(values, params)
    except OSError as exc:
        raise CliError(f"{exc.filename or env_path}: {exc.strerror or exc}") \
            from None
    except ValueError as exc:
        raise CliError(str(exc)) from None
    return params


def _write_artifacts(out_dir: str, artifacts: dict[str, bytes]) -> None:
    """Write each artifact via a temp file rename so readers never see
    a partially written profile."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        for name, data in artifacts.items():
            fd, tmp_path = tempfile.mkstemp(dir=out_dir, prefix=f".{name}.")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(data)
                os.replace(tmp_path, os.path.join(out_dir, name))
            except BaseException:
                os.unlink(tmp_path)
                raise
    except OSError as exc:
        raise CliError(f"{out_dir}: {exc.strerror or exc}") from None


def _echo_diagnostics(path: str, diagnostics: list[ParseDiagnostic]) -> None:
    for diag in diagnostics:
        click.echo(f"{path}:{diag.line}: {diag.severity}: {diag.message}",
                   err=True)


def _compute_plan(old_path: str, new_path: str, layers: str | None,
                  align: str) -> tuple[RenewalPlan, Board, Board]:
    old_board, old_diags = _load_board(old_path)
    new_board, new_diags = _load_board(new_path)
    _echo_diagnostics(old_path, old_diags)
    _echo_diagnostics(new_path, new_diags)
    spec = _parse_alignment(align)
    selected = _parse_layers(layers, old_board)
    try:
        plan = run_renewal(old_board, new_board, spec, selected)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    return plan, old_board, new_board


def _finish(plan: RenewalPlan) -> int:
    if plan.conflicts.is_empty:
        return 0
    for message in plan.conflicts.messages:
        click.echo(f"conflict: {message}", err=True)
    return 2


@click.group()
def main() -> None:
    """Diff two board revisions and plan substrate renewal."""


@main.command("diff")
@click.option("--old", "old_path", required=True,
              help="Previous board revision (.json or KiCad s-expression).")
@click.option("--new", "new_path", required=True,
              help="New board revision.")
@click.option("--layers", default=None,
              help="Comma-separated copper layers (default: old board's).")
@click.option("--align", default="none", show_default=True,
              help="none, bbox-bl (or -br/-tl/-tr), or footprint:REF.")
@click.option("--out", "out_dir", required=True,
              help="Directory for the fabrication artifacts.")
@click.pass_context
def cmd_diff(ctx: click.Context, old_path: str, new_path: str,
             layers: str | None, align: str, out_dir: str) -> None:
    """Write plan.json, stencil.svg, engrave.svg, engrave.gcode and
    overlay.svg for the renewal of OLD into NEW."""
    try:
        plan, old_board, new_board = _compute_plan(old_path, new_path,
                                                   layers, align)
        params = _gather_params(None, ())
        artifacts = plan_artifacts(plan, old_board, new_board, params)
        _write_artifacts(out_dir, artifacts)
    except CliError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(1)
    ctx.exit(_finish(plan))


def _print_report_table(report: SustainabilityReport) -> None:
    click.echo("material")
    click.echo(f"  epoxy mass      {report.epoxy_mass_mg:14.3f} mg")
    click.echo(f"  stencil area    {report.stencil_area_mm2:14.3f} mm^2")
    click.echo(f"  substrate saved {report.fr4_area_saved_mm2:14.3f} mm^2")
    click.echo(f"  cost delta      {report.cost_delta:14.3f}")
    click.echo("time and energy")
    click.echo(f"  time new        {report.time_new_s:14.3f} s")
    click.echo(f"  time delta      {report.time_delta_s:14.3f} s")
    click.echo(f"  energy delta    {report.energy_delta_j:14.3f} J")
    click.echo("per stage               time s       energy J")
    for name, stage in report.per_stage.items():
        click.echo(f"  {name:<14}{stage.time_s:14.3f} {stage.energy_j:14.3f}")
    for note in report.notes:
        click.echo(f"note: {note}")


@main.command("analyze")
@click.option("--old", "old_path", required=True)
@click.option("--new", "new_path", required=True)
@click.option("--layers", default=None,
              help="Comma-separated copper layers (default: old board's).")
@click.option("--align", default="none", show_default=True)
@click.option("--params", "params_path", default=None,
              help="JSON file of process parameter overrides.")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
              help="Single parameter override; wins over --params.")
@click.option("--out", "out_dir", required=True)
@click.pass_context
def cmd_analyze(ctx: click.Context, old_path: str, new_path: str,
                layers: str | None, align: str, params_path: str | None,
                overrides: tuple[str, ...], out_dir: str) -> None:
    """Write report.json comparing renewal against fresh fabrication
    and print the numbers as a table."""
    try:
        plan, old_board, new_board = _compute_plan(old_path, new_path,
                                                   layers, align)
        params = _gather_params(params_path, overrides)
        report = analyze(plan, old_board, new_board, params)
        _write_artifacts(out_dir, {"report.json": render_report_json(report)})
    except CliError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(1)
    _print_report_table(report)
    ctx.exit(_finish(plan))


@main.command("validate")
@click.argument("path")
@click.pass_context
def cmd_validate(ctx: click.Context, path: str) -> None:
    """Parse a board file and report whether it is usable."""
    try:
        board, diagnostics = _load_board(path)
    except CliError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(1)
    _echo_diagnostics(path, diagnostics)
    click.echo(f"ok: {board.name}: {len(board.nets)} nets on "
               f"{len(board.layers)} layer(s)")
    ctx.exit(0)


@main.command("serve")
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
def cmd_serve(port: int, host: str) -> None:
    """Run the HTTP service (and the browser UI, when built)."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
