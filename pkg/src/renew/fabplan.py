"""Fabrication artifacts derived from a renewal plan.

Turns the geometric diff into the things a workshop actually consumes:
a stencil cutting profile, an engraving profile with its per-iteration
depth schedule, a deposition plan, optional solder-mask removal areas,
design lint for renewal-specific hazards, and SVG / G-code exports.

All exports are pure functions of their inputs and byte-deterministic,
so the CLI and the HTTP service can serve identical artifacts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

from .diff import PlanMetrics, RenewalPlan, ViaPlan
from .geometry import (
    EMPTY,
    PolygonSet,
    PolylineSet,
    area,
    boolean_intersect,
    boolean_union,
    boundary_polylines,
    bounding_box,
    buffer_shape,
)
from .model import Board, Hole, mil_to_mm
from .sustain import SustainParams, engraving_depth, pass_count

# Epoxy traces narrower than this have failed outright in pour tests.
MIN_TRACK_WIDTH_MM = mil_to_mm(6.0)
# Recommended floor for nets that carry real current through epoxy.
HIGH_CURRENT_MIN_WIDTH_MM = mil_to_mm(20.0)

# From this renewal count onward, small pads and traces have been
# observed to start breaking at the copper/epoxy interface.
DEPTH_WARNING_ITERATION = 7

DEFAULT_BOARD_THICKNESS_MM = 1.6
DEFAULT_SAFE_Z_MM = 2.0


def depth_schedule(base_depth: float, iteration: int) -> tuple[float, tuple[str, ...]]:
    """Trace engraving depth for a renewal iteration, plus any warnings.

    Each renewal must cut 0.05 mm below the previous one to clear the
    old conductor plane, so the depth grows linearly with iteration.
    """
    if base_depth <= 0:
        raise ValueError("base engraving depth must be positive")
    depth = engraving_depth(base_depth, iteration)
    warnings: tuple[str, ...] = ()
    if iteration >= DEPTH_WARNING_ITERATION:
        warnings = (
            f"renewal iteration {iteration} engraves traces {depth:.2f} mm deep; "
            "small pads and traces have been observed to break from the "
            "seventh iteration onward, inspect conductors after engraving",
        )
    return depth, warnings


@dataclass(frozen=True)
class StencilProfile:
    """Cutting profile for a deposition stencil.

    The sheet matches the old board outline; the openings expose the
    groove areas that receive epoxy and never extend past the sheet.
    """

    sheet_outline: PolygonSet
    openings: PolygonSet

    @property
    def sheet_area(self) -> float:
        return area(self.sheet_outline)


def stencil_profile(plan: RenewalPlan, old_board: Board) -> StencilProfile:
    """Stencil for the deposit regions of ``plan`` on ``old_board``."""
    deposit_union = boolean_union(list(plan.deposit_regions.values()))
    openings = boolean_intersect(deposit_union, old_board.outline)
    return StencilProfile(sheet_outline=old_board.outline, openings=openings)


@dataclass(frozen=True)
class EngravingProfile:
    """Everything the engraving step needs: what to cut and how deep."""

    trace_regions: dict[str, PolygonSet]
    trace_depth: float
    drill_outs: tuple[Hole, ...]
    outline_cut: PolylineSet
    outline_depth: float

    def __post_init__(self) -> None:
        if self.trace_depth <= 0 or self.outline_depth <= 0:
            raise ValueError("engraving depths must be positive")


def engraving_profile(plan: RenewalPlan, new_board: Board,
                      outline_depth: float = DEFAULT_BOARD_THICKNESS_MM,
                      ) -> EngravingProfile:
    """Engraving profile for ``plan``: regions to cut one iteration deeper.

    The outline cut follows the trim-region boundary; vias absent from
    the new design are drilled out.
    """
    depth, _ = depth_schedule(new_board.base_engrave_depth,
                              plan.metrics.iteration)
    return EngravingProfile(
        trace_regions=dict(plan.engrave_regions),
        trace_depth=depth,
        drill_outs=tuple(plan.via_plan.drill_out),
        outline_cut=boundary_polylines(plan.trim_region),
        outline_depth=outline_depth,
    )


@dataclass(frozen=True)
class DepositionPlan:
    """Epoxy deposition paths with total length and a time estimate."""

    midlines: dict[str, PolylineSet]
    path_len_mm: float
    est_time_s: float


def deposition_plan(plan: RenewalPlan, params: SustainParams) -> DepositionPlan:
    """Deposition paths of ``plan`` timed at the params' deposition feed."""
    length = plan.metrics.deposit_path_len
    return DepositionPlan(midlines=dict(plan.deposit_midlines),
                          path_len_mm=length,
                          est_time_s=length / params.F_d)


def mask_removal_regions(plan: RenewalPlan,
                         board_has_mask: bool) -> dict[str, PolygonSet]:
    """Areas to raster off a solder mask before renewal can start.

    Factory boards arrive masked; both the fill areas and the regions
    to re-engrave must be bared first.  Unmasked boards need nothing.
    """
    if not board_has_mask:
        return {}
    regions: dict[str, PolygonSet] = {}
    for layer in plan.layers:
        merged = boolean_union([plan.deposit_regions.get(layer, EMPTY),
                                plan.engrave_regions.get(layer, EMPTY)])
        if not merged.is_empty:
            regions[layer] = merged
    return regions


@dataclass(frozen=True)
class LintFinding:
    severity: str  # "error" or "warning"
    rule: str
    location: str
    message: str


@dataclass(frozen=True)
class LintReport:
    findings: tuple[LintFinding, ...] = ()

    @property
    def has_errors(self) -> bool:
        return any(f.severity == "error" for f in self.findings)


def lint_renewal(plan: RenewalPlan, new_board: Board,
                 high_current_nets: tuple[int, ...] = ()) -> LintReport:
    """Renewal-specific design checks on the new board.

    Tracks thinner than 6 mil fail when they land on epoxy fill, so
    those are errors; high-current nets below 20 mil anywhere get a
    warning, as does a depth schedule past the proven iteration count.
    """
    findings: list[LintFinding] = []
    flagged = set(high_current_nets)
    for i, net in enumerate(new_board.nets):
        deposit = plan.deposit_regions.get(net.layer, EMPTY)
        for j, track in enumerate(net.tracks):
            location = f"nets[{i}].tracks[{j}]"
            if track.width < MIN_TRACK_WIDTH_MM and not deposit.is_empty:
                copper = buffer_shape(track, track.width / 2.0)
                if not boolean_intersect(copper, deposit).is_empty:
                    findings.append(LintFinding(
                        "error", "track-width-over-epoxy", location,
                        f"net {net.name!r} ({net.layer}) track is "
                        f"{track.width:.4f} mm wide, below the 0.1524 mm "
                        f"(6 mil) minimum for tracks crossing epoxy fill"))
            if net.id in flagged and track.width < HIGH_CURRENT_MIN_WIDTH_MM:
                findings.append(LintFinding(
                    "warning", "high-current-track-width", location,
                    f"net {net.name!r} ({net.layer}) is marked high-current "
                    f"but its track is {track.width:.4f} mm wide; 0.508 mm "
                    f"(20 mil) or more is recommended through epoxy"))
    _, depth_warnings = depth_schedule(new_board.base_engrave_depth,
                                       plan.metrics.iteration)
    for message in depth_warnings:
        findings.append(LintFinding("warning", "iteration-depth", "plan",
                                    message))
    return LintReport(findings=tuple(findings))


# ---------------------------------------------------------------------------
# SVG export

_SVG_PAD_MM = 2.0


def _fmt(value: float) -> str:
    text = f"{value:.4f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def _ring_path(ring) -> str:
    points = iter(ring)
    x0, y0 = next(points)
    parts = [f"M {_fmt(x0)} {_fmt(y0)}"]
    parts.extend(f"L {_fmt(x)} {_fmt(y)}" for x, y in points)
    parts.append("Z")
    return " ".join(parts)


def _polygon_path(shape: PolygonSet) -> str:
    rings = []
    for outer, holes in shape.polygons:
        rings.append(_ring_path(outer))
        rings.extend(_ring_path(hole) for hole in holes)
    return " ".join(rings)


def _polyline_path(lines: PolylineSet) -> str:
    parts = []
    for line in lines.polylines:
        points = iter(line)
        x0, y0 = next(points)
        parts.append(f"M {_fmt(x0)} {_fmt(y0)}")
        parts.extend(f"L {_fmt(x)} {_fmt(y)}" for x, y in points)
    return " ".join(parts)


def _merge_bbox(boxes: list[tuple[float, float, float, float]]):
    boxes = [b for b in boxes if b is not None]
    if not boxes:
        return None
    return (min(b[0] for b in boxes), min(b[1] for b in boxes),
            max(b[2] for b in boxes), max(b[3] for b in boxes))


def _bbox_of(subject) -> tuple[float, float, float, float] | None:
    if isinstance(subject, PolygonSet):
        if subject.is_empty:
            return None
        return bounding_box(subject)
    xs = [x for line in subject.polylines for x, _ in line]
    ys = [y for line in subject.polylines for _, y in line]
    if not xs:
        return None
    return (min(xs), min(ys), max(xs), max(ys))


def _svg_document(bbox, body: list[str]) -> bytes:
    if bbox is None:
        bbox = (0.0, 0.0, 10.0, 10.0)
    min_x = bbox[0] - _SVG_PAD_MM
    min_y = bbox[1] - _SVG_PAD_MM
    width = (bbox[2] - bbox[0]) + 2 * _SVG_PAD_MM
    height = (bbox[3] - bbox[1]) + 2 * _SVG_PAD_MM
    # Board coordinates are Y-up; SVG is Y-down. Flipping inside the
    # viewBox keeps path data in board coordinates.
    flip = 2 * min_y + height
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(width)}mm" height="{_fmt(height)}mm" '
        f'viewBox="{_fmt(min_x)} {_fmt(min_y)} {_fmt(width)} {_fmt(height)}">',
        f'<g transform="translate(0 {_fmt(flip)}) scale(1 -1)">',
    ]
    lines.extend(body)
    lines.append("</g>")
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("ascii")


def _stencil_svg(profile: StencilProfile) -> bytes:
    body = []
    if not profile.sheet_outline.is_empty:
        body.append(f'<path id="sheet" d="{_polygon_path(profile.sheet_outline)}" '
                    'fill="none" stroke="#57606a" stroke-width="0.2"/>')
    if not profile.openings.is_empty:
        body.append(f'<path id="openings" d="{_polygon_path(profile.openings)}" '
                    'fill="#000000" fill-rule="evenodd" stroke="none"/>')
    return _svg_document(_bbox_of(profile.sheet_outline), body)


def _engraving_svg(profile: EngravingProfile) -> bytes:
    body = []
    boxes = []
    for layer, regions in profile.trace_regions.items():
        contours = boundary_polylines(regions)
        if not contours.polylines:
            continue
        boxes.append(_bbox_of(regions))
        body.append(f'<path id="engrave-{layer}" d="{_polyline_path(contours)}" '
                    'fill="none" stroke="#cf222e" stroke-width="0.15"/>')
    for k, hole in enumerate(profile.drill_outs):
        boxes.append((hole.position[0] - hole.drill / 2,
                      hole.position[1] - hole.drill / 2,
                      hole.position[0] + hole.drill / 2,
                      hole.position[1] + hole.drill / 2))
        body.append(f'<circle id="drill-{k}" cx="{_fmt(hole.position[0])}" '
                    f'cy="{_fmt(hole.position[1])}" r="{_fmt(hole.drill / 2)}" '
                    'fill="none" stroke="#24292f" stroke-width="0.15"/>')
    if profile.outline_cut.polylines:
        boxes.append(_bbox_of(profile.outline_cut))
        body.append(f'<path id="outline-cut" d="{_polyline_path(profile.outline_cut)}" '
                    'fill="none" stroke="#24292f" stroke-width="0.25"/>')
    return _svg_document(_merge_bbox(boxes), body)


def _overlay_svg(plan: RenewalPlan) -> bytes:
    body = [
        '<defs><pattern id="trim-hatch" width="2" height="2" '
        'patternUnits="userSpaceOnUse" patternTransform="rotate(45)">'
        '<rect width="2" height="2" fill="none"/>'
        '<line x1="0" y1="0" x2="0" y2="2" stroke="#57606a" stroke-width="0.4"/>'
        "</pattern></defs>"
    ]
    boxes = []
    if not plan.trim_region.is_empty:
        boxes.append(_bbox_of(plan.trim_region))
        body.append(f'<path id="trim" d="{_polygon_path(plan.trim_region)}" '
                    'fill="url(#trim-hatch)" fill-rule="evenodd" '
                    'stroke="#57606a" stroke-width="0.2"/>')
    for layer in plan.layers:
        deposit = plan.deposit_regions.get(layer, EMPTY)
        if not deposit.is_empty:
            boxes.append(_bbox_of(deposit))
            body.append(f'<path id="deposit-{layer}" d="{_polygon_path(deposit)}" '
                        'fill="#2da44e" fill-opacity="0.55" '
                        'fill-rule="evenodd" stroke="none"/>')
        engrave = plan.engrave_regions.get(layer, EMPTY)
        if not engrave.is_empty:
            boxes.append(_bbox_of(engrave))
            body.append(f'<path id="engrave-{layer}" d="{_polygon_path(engrave)}" '
                        'fill="#cf222e" fill-opacity="0.55" '
                        'fill-rule="evenodd" stroke="none"/>')
    for layer in plan.layers:
        conflict = plan.conflicts.regions.get(layer, EMPTY)
        if not conflict.is_empty:
            boxes.append(_bbox_of(conflict))
            body.append(f'<path id="conflict-{layer}" d="{_polygon_path(conflict)}" '
                        'fill="#ffd33d" fill-opacity="0.7" fill-rule="evenodd" '
                        'stroke="#d4a72c" stroke-width="0.2"/>')
    return _svg_document(_merge_bbox(boxes), body)


def export_svg(subject: Union[StencilProfile, EngravingProfile, RenewalPlan],
               ) -> bytes:
    """Render a profile or a whole-plan overlay as a standalone SVG."""
    if isinstance(subject, StencilProfile):
        return _stencil_svg(subject)
    if isinstance(subject, EngravingProfile):
        return _engraving_svg(subject)
    if isinstance(subject, RenewalPlan):
        return _overlay_svg(subject)
    raise TypeError(f"cannot render {type(subject).__name__} as SVG")


# ---------------------------------------------------------------------------
# G-code export

@dataclass(frozen=True)
class MachineParams:
    """Engraver settings for G-code emission."""

    feed_xy_mm_min: float = 300.0
    stepdown_mm: float = 0.15
    safe_z_mm: float = DEFAULT_SAFE_Z_MM

    def __post_init__(self) -> None:
        if (self.feed_xy_mm_min <= 0 or self.stepdown_mm <= 0
                or self.safe_z_mm <= 0):
            raise ValueError("machine parameters must be positive")


def _cut_polyline(lines: list[str], polyline, depth: float,
                  machine: MachineParams, passes: int) -> None:
    feed = _fmt(machine.feed_xy_mm_min)
    safe = _fmt(machine.safe_z_mm)
    for n in range(1, passes + 1):
        z = -min(depth, n * machine.stepdown_mm)
        start_x, start_y = polyline[0]
        lines.append(f"G0 X{_fmt(start_x)} Y{_fmt(start_y)}")
        lines.append(f"G1 Z{_fmt(z)} F{feed}")
        for x, y in polyline[1:]:
            lines.append(f"G1 X{_fmt(x)} Y{_fmt(y)}")
        lines.append(f"G0 Z{safe}")


def export_gcode(profile: EngravingProfile, machine: MachineParams) -> bytes:
    """Minimal linear-move G-code for an engraving profile.

    Millimeter units, absolute coordinates.  Each contour is traced
    once per stepdown pass; drill-outs are single plunge cycles through
    the board; the outline cut runs last so the part stays put.
    """
    safe = _fmt(machine.safe_z_mm)
    lines = ["G21", "G90", f"G0 Z{safe}"]
    trace_passes = pass_count(profile.trace_depth, machine.stepdown_mm)
    for layer, regions in profile.trace_regions.items():
        contours = boundary_polylines(regions)
        if not contours.polylines:
            continue
        lines.append(f"; traces {layer} depth {_fmt(profile.trace_depth)} "
                     f"in {trace_passes} pass(es)")
        for polyline in contours.polylines:
            _cut_polyline(lines, polyline, profile.trace_depth, machine,
                          trace_passes)
    if profile.drill_outs:
        lines.append(f"; drill-outs depth {_fmt(profile.outline_depth)}")
        for hole in profile.drill_outs:
            lines.append(f"G0 X{_fmt(hole.position[0])} Y{_fmt(hole.position[1])}")
            lines.append(f"G1 Z{_fmt(-profile.outline_depth)} "
                         f"F{_fmt(machine.feed_xy_mm_min)}")
            lines.append(f"G0 Z{safe}")
    if profile.outline_cut.polylines:
        outline_passes = pass_count(profile.outline_depth, machine.stepdown_mm)
        lines.append(f"; outline depth {_fmt(profile.outline_depth)} "
                     f"in {outline_passes} pass(es)")
        for polyline in profile.outline_cut.polylines:
            _cut_polyline(lines, polyline, profile.outline_depth, machine,
                          outline_passes)
    lines.append("M2")
    return ("\n".join(lines) + "\n").encode("ascii")


# ---------------------------------------------------------------------------
# Plan serialization

def _round_point(point) -> list[float]:
    return [round(point[0], 6), round(point[1], 6)]


def _polygons_payload(shape: PolygonSet) -> list[dict]:
    return [
        {"outer": [_round_point(p) for p in outer],
         "holes": [[_round_point(p) for p in hole] for hole in holes]}
        for outer, holes in shape.polygons
    ]


def _polylines_payload(lines: PolylineSet) -> list[list[list[float]]]:
    return [[_round_point(p) for p in line] for line in lines.polylines]


def _via_payload(via) -> dict:
    return {"position": _round_point(via.position), "drill": via.drill,
            "diameter": via.diameter, "layerSpan": list(via.layer_span)}


def _via_plan_payload(via_plan: ViaPlan) -> dict:
    return {
        "keep": [_via_payload(v) for v in via_plan.keep],
        "drillOut": [{"position": _round_point(h.position), "drill": h.drill}
                     for h in via_plan.drill_out],
        "addManual": [_via_payload(v) for v in via_plan.add_manual],
    }


def plan_artifacts(plan: RenewalPlan, old_board: Board, new_board: Board,
                   params: SustainParams) -> dict[str, bytes]:
    """Every fabrication artifact for a plan, keyed by file name.

    Both the CLI and the HTTP service emit artifacts through this one
    function so the two surfaces stay byte-identical.
    """
    stencil = stencil_profile(plan, old_board)
    engraving = engraving_profile(plan, new_board, outline_depth=params.d_o)
    machine = MachineParams(feed_xy_mm_min=params.F_t,
                            stepdown_mm=params.dz_t,
                            safe_z_mm=DEFAULT_SAFE_Z_MM)
    return {
        "plan.json": render_plan_json(plan),
        "stencil.svg": export_svg(stencil),
        "engrave.svg": export_svg(engraving),
        "engrave.gcode": export_gcode(engraving, machine),
        "overlay.svg": export_svg(plan),
    }


def metrics_payload(metrics: PlanMetrics) -> dict:
    """Plan metrics as the wire-format dict shared by plan.json and the
    comparison endpoint."""
    return {
        "grooveArea": metrics.groove_area,
        "depositPathLen": metrics.deposit_path_len,
        "engravePathLen": metrics.engrave_path_len,
        "oldOutlineLen": metrics.old_outline_len,
        "newOutlineLen": metrics.new_outline_len,
        "stencilCutLen": metrics.stencil_cut_len,
        "oldPadCount": metrics.old_pad_count,
        "iteration": metrics.iteration,
        "benchmarkTraceLen": metrics.benchmark_trace_len,
        "trimCutLen": metrics.trim_cut_len,
    }


def render_plan_json(plan: RenewalPlan) -> bytes:
    """Serialize a renewal plan deterministically for the plan.json artifact."""
    payload = {
        "layers": list(plan.layers),
        "metrics": metrics_payload(plan.metrics),
        "viaPlan": _via_plan_payload(plan.via_plan),
        "conflicts": {
            "messages": list(plan.conflicts.messages),
            "regions": {layer: _polygons_payload(regions)
                        for layer, regions in sorted(plan.conflicts.regions.items())},
        },
        "trimRegion": _polygons_payload(plan.trim_region),
        "deposit": {layer: _polygons_payload(plan.deposit_regions[layer])
                    for layer in plan.layers if layer in plan.deposit_regions},
        "engrave": {layer: _polygons_payload(plan.engrave_regions[layer])
                    for layer in plan.layers if layer in plan.engrave_regions},
        "depositMidlines": {layer: _polylines_payload(plan.deposit_midlines[layer])
                            for layer in plan.layers
                            if layer in plan.deposit_midlines},
        "engraveMidlines": {layer: _polylines_payload(plan.engrave_midlines[layer])
                            for layer in plan.layers
                            if layer in plan.engrave_midlines},
    }
    return (json.dumps(payload, indent=2, ensure_ascii=True) + "\n").encode()
