"""Fabrication-artifact tests: profiles, lint, SVG and G-code exports.

G-code assertions parse the emitted program with a tiny interpreter and
measure actual XY travel, so pass counts and path lengths are checked
against the geometry rather than against string templates.
"""

import json
import math
import re

import pytest

from conftest import make_board, plan_with, rect_ring, simple_net, square_outline
from renew.diff import IDENTITY, AlignmentSpec, ConflictReport, ViaPlan, run_renewal
from renew.geometry import (
    EMPTY,
    PolygonSet,
    PolylineSet,
    area,
    boolean_subtract,
    boundary_polylines,
    disc,
    path_length,
)
from renew.model import Hole, Net, Track, Via, mil_to_mm
from renew.fabplan import (
    DEPTH_WARNING_ITERATION,
    EngravingProfile,
    MachineParams,
    StencilProfile,
    deposition_plan,
    depth_schedule,
    engraving_profile,
    export_gcode,
    export_svg,
    lint_renewal,
    mask_removal_regions,
    render_plan_json,
    stencil_profile,
)
from renew.sustain import SustainParams

DEFAULTS = SustainParams()


def rect_set(x: float, y: float, w: float, h: float) -> PolygonSet:
    return PolygonSet.from_rings([rect_ring(x, y, w, h)])


def one_track_moved():
    """Board pair differing in a single rerouted track."""
    old = make_board(name="old", nets=(simple_net(1),
                                       simple_net(2, x0=10.0, y0=30.0)))
    new = make_board(name="new", nets=(simple_net(1),
                                       simple_net(2, x0=10.0, y0=33.0)))
    plan = run_renewal(old, new, AlignmentSpec.explicit(IDENTITY), old.layers)
    return old, new, plan


def gcode_moves(program: bytes):
    """Yield (command, axis words) for each motion line."""
    for raw in program.decode("ascii").splitlines():
        line = raw.split(";")[0].strip()
        if not line.startswith(("G0 ", "G1 ")):
            continue
        head, *words = line.split()
        yield head, {w[0]: float(w[1:]) for w in words}


def xy_travel_by_depth(program: bytes) -> dict[float, float]:
    """Cutting travel (G1 with XY below Z=0) accumulated per depth."""
    x = y = 0.0
    z = None
    totals: dict[float, float] = {}
    for cmd, words in gcode_moves(program):
        nx = words.get("X", x)
        ny = words.get("Y", y)
        nz = words.get("Z", z)
        if (cmd == "G1" and ("X" in words or "Y" in words)
                and z is not None and z < 0):
            totals[z] = totals.get(z, 0.0) + math.hypot(nx - x, ny - y)
        x, y, z = nx, ny, nz
    return totals


def plunges(program: bytes) -> list[float]:
    """Depths of pure-Z G1 moves, in program order."""
    return [words["Z"] for cmd, words in gcode_moves(program)
            if cmd == "G1" and "Z" in words and "X" not in words
            and "Y" not in words]


class TestDepthSchedule:
    def test_first_iteration_is_base(self):
        assert depth_schedule(0.15, 1) == (0.15, ())

    def test_second_iteration_steps_down(self):
        depth, warnings = depth_schedule(0.15, 2)
        assert depth == pytest.approx(0.20, rel=1e-9)
        assert warnings == ()

    def test_seventh_iteration_warns(self):
        depth, warnings = depth_schedule(0.15, 7)
        assert depth == pytest.approx(0.45, rel=1e-9)
        assert len(warnings) == 1
        assert "seventh" in warnings[0]
        assert "0.45" in warnings[0]

    def test_warning_threshold_is_seven(self):
        assert depth_schedule(0.15, 6)[1] == ()
        assert depth_schedule(0.15, 8)[1] != ()

    def test_strictly_increasing_with_slope(self):
        depths = [depth_schedule(0.15, n)[0] for n in range(1, 11)]
        steps = [b - a for a, b in zip(depths, depths[1:])]
        assert steps == pytest.approx([0.05] * 9, rel=1e-9)

    @pytest.mark.parametrize("base,iteration", [(0.15, 0), (0.15, -1),
                                                (0.0, 1), (-0.1, 2)])
    def test_invalid_inputs_rejected(self, base, iteration):
        with pytest.raises(ValueError):
            depth_schedule(base, iteration)


class TestStencilProfile:
    def test_empty_diff_keeps_sheet_without_openings(self):
        board = make_board(nets=(simple_net(),))
        plan = run_renewal(board, board, AlignmentSpec.explicit(IDENTITY),
                           board.layers)
        profile = stencil_profile(plan, board)
        assert profile.openings.is_empty
        assert profile.sheet_area == pytest.approx(2500.0, rel=1e-9)

    def test_ribbon_inside_sheet_opens_equal_area(self):
        board = make_board(nets=(simple_net(),))
        plan = plan_with(deposit_regions={"F.Cu": rect_set(10, 20, 30, 2)})
        profile = stencil_profile(plan, board)
        assert area(profile.openings) == pytest.approx(60.0, rel=1e-9)

    def test_ribbon_crossing_sheet_edge_is_clipped(self):
        # 20 x 2 ribbon starting at x=40 on a 50-wide sheet: only the
        # 10 x 2 part inside the sheet may be cut.
        board = make_board(nets=(simple_net(),))
        plan = plan_with(deposit_regions={"F.Cu": rect_set(40, 20, 20, 2)})
        profile = stencil_profile(plan, board)
        assert area(profile.openings) == pytest.approx(20.0, rel=1e-9)

    def test_openings_always_inside_sheet(self):
        old, _, plan = one_track_moved()
        profile = stencil_profile(plan, old)
        overhang = boolean_subtract(profile.openings, profile.sheet_outline)
        assert area(overhang) < 1e-9

    def test_multi_layer_deposits_merge_into_one_stencil(self):
        board = make_board(nets=(simple_net(),), layers=("F.Cu", "B.Cu"))
        plan = plan_with(deposit_regions={"F.Cu": rect_set(10, 20, 4, 2),
                                          "B.Cu": rect_set(30, 20, 4, 2)},
                         layers=("F.Cu", "B.Cu"))
        profile = stencil_profile(plan, board)
        assert area(profile.openings) == pytest.approx(16.0, rel=1e-9)


class TestEngravingProfile:
    def test_empty_plan_keeps_base_depth(self):
        board = make_board(nets=(simple_net(),))
        profile = engraving_profile(plan_with(), board)
        assert profile.trace_depth == 0.15
        assert profile.trace_regions == {}
        assert profile.drill_outs == ()
        assert profile.outline_cut.is_empty

    def test_first_renewal_cuts_one_step_deeper(self):
        _, new, plan = one_track_moved()
        profile = engraving_profile(plan, new)
        assert plan.metrics.iteration == 2
        assert profile.trace_depth == pytest.approx(0.20, rel=1e-9)
        assert profile.trace_regions == plan.engrave_regions

    def test_removed_via_becomes_drill_out(self):
        board = make_board(nets=(simple_net(),))
        hole = Hole((22.0, 22.0), 0.8)
        plan = plan_with(via_plan=ViaPlan(drill_out=(hole,)), iteration=2)
        profile = engraving_profile(plan, board)
        assert profile.drill_outs == (hole,)

    def test_outline_cut_follows_trim_region(self):
        trim = rect_set(40, 0, 10, 50)
        plan = plan_with(trim_region=trim, iteration=2)
        board = make_board(nets=(simple_net(),))
        profile = engraving_profile(plan, board)
        assert path_length(profile.outline_cut) == pytest.approx(120.0, rel=1e-9)

    def test_depth_errors_propagate(self):
        board = make_board(nets=(simple_net(),))
        with pytest.raises(ValueError):
            engraving_profile(plan_with(iteration=0), board)

    @pytest.mark.parametrize("kw", [{"trace_depth": 0.0},
                                    {"outline_depth": -1.0}])
    def test_nonpositive_depths_rejected(self, kw):
        values = dict(trace_regions={}, trace_depth=0.2, drill_outs=(),
                      outline_cut=PolylineSet(), outline_depth=1.6)
        values.update(kw)
        with pytest.raises(ValueError):
            EngravingProfile(**values)


class TestDepositionPlan:
    def test_empty_plan_takes_no_time(self):
        result = deposition_plan(plan_with(), DEFAULTS)
        assert result.est_time_s == 0.0

    def test_default_feed_rate(self):
        # 300 mm at 3 mm/s.
        result = deposition_plan(plan_with(deposit_path_len=300.0), DEFAULTS)
        assert result.path_len_mm == 300.0
        assert result.est_time_s == pytest.approx(100.0, rel=1e-9)

    def test_linear_in_length(self):
        one = deposition_plan(plan_with(deposit_path_len=120.0), DEFAULTS)
        two = deposition_plan(plan_with(deposit_path_len=240.0), DEFAULTS)
        assert two.est_time_s == pytest.approx(2.0 * one.est_time_s, rel=1e-9)

    def test_midlines_pass_through(self):
        lines = {"F.Cu": PolylineSet((((0.0, 0.0), (3.0, 4.0)),))}
        plan = plan_with(deposit_midlines=lines, deposit_path_len=5.0)
        assert deposition_plan(plan, DEFAULTS).midlines == lines


class TestMaskRemoval:
    def test_unmasked_board_needs_nothing(self):
        plan = plan_with(deposit_regions={"F.Cu": rect_set(10, 10, 4, 2)})
        assert mask_removal_regions(plan, board_has_mask=False) == {}

    def test_empty_diff_needs_nothing(self):
        assert mask_removal_regions(plan_with(), board_has_mask=True) == {}

    def test_disjoint_regions_add(self):
        plan = plan_with(deposit_regions={"F.Cu": rect_set(10, 10, 4, 2)},
                         engrave_regions={"F.Cu": rect_set(30, 30, 2, 2)})
        regions = mask_removal_regions(plan, board_has_mask=True)
        assert set(regions) == {"F.Cu"}
        assert area(regions["F.Cu"]) == pytest.approx(8.0 + 4.0, rel=1e-9)


def lint_board(width_mm: float, net_id: int = 1):
    net = Net(net_id, "sig", "F.Cu",
              tracks=(Track((10.0, 10.0), (20.0, 10.0), width_mm),))
    return make_board(nets=(net,))


class TestLintRenewal:
    def deposit_under_track(self):
        return {"F.Cu": rect_set(8.0, 9.0, 14.0, 2.0)}

    def test_five_mil_track_over_epoxy_is_an_error(self):
        board = lint_board(mil_to_mm(5.0))
        plan = plan_with(deposit_regions=self.deposit_under_track())
        report = lint_renewal(plan, board)
        assert report.has_errors
        finding = report.findings[0]
        assert finding.rule == "track-width-over-epoxy"
        assert finding.location == "nets[0].tracks[0]"

    def test_sixteen_mil_low_current_track_is_clean(self):
        board = lint_board(mil_to_mm(16.0))
        plan = plan_with(deposit_regions=self.deposit_under_track())
        assert lint_renewal(plan, board).findings == ()

    def test_twelve_mil_high_current_track_warns(self):
        board = lint_board(mil_to_mm(12.0), net_id=7)
        plan = plan_with(deposit_regions=self.deposit_under_track())
        report = lint_renewal(plan, board, high_current_nets=(7,))
        assert not report.has_errors
        assert [f.rule for f in report.findings] == ["high-current-track-width"]

    def test_thin_track_away_from_epoxy_is_not_an_error(self):
        board = lint_board(mil_to_mm(5.0))
        plan = plan_with(deposit_regions={"F.Cu": rect_set(40, 40, 4, 2)})
        assert lint_renewal(plan, board).findings == ()

    def test_late_iteration_repeats_depth_warning(self):
        board = lint_board(mil_to_mm(16.0))
        plan = plan_with(iteration=DEPTH_WARNING_ITERATION)
        report = lint_renewal(plan, board)
        assert [f.rule for f in report.findings] == ["iteration-depth"]
        assert report.findings[0].severity == "warning"


class TestExportSvg:
    def test_empty_profile_has_no_paths(self):
        svg = export_svg(StencilProfile(sheet_outline=EMPTY, openings=EMPTY))
        text = svg.decode("ascii")
        assert text.startswith("<?xml")
        assert "<svg " in text
        assert "<path" not in text

    def test_square_opening_is_one_closed_path(self):
        profile = StencilProfile(sheet_outline=square_outline(50.0),
                                 openings=rect_set(10, 10, 5, 5))
        match = re.search(rb'id="openings" d="([^"]*)"', export_svg(profile))
        assert match is not None
        d = match.group(1).decode("ascii")
        assert d.count("M") == 1
        assert d.count("L") == 3
        assert d.endswith("Z")

    def test_viewbox_and_y_flip(self):
        profile = StencilProfile(sheet_outline=square_outline(50.0),
                                 openings=EMPTY)
        text = export_svg(profile).decode("ascii")
        assert 'viewBox="-2 -2 54 54"' in text
        assert 'width="54mm" height="54mm"' in text
        assert 'transform="translate(0 50) scale(1 -1)"' in text

    def test_deterministic_bytes(self):
        old, new, plan = one_track_moved()
        stencil = stencil_profile(plan, old)
        engraving = engraving_profile(plan, new)
        for subject in (stencil, engraving, plan):
            assert export_svg(subject) == export_svg(subject)

    def test_engraving_svg_strokes_contours_and_drills(self):
        _, new, plan = one_track_moved()
        profile = engraving_profile(plan, new)
        profile = EngravingProfile(trace_regions=profile.trace_regions,
                                   trace_depth=profile.trace_depth,
                                   drill_outs=(Hole((5.0, 5.0), 0.8),),
                                   outline_cut=profile.outline_cut,
                                   outline_depth=1.6)
        text = export_svg(profile).decode("ascii")
        assert 'stroke="#cf222e"' in text
        assert text.count("<circle") == 1
        assert 'r="0.4"' in text

    def test_overlay_marks_conflicts_in_yellow(self):
        conflicts = ConflictReport(regions={"F.Cu": disc((5.0, 5.0), 1.0)},
                                   messages=("overlap",))
        plan = plan_with(deposit_regions={"F.Cu": rect_set(10, 10, 4, 2)},
                         conflicts=conflicts)
        text = export_svg(plan).decode("ascii")
        assert 'id="conflict-F.Cu"' in text
        assert '#ffd33d' in text
        assert 'id="deposit-F.Cu"' in text
        assert '#2da44e' in text

    def test_overlay_hatches_trim_region(self):
        plan = plan_with(trim_region=rect_set(40, 0, 10, 50))
        text = export_svg(plan).decode("ascii")
        assert 'id="trim"' in text
        assert 'fill="url(#trim-hatch)"' in text

    def test_unsupported_subject_rejected(self):
        with pytest.raises(TypeError):
            export_svg(42)


def trace_profile(depth: float = 0.20) -> EngravingProfile:
    return EngravingProfile(trace_regions={"F.Cu": rect_set(10, 10, 10, 10)},
                            trace_depth=depth, drill_outs=(),
                            outline_cut=PolylineSet(), outline_depth=1.6)


MACHINE = MachineParams(feed_xy_mm_min=300.0, stepdown_mm=0.15, safe_z_mm=2.0)


class TestExportGcode:
    def test_header_declares_units_and_absolute_mode(self):
        program = export_gcode(trace_profile(), MACHINE).decode("ascii")
        lines = program.splitlines()
        assert lines[0] == "G21"
        assert lines[1] == "G90"
        assert lines[2] == "G0 Z2"
        assert lines[-1] == "M2"

    def test_empty_profile_is_header_and_footer_only(self):
        profile = EngravingProfile(trace_regions={}, trace_depth=0.15,
                                   drill_outs=(), outline_cut=PolylineSet(),
                                   outline_depth=1.6)
        lines = export_gcode(profile, MACHINE).decode("ascii").splitlines()
        assert lines == ["G21", "G90", "G0 Z2", "M2"]

    def test_two_passes_for_depth_just_over_stepdown(self):
        # 0.20 over 0.15 stepdown: passes at Z-0.15 then Z-0.2.
        program = export_gcode(trace_profile(0.20), MACHINE)
        assert plunges(program) == [-0.15, -0.2]

    def test_pass_count_matches_guarded_ceiling(self):
        # Depth 0.45 arrives as 0.45000000000000007 after seven schedule
        # steps; three passes, not four.
        depth = depth_schedule(0.15, 7)[0]
        program = export_gcode(trace_profile(depth), MACHINE)
        assert plunges(program) == [-0.15, -0.3, -0.45]

    def test_xy_travel_per_pass_equals_contour_length(self):
        profile = trace_profile(0.20)
        expected = path_length(boundary_polylines(profile.trace_regions["F.Cu"]))
        travel = xy_travel_by_depth(export_gcode(profile, MACHINE))
        assert set(travel) == {-0.15, -0.2}
        for total in travel.values():
            assert total == pytest.approx(expected, abs=1e-6)

    def test_drill_outs_are_single_plunge_cycles(self):
        profile = EngravingProfile(trace_regions={}, trace_depth=0.15,
                                   drill_outs=(Hole((5.0, 5.0), 0.8),
                                               Hole((9.0, 5.0), 0.8)),
                                   outline_cut=PolylineSet(), outline_depth=1.6)
        program = export_gcode(profile, MACHINE)
        assert plunges(program) == [-1.6, -1.6]
        travel = xy_travel_by_depth(program)
        assert travel == {}

    def test_outline_cut_runs_last_with_through_passes(self):
        ring = rect_ring(0, 0, 30, 20)
        closed = tuple(ring) + (ring[0],)
        profile = EngravingProfile(trace_regions={"F.Cu": rect_set(5, 5, 4, 4)},
                                   trace_depth=0.15, drill_outs=(),
                                   outline_cut=PolylineSet((closed,)),
                                   outline_depth=1.6)
        program = export_gcode(profile, MACHINE)
        depths = plunges(program)
        # one trace pass, then ceil(1.6/0.15) = 11 outline passes
        assert depths[0] == -0.15
        assert len(depths) == 1 + 11
        assert depths[-1] == -1.6
        travel = xy_travel_by_depth(program)
        assert travel[-1.6] == pytest.approx(100.0, abs=1e-6)

    def test_deterministic_bytes(self):
        profile = trace_profile(0.20)
        assert export_gcode(profile, MACHINE) == export_gcode(profile, MACHINE)

    def test_invalid_machine_rejected(self):
        with pytest.raises(ValueError):
            MachineParams(stepdown_mm=0.0)


class TestRenderPlanJson:
    def full_plan(self):
        via = Via((44.0, 44.0), 0.3, 0.6, ("F.Cu", "B.Cu"))
        plan = plan_with(
            deposit_regions={"F.Cu": rect_set(10, 10, 4, 2)},
            engrave_regions={"F.Cu": rect_set(30, 30, 2, 2)},
            deposit_midlines={"F.Cu": PolylineSet((((10.0, 11.0), (14.0, 11.0)),))},
            via_plan=ViaPlan(keep=(via,), drill_out=(Hole((1.0, 2.0), 0.8),)),
            trim_region=rect_set(40, 0, 10, 50),
            conflicts=ConflictReport(regions={"F.Cu": disc((5.0, 5.0), 1.0)},
                                     messages=("net 'sig' (F.Cu) overlaps",)),
            groove_area=8.0, deposit_path_len=4.0, iteration=2)
        return plan

    def test_deterministic_bytes(self):
        plan = self.full_plan()
        assert render_plan_json(plan) == render_plan_json(plan)

    def test_payload_shape(self):
        data = json.loads(render_plan_json(self.full_plan()))
        assert data["layers"] == ["F.Cu"]
        assert data["metrics"]["grooveArea"] == 8.0
        assert data["metrics"]["iteration"] == 2
        assert data["viaPlan"]["keep"][0]["layerSpan"] == ["F.Cu", "B.Cu"]
        assert data["viaPlan"]["drillOut"] == [{"position": [1.0, 2.0],
                                                "drill": 0.8}]
        assert data["conflicts"]["messages"] == ["net 'sig' (F.Cu) overlaps"]
        assert len(data["deposit"]["F.Cu"]) == 1
        assert data["depositMidlines"]["F.Cu"] == [[[10.0, 11.0], [14.0, 11.0]]]

    def test_coordinates_rounded_to_micron_scale(self):
        data = json.loads(render_plan_json(self.full_plan()))
        for poly in data["conflicts"]["regions"]["F.Cu"]:
            for x, y in poly["outer"]:
                assert x == round(x, 6)
                assert y == round(y, 6)

    def test_empty_plan_serializes(self):
        data = json.loads(render_plan_json(plan_with()))
        assert data["deposit"] == {}
        assert data["trimRegion"] == []
        assert data["viaPlan"] == {"keep": [], "drillOut": [], "addManual": []}
