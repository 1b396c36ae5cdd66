"""Material, cost, time, and energy accounting for board renewal.

Compares two fabrication routes for one design revision: renewing the
existing substrate (fill the old grooves with conductive epoxy, engrave
the new pattern) versus engraving the design into a fresh blank.  Every
delta is signed so that a negative value favors renewal.

Units throughout: lengths mm, areas mm^2, masses mg, times s, powers W,
energies J.  The engraving feeds F_t and F_o are given in mm/min, the
usual machine-profile convention, and are converted to mm/s internally;
the deposition and laser feeds F_d and F_l are already mm/s.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, replace
from typing import Any, Mapping

from .diff import PlanMetrics, RenewalPlan
from .geometry import area
from .model import Board

# Each renewal pass must clear the previous copper plane, so the trace
# depth grows by this much per iteration.
ITERATION_DEPTH_STEP = 0.05

# Slack used when turning depth/stepdown ratios into pass counts: an
# exact multiple such as 0.45/0.15 lands at 3.0000000000000004 in
# floats, and a bare ceiling would schedule a phantom fourth pass.
_PASS_COUNT_GUARD = 1e-9

_SECONDS_PER_MINUTE = 60.0


@dataclass(frozen=True)
class SustainParams:
    """Process parameters for the renewal-versus-new comparison.

    Field names double as the keys of the JSON parameters file and of
    CLI ``--set`` / service overrides, so they keep the short
    machine-profile notation instead of long Python identifiers.

    rho_e                 epoxy density, mg/mm^3
    depositionDepthOffset extra fill depth on top of the groove, mm
    p_u_e                 epoxy unit price, currency/mg
    p_u_s                 stencil sheet unit price, currency/mm^2
    p_u_fr4               fresh substrate unit price, currency/mm^2
    F_t, F_o              trace / outline engraving feeds, mm/min
    dz_t, dz_o            trace / outline step-downs per pass, mm
    d_o                   board thickness, i.e. outline cut depth, mm
    F_d                   epoxy deposition feed, mm/s
    F_l                   stencil laser feed, mm/s
    T_de                  desoldering time, s
    t_p                   solder pad cleaning time, s per pad
    T_c                   epoxy cure time, s
    P_de, P_i, P_d,       device powers, W: desolder station, soldering
    P_c, P_l, P_e         iron, depositor, cure oven, laser, engraver
    """

    rho_e: float = 4.0
    depositionDepthOffset: float = 0.1
    p_u_e: float = 5e-4
    p_u_s: float = 1e-5
    p_u_fr4: float = 8e-4
    F_t: float = 300.0
    F_o: float = 180.0
    dz_t: float = 0.15
    dz_o: float = 0.4
    d_o: float = 1.6
    F_d: float = 3.0
    F_l: float = 20.0
    T_de: float = 60.0
    t_p: float = 6.0
    T_c: float = 900.0
    P_de: float = 22.0
    P_i: float = 21.5
    P_d: float = 0.0
    P_c: float = 22.0
    P_l: float = 8.0
    P_e: float = 47.0

    def __post_init__(self) -> None:
        for name in ("F_t", "F_o", "F_d", "F_l", "dz_t", "dz_o", "d_o"):
            if getattr(self, name) <= 0:
                raise ValueError(f"parameter {name} must be positive")
        for name in ("P_de", "P_i", "P_d", "P_c", "P_l", "P_e"):
            if getattr(self, name) < 0:
                raise ValueError(f"parameter {name} must be nonnegative")
        for name in ("rho_e", "depositionDepthOffset", "p_u_e", "p_u_s",
                     "p_u_fr4", "T_de", "t_p", "T_c"):
            if getattr(self, name) < 0:
                raise ValueError(f"parameter {name} must be nonnegative")


_PARAM_NAMES = tuple(f.name for f in fields(SustainParams))

# rho_e varies widely between epoxy products and the shipped default is
# only a mid-range placeholder; reports flag it until a caller confirms.
_PLACEHOLDER_DENSITY = SustainParams().rho_e
DENSITY_PLACEHOLDER_NOTE = (
    "epoxy density rho_e is the placeholder default "
    f"({_PLACEHOLDER_DENSITY:g} mg/mm^3); confirm it for the epoxy in use"
)


def params_from_mapping(values: Mapping[str, Any],
                        base: SustainParams | None = None) -> SustainParams:
    """Overlay ``values`` onto ``base`` (or the defaults).

    Keys must be SustainParams field names and values must be finite
    numbers; the merged result is re-validated.
    """
    unknown = sorted(set(values) - set(_PARAM_NAMES))
    if unknown:
        raise ValueError("unknown parameter(s): " + ", ".join(unknown))
    cleaned: dict[str, float] = {}
    for key, raw in values.items():
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ValueError(f"parameter {key} must be a number")
        if not math.isfinite(raw):
            raise ValueError(f"parameter {key} must be finite")
        cleaned[key] = float(raw)
    return replace(base or SustainParams(), **cleaned)


def load_params(path: str, base: SustainParams | None = None) -> SustainParams:
    """Read a JSON parameters file and overlay it onto ``base``."""
    with open(path, "rb") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"parameters file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ValueError(f"parameters file {path}: expected a JSON object")
    return params_from_mapping(data, base)


def pass_count(depth: float, stepdown: float) -> int:
    """Number of engraving passes needed to reach ``depth``."""
    if depth <= 0:
        raise ValueError("cut depth must be positive")
    if stepdown <= 0:
        raise ValueError("stepdown must be positive")
    return max(1, math.ceil(depth / stepdown - _PASS_COUNT_GUARD))


def engraving_depth(base_depth: float, iteration: int) -> float:
    """Trace engraving depth for the given renewal iteration (1-based)."""
    if iteration < 1:
        raise ValueError("iteration must be at least 1")
    return base_depth + ITERATION_DEPTH_STEP * (iteration - 1)


def epoxy_mass(groove_area: float, previous_depth: float,
               params: SustainParams) -> float:
    """Epoxy needed to refill the grooves, mg.

    The fill depth is the previous engraving depth plus the deposition
    offset that covers over-fill and leveling losses.
    """
    if previous_depth <= 0:
        raise ValueError("previous engraving depth must be positive")
    if groove_area < 0:
        raise ValueError("groove area must be nonnegative")
    return params.rho_e * groove_area * (previous_depth + params.depositionDepthOffset)


@dataclass(frozen=True)
class MaterialCost:
    """Raw material usage of both routes and the signed price difference."""

    epoxy_mass_mg: float
    stencil_area_mm2: float
    fr4_area_mm2: float
    cost_delta: float


def material_and_cost_delta(plan: RenewalPlan, old_board: Board,
                            new_board: Board,
                            params: SustainParams) -> MaterialCost:
    """Material usage and cost delta for renewing instead of starting fresh.

    Renewal consumes epoxy plus a stencil sheet sized to the old board;
    the fresh route consumes a blank sized to the new outline.  Negative
    ``cost_delta`` means renewal is cheaper.
    """
    previous_depth = engraving_depth(old_board.base_engrave_depth,
                                     old_board.iteration_index)
    mass = epoxy_mass(plan.metrics.groove_area, previous_depth, params)
    stencil_area = area(old_board.outline)
    fr4_area = area(new_board.outline)
    cost = (mass * params.p_u_e
            + stencil_area * params.p_u_s
            - fr4_area * params.p_u_fr4)
    return MaterialCost(mass, stencil_area, fr4_area, cost)


def _feed_mm_s(feed_mm_min: float) -> float:
    return feed_mm_min / _SECONDS_PER_MINUTE


def fabrication_time_new(trace_len: float, outline_len: float,
                         trace_depth: float, params: SustainParams) -> float:
    """Seconds to engrave the design into a fresh blank.

    Trace and outline cuts each run their full path once per stepdown
    pass; the outline is cut through the board thickness.
    """
    if trace_len < 0 or outline_len < 0:
        raise ValueError("path lengths must be nonnegative")
    total = 0.0
    if trace_len:
        total += (trace_len / _feed_mm_s(params.F_t)
                  * pass_count(trace_depth, params.dz_t))
    if outline_len:
        total += (outline_len / _feed_mm_s(params.F_o)
                  * pass_count(params.d_o, params.dz_o))
    return total


def _engrave_time_delta(metrics: PlanMetrics, params: SustainParams,
                        base_trace_depth: float) -> float:
    """Engraving machine time of renewal minus the fresh-blank benchmark.

    Renewal engraves only the changed regions, but one iteration deeper;
    its outline work is the substrate trim cut.  The benchmark engraves
    the whole new design at base depth and cuts the full new outline.
    """
    total = 0.0
    if metrics.engrave_path_len:
        depth = engraving_depth(base_trace_depth, metrics.iteration)
        total += (metrics.engrave_path_len / _feed_mm_s(params.F_t)
                  * pass_count(depth, params.dz_t))
    if metrics.benchmark_trace_len:
        total -= (metrics.benchmark_trace_len / _feed_mm_s(params.F_t)
                  * pass_count(base_trace_depth, params.dz_t))
    outline_len_delta = metrics.trim_cut_len - metrics.new_outline_len
    if outline_len_delta:
        total += (outline_len_delta / _feed_mm_s(params.F_o)
                  * pass_count(params.d_o, params.dz_o))
    return total


@dataclass(frozen=True)
class StageCost:
    time_s: float
    energy_j: float


# Fixed stage order of the report breakdown.
STAGE_NAMES = ("desolder", "clean", "deposit", "cure", "stencilCut",
               "engraveDelta")


def _stage_breakdown(metrics: PlanMetrics, params: SustainParams,
                     base_trace_depth: float) -> dict[str, StageCost]:
    """Per-stage time and energy of renewal relative to the benchmark.

    Five stages are renewal-only and carry positive costs; engraveDelta
    is the difference between renewal engraving and the benchmark's, so
    it may be negative.  Report totals are the plain sums of these.
    """
    desolder_t = params.T_de
    clean_t = metrics.old_pad_count * params.t_p
    deposit_t = metrics.deposit_path_len / params.F_d
    cure_t = params.T_c
    stencil_t = metrics.stencil_cut_len / params.F_l
    engrave_t = _engrave_time_delta(metrics, params, base_trace_depth)
    return {
        "desolder": StageCost(desolder_t, desolder_t * params.P_de),
        "clean": StageCost(clean_t, clean_t * params.P_i),
        "deposit": StageCost(deposit_t, deposit_t * params.P_d),
        "cure": StageCost(cure_t, cure_t * params.P_c),
        "stencilCut": StageCost(stencil_t, stencil_t * params.P_l),
        "engraveDelta": StageCost(engrave_t, engrave_t * params.P_e),
    }


def fabrication_time_delta(plan: RenewalPlan, params: SustainParams,
                           base_trace_depth: float) -> float:
    """Total renewal time minus fresh-blank fabrication time, seconds."""
    stages = _stage_breakdown(plan.metrics, params, base_trace_depth)
    return sum(stage.time_s for stage in stages.values())


def energy_delta(plan: RenewalPlan, params: SustainParams,
                 base_trace_depth: float) -> float:
    """Total renewal energy minus fresh-blank fabrication energy, joules."""
    stages = _stage_breakdown(plan.metrics, params, base_trace_depth)
    return sum(stage.energy_j for stage in stages.values())


@dataclass(frozen=True)
class SustainabilityReport:
    """Aggregate comparison of renewing versus engraving a fresh blank.

    ``per_stage`` keys follow STAGE_NAMES; the time and energy totals
    equal the sums over the breakdown by construction.
    """

    epoxy_mass_mg: float
    stencil_area_mm2: float
    fr4_area_saved_mm2: float
    cost_delta: float
    time_new_s: float
    time_delta_s: float
    energy_delta_j: float
    per_stage: dict[str, StageCost]
    notes: tuple[str, ...] = ()


def analyze(plan: RenewalPlan, old_board: Board, new_board: Board,
            params: SustainParams) -> SustainabilityReport:
    """Full sustainability comparison for a computed renewal plan."""
    materials = material_and_cost_delta(plan, old_board, new_board, params)
    base_depth = new_board.base_engrave_depth
    stages = _stage_breakdown(plan.metrics, params, base_depth)
    notes: tuple[str, ...] = ()
    if params.rho_e == _PLACEHOLDER_DENSITY:
        notes = (DENSITY_PLACEHOLDER_NOTE,)
    return SustainabilityReport(
        epoxy_mass_mg=materials.epoxy_mass_mg,
        stencil_area_mm2=materials.stencil_area_mm2,
        fr4_area_saved_mm2=materials.fr4_area_mm2,
        cost_delta=materials.cost_delta,
        time_new_s=fabrication_time_new(plan.metrics.benchmark_trace_len,
                                        plan.metrics.new_outline_len,
                                        base_depth, params),
        time_delta_s=sum(stage.time_s for stage in stages.values()),
        energy_delta_j=sum(stage.energy_j for stage in stages.values()),
        per_stage=stages,
        notes=notes,
    )


def report_payload(report: SustainabilityReport) -> dict[str, Any]:
    """Report as the wire-format dict shared by report.json and the
    analysis endpoint."""
    return {
        "epoxyMass": report.epoxy_mass_mg,
        "stencilArea": report.stencil_area_mm2,
        "fr4AreaSaved": report.fr4_area_saved_mm2,
        "costDelta": report.cost_delta,
        "timeNew": report.time_new_s,
        "timeDelta": report.time_delta_s,
        "energyDelta": report.energy_delta_j,
        "perStage": {
            name: {"time_s": stage.time_s, "energy_j": stage.energy_j}
            for name, stage in report.per_stage.items()
        },
        "notes": list(report.notes),
    }


def render_report_json(report: SustainabilityReport) -> bytes:
    """Serialize a report deterministically for the report.json artifact."""
    payload = report_payload(report)
    return (json.dumps(payload, indent=2, ensure_ascii=True) + "\n").encode()
