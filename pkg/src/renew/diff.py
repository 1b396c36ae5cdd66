"""Board comparison pipeline: alignment, net-level prefilter, isolation-path
construction and subtraction, via/hole planning, conflict detection, outline
trimming, and the orchestrating renewal computation.

The output of a comparison is a RenewalPlan: per-layer regions to cover with
conductive epoxy (deposit), regions to re-engrave (engrave), a via plan, a
substrate trim region, conflicts, and the length/area/count metrics the
sustainability model consumes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .geometry import (
    PolygonSet,
    apply_transform,
    PolylineSet,
    Transform,
    area,
    boolean_intersect,
    boolean_subtract,
    boolean_union,
    boundary_polylines,
    bounding_box,
    buffer_shape,
    disc,
    path_length,
)
from .model import (
    Board,
    Hole,
    LayerName,
    Net,
    NetMap,
    Pad,
    Track,
    Via,
    build_net_map,
    pad_count,
    transform_board,
)

log = logging.getLogger(__name__)

# Matching tolerance: far below the smallest fabricable feature, far above
# float noise.
MATCH_EPSILON = 1e-3

IDENTITY = Transform()

_CORNERS = ("BL", "BR", "TL", "TR")


@dataclass(frozen=True)
class AlignmentSpec:
    """How to bring the new design into the old board's coordinate frame."""

    mode: str  # bboxCorner | footprintCenter | explicitTransform
    corner: str = "BL"
    ref_old: str = ""
    ref_new: str = ""
    transform: Transform = IDENTITY

    @classmethod
    def bbox_corner(cls, corner: str = "BL") -> "AlignmentSpec":
        corner = corner.upper()
        if corner not in _CORNERS:
            raise ValueError(f"corner must be one of {_CORNERS}, got {corner!r}")
        return cls(mode="bboxCorner", corner=corner)

    @classmethod
    def footprint_center(cls, ref_old: str, ref_new: str) -> "AlignmentSpec":
        return cls(mode="footprintCenter", ref_old=ref_old, ref_new=ref_new)

    @classmethod
    def explicit(cls, transform: Transform) -> "AlignmentSpec":
        return cls(mode="explicitTransform", transform=transform)


@dataclass(frozen=True)
class ViaPlan:
    keep: tuple[Via, ...] = ()
    drill_out: tuple[Hole, ...] = ()
    add_manual: tuple[Via, ...] = ()


@dataclass(frozen=True)
class ConflictReport:
    regions: dict[LayerName, PolygonSet] = field(default_factory=dict)
    messages: tuple[str, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not self.messages


@dataclass(frozen=True)
class PlanMetrics:
    """Scalar summary of a renewal plan, all lengths mm, areas mm^2."""

    groove_area: float  # total area to fill with epoxy
    deposit_path_len: float  # midline length of deposit regions
    engrave_path_len: float  # midline length of regions engraved on renewal
    old_outline_len: float
    new_outline_len: float
    stencil_cut_len: float  # contour length of deposit regions
    old_pad_count: int
    iteration: int  # renewal count of the resulting board
    benchmark_trace_len: float  # midline length if the new design were milled fresh
    trim_cut_len: float  # contour length of the substrate trim region


@dataclass(frozen=True)
class RenewalPlan:
    deposit_regions: dict[LayerName, PolygonSet]
    engrave_regions: dict[LayerName, PolygonSet]
    deposit_midlines: dict[LayerName, PolylineSet]
    engrave_midlines: dict[LayerName, PolylineSet]
    via_plan: ViaPlan
    trim_region: PolygonSet
    conflicts: ConflictReport
    metrics: PlanMetrics
    layers: tuple[LayerName, ...]


class AlignmentError(ValueError):
    pass


class OutlineError(ValueError):
    pass


def _bbox_corner_point(board: Board, corner: str) -> tuple[float, float]:
    min_x, min_y, max_x, max_y = bounding_box(board.outline)
    return {
        "BL": (min_x, min_y),
        "BR": (max_x, min_y),
        "TL": (min_x, max_y),
        "TR": (max_x, max_y),
    }[corner]


def _footprint_center(board: Board, ref: str) -> tuple[float, float]:
    for fp in board.footprints:
        if fp.reference == ref:
            return fp.center
    raise AlignmentError(f"footprint {ref!r} not found on board {board.name!r}")


def compute_alignment(old_board: Board, new_board: Board,
                      spec: AlignmentSpec) -> Transform:
    """Transform taking new-board coordinates into the old board's frame."""
    if spec.mode == "explicitTransform":
        return spec.transform
    if spec.mode == "bboxCorner":
        ox, oy = _bbox_corner_point(old_board, spec.corner)
        nx, ny = _bbox_corner_point(new_board, spec.corner)
        return Transform(dx=ox - nx, dy=oy - ny)
    if spec.mode == "footprintCenter":
        ox, oy = _footprint_center(old_board, spec.ref_old)
        nx, ny = _footprint_center(new_board, spec.ref_new)
        return Transform(dx=ox - nx, dy=oy - ny)
    raise AlignmentError(f"unknown alignment mode {spec.mode!r}")


def _close(a: float, b: float, eps: float = MATCH_EPSILON) -> bool:
    return abs(a - b) <= eps


def _points_close(p: tuple[float, float], q: tuple[float, float],
                  eps: float = MATCH_EPSILON) -> bool:
    return _close(p[0], q[0], eps) and _close(p[1], q[1], eps)


def _tracks_equal(a: Track, b: Track) -> bool:
    if not _close(a.width, b.width):
        return False
    # A track is the same copper regardless of endpoint order.
    return ((_points_close(a.start, b.start) and _points_close(a.end, b.end))
            or (_points_close(a.start, b.end) and _points_close(a.end, b.start)))


def _pads_equal(a: Pad, b: Pad) -> bool:
    if a.shape != b.shape:
        return False
    if not _points_close(a.center, b.center):
        return False
    if not (_close(a.size[0], b.size[0]) and _close(a.size[1], b.size[1])):
        return False
    if a.shape == "circle":
        return True  # rotation is immaterial for discs
    return _close(a.rotation % 180.0, b.rotation % 180.0) or _close(
        abs(a.rotation % 180.0 - b.rotation % 180.0), 180.0)


def _multiset_match(xs, ys, eq) -> bool:
    """One-to-one greedy matching under a tolerance relation."""
    if len(xs) != len(ys):
        return False
    remaining = list(ys)
    for x in xs:
        for i, y in enumerate(remaining):
            if eq(x, y):
                remaining.pop(i)
                break
        else:
            return False
    return True


def nets_equal(a: Net, b: Net) -> bool:
    """Geometric identity: same layer, same tracks and pads within tolerance."""
    if a.layer != b.layer:
        return False
    return (_multiset_match(a.tracks, b.tracks, _tracks_equal)
            and _multiset_match(a.pads, b.pads, _pads_equal))


def compare_nets(h_old: NetMap, h_new: NetMap,
                 layers: list[LayerName]) -> tuple[NetMap, NetMap]:
    """Greedy one-to-one net prefilter.

    Each old net consumes at most one matching new net; leftovers on either
    side are the unique maps fed to the geometric comparison.
    """
    h_old_unique: NetMap = {}
    h_new_unique: NetMap = {}
    for layer in layers:
        h_old_unique[layer] = []
        h_new_unique[layer] = list(h_new.get(layer, []))
        for old_net in h_old.get(layer, []):
            found = False
            for i, new_net in enumerate(h_new_unique[layer]):
                if nets_equal(old_net, new_net):
                    found = True
                    h_new_unique[layer].pop(i)
                    break
            if not found:
                h_old_unique[layer].append(old_net)
    return h_old_unique, h_new_unique


def net_midlines(net: Net, min_isolation_width: float) -> PolylineSet:
    """Isolation midline of one net: contours of its half-isolation dilation."""
    return boundary_polylines(buffer_shape(net, min_isolation_width / 2.0))


def create_paths(h: NetMap, layers: list[LayerName],
                 min_isolation_width: float) -> dict[LayerName, PolygonSet]:
    """Per layer, the union of every net dilated by half the isolation width."""
    if min_isolation_width <= 0:
        raise ValueError("min_isolation_width must be > 0")
    half = min_isolation_width / 2.0
    paths: dict[LayerName, PolygonSet] = {}
    for layer in layers:
        paths[layer] = boolean_union(
            [buffer_shape(net, half) for net in h.get(layer, [])])
    return paths


def compare_paths(h_old: NetMap, h_new: NetMap, layers: list[LayerName],
                  min_isolation_width: float
                  ) -> tuple[dict[LayerName, PolygonSet], dict[LayerName, PolygonSet]]:
    """Deposit regions (old minus new) and engrave regions (new minus old)."""
    p_old = create_paths(h_old, layers, min_isolation_width)
    p_new = create_paths(h_new, layers, min_isolation_width)
    deposit = {}
    engrave = {}
    for layer in layers:
        deposit[layer] = boolean_subtract(p_old[layer], p_new[layer])
        engrave[layer] = boolean_subtract(p_new[layer], p_old[layer])
    return deposit, engrave


def diff_vias(old_board: Board, new_board: Board,
              transform: Transform = IDENTITY) -> ViaPlan:
    """Match vias one-to-one by position and drill; plan the leftovers.

    Old-only vias are drilled out (their plating is obsolete copper); new-only
    vias become manual-fill instructions.
    """
    new_vias = [
        Via(transform.apply(v.position), v.drill, v.diameter, v.layer_span)
        for v in new_board.vias
    ]
    keep = []
    remaining = list(new_vias)
    for old_via in old_board.vias:
        for i, new_via in enumerate(remaining):
            if (_points_close(old_via.position, new_via.position)
                    and _close(old_via.drill, new_via.drill)):
                keep.append(old_via)
                remaining.pop(i)
                break
        else:
            keep.append(None)
    drill_out = tuple(
        Hole(v.position, v.drill)
        for v, kept in zip(old_board.vias, keep) if kept is None)
    return ViaPlan(
        keep=tuple(v for v in keep if v is not None),
        drill_out=drill_out,
        add_manual=tuple(remaining),
    )


def detect_conflicts(h_new_unique: NetMap, holes: list[Hole],
                     transform: Transform = IDENTITY) -> ConflictReport:
    """Intersect new conductor copper with hole discs; overlaps are conflicts.

    Holes cannot host new traces or pads; each overlapping (net, hole) pair
    produces a message and contributes to the per-layer conflict regions.
    """
    regions: dict[LayerName, PolygonSet] = {}
    messages: list[str] = []
    hole_discs = [(h, disc(h.position, h.drill / 2.0)) for h in holes]
    for layer, nets in h_new_unique.items():
        layer_parts = []
        for net in nets:
            conductor = buffer_shape(net, 0.0)
            if not transform.is_identity:
                conductor = apply_transform(conductor, transform)
            for hole, hole_disc in hole_discs:
                overlap = boolean_intersect(conductor, hole_disc)
                if not overlap.is_empty:
                    layer_parts.append(overlap)
                    messages.append(
                        f"net {net.name!r} ({layer}) overlaps hole at "
                        f"({hole.position[0]:.3f}, {hole.position[1]:.3f})")
        if layer_parts:
            regions[layer] = boolean_union(layer_parts)
    return ConflictReport(regions=regions, messages=tuple(messages))


def compare_outlines(old_board: Board, new_board: Board,
                     transform: Transform = IDENTITY) -> PolygonSet:
    """Substrate to trim away: old outline minus the aligned new outline."""
    new_outline = new_board.outline
    if not transform.is_identity:
        new_outline = apply_transform(new_outline, transform)
    overhang = boolean_subtract(new_outline, old_board.outline)
    if area(overhang) >= 1e-6:
        raise OutlineError("new board exceeds old substrate")
    return boolean_subtract(old_board.outline, new_outline)


def _sum_path_lengths(by_layer: dict[LayerName, PolylineSet]) -> float:
    return sum(path_length(p) for p in by_layer.values())


def run_renewal(old_board: Board, new_board: Board, spec: AlignmentSpec,
                layers: list[LayerName], use_net_prefilter: bool = True
                ) -> RenewalPlan:
    """Full comparison pipeline producing a RenewalPlan.

    The new board is brought into the old board's frame first; both designs
    are dilated at the more demanding of the two isolation widths so the
    comparison is symmetric. Conflicts are reported, never raised.
    """
    t = compute_alignment(old_board, new_board, spec)
    new_aligned = transform_board(new_board, t)

    h_old = build_net_map(old_board, layers)
    h_new = build_net_map(new_aligned, layers)

    if use_net_prefilter:
        h_old_u, h_new_u = compare_nets(h_old, h_new, layers)
    else:
        h_old_u = {layer: list(h_old.get(layer, [])) for layer in layers}
        h_new_u = {layer: list(h_new.get(layer, [])) for layer in layers}

    iso = max(old_board.drc_min_isolation_width,
              new_aligned.drc_min_isolation_width)
    deposit, engrave = compare_paths(h_old_u, h_new_u, layers, iso)

    via_plan = diff_vias(old_board, new_aligned)
    conflict_holes = list(old_board.holes) + list(via_plan.drill_out)
    conflicts = detect_conflicts(h_new_u, conflict_holes)
    if not conflicts.is_empty:
        log.warning("renewal has %d conflict(s)", len(conflicts.messages))
    trim = compare_outlines(old_board, new_aligned)

    deposit_midlines = {
        layer: PolylineSet(tuple(
            line for net in h_old_u.get(layer, [])
            for line in net_midlines(net, iso).polylines))
        for layer in layers
    }
    engrave_midlines = {
        layer: PolylineSet(tuple(
            line for net in h_new_u.get(layer, [])
            for line in net_midlines(net, iso).polylines))
        for layer in layers
    }

    # Benchmark: the new design milled on fresh stock, at its own DRC width.
    bench_layers = [l for l in layers if l in new_board.layers]
    bench_map = build_net_map(new_board, bench_layers)
    benchmark_trace_len = sum(
        path_length(net_midlines(net, new_board.drc_min_isolation_width))
        for nets in bench_map.values() for net in nets)

    metrics = PlanMetrics(
        groove_area=sum(area(deposit[l]) for l in layers),
        deposit_path_len=_sum_path_lengths(deposit_midlines),
        engrave_path_len=_sum_path_lengths(engrave_midlines),
        old_outline_len=path_length(boundary_polylines(old_board.outline)),
        new_outline_len=path_length(boundary_polylines(new_aligned.outline)),
        stencil_cut_len=sum(
            path_length(boundary_polylines(deposit[l])) for l in layers),
        old_pad_count=pad_count(old_board),
        iteration=old_board.iteration_index + 1,
        benchmark_trace_len=benchmark_trace_len,
        trim_cut_len=path_length(boundary_polylines(trim)),
    )

    return RenewalPlan(
        deposit_regions=deposit,
        engrave_regions=engrave,
        deposit_midlines=deposit_midlines,
        engrave_midlines=engrave_midlines,
        via_plan=via_plan,
        trim_region=trim,
        conflicts=conflicts,
        metrics=metrics,
        layers=tuple(layers),
    )
