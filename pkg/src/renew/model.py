"""Domain types for board designs: nets, tracks, pads, vias, holes, footprints,
plus validation and per-layer net grouping. All lengths mm, angles degrees."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .geometry import PolygonSet, Transform, apply_transform

MM_PER_MIL = 0.0254

LayerName = str
PAD_SHAPES = ("circle", "rect", "oval")


@dataclass(frozen=True)
class Track:
    start: tuple[float, float]
    end: tuple[float, float]
    width: float


@dataclass(frozen=True)
class Pad:
    center: tuple[float, float]
    shape: str  # circle | rect | oval
    size: tuple[float, float]
    rotation: float = 0.0
    footprint_ref: Optional[str] = None


@dataclass(frozen=True)
class Net:
    id: int
    name: str
    layer: LayerName
    tracks: tuple[Track, ...] = ()
    pads: tuple[Pad, ...] = ()


@dataclass(frozen=True)
class Via:
    position: tuple[float, float]
    drill: float
    diameter: float
    layer_span: tuple[LayerName, LayerName]


@dataclass(frozen=True)
class Hole:
    """Non-plated through hole."""

    position: tuple[float, float]
    drill: float


@dataclass(frozen=True)
class Footprint:
    reference: str
    center: tuple[float, float]
    pad_refs: tuple[int, ...] = ()


@dataclass(frozen=True)
class Board:
    name: str
    layers: tuple[LayerName, ...]
    nets: tuple[Net, ...]
    outline: PolygonSet
    drc_min_isolation_width: float
    vias: tuple[Via, ...] = ()
    holes: tuple[Hole, ...] = ()
    footprints: tuple[Footprint, ...] = ()
    iteration_index: int = 1
    base_engrave_depth: float = 0.15


@dataclass(frozen=True)
class Violation:
    """A single invariant failure; field names the offending location."""

    field: str
    rule: str


NetMap = dict[LayerName, list[Net]]


def _finite(*values: float) -> bool:
    return all(isinstance(v, (int, float)) and v == v and abs(v) != float("inf")
               for v in values)


def validate_board(board: Board) -> list[Violation]:
    """Check every model invariant; violations are returned, never raised."""
    out: list[Violation] = []
    if board.outline.is_empty:
        out.append(Violation("outline", "outline must be non-empty"))
    if board.drc_min_isolation_width <= 0:
        out.append(Violation("drcMinIsolationWidth", "must be > 0"))
    if board.iteration_index < 1:
        out.append(Violation("iterationIndex", "must be >= 1"))
    if board.base_engrave_depth <= 0:
        out.append(Violation("baseEngraveDepth", "must be > 0"))
    layer_set = set(board.layers)
    seen_refs: set[str] = set()
    for fp in board.footprints:
        if fp.reference in seen_refs:
            out.append(Violation(f"footprints[{fp.reference}]",
                                 "reference must be unique per board"))
        seen_refs.add(fp.reference)
        if not _finite(*fp.center):
            out.append(Violation(f"footprints[{fp.reference}].center",
                                 "coordinates must be finite"))
    for i, net in enumerate(board.nets):
        loc = f"nets[{i}]"
        if net.layer not in layer_set:
            out.append(Violation(f"{loc}.layer",
                                 f"layer {net.layer!r} not declared on board"))
        if not net.tracks and not net.pads:
            out.append(Violation(loc, "net must contain at least one track or pad"))
        for j, t in enumerate(net.tracks):
            tloc = f"{loc}.tracks[{j}]"
            if t.start == t.end:
                out.append(Violation(tloc, "track start and end must differ"))
            if t.width <= 0:
                out.append(Violation(f"{tloc}.width", "must be > 0"))
            if not _finite(*t.start, *t.end, t.width):
                out.append(Violation(tloc, "coordinates must be finite"))
        for j, p in enumerate(net.pads):
            ploc = f"{loc}.pads[{j}]"
            if p.shape not in PAD_SHAPES:
                out.append(Violation(f"{ploc}.shape",
                                     f"shape must be one of {PAD_SHAPES}, got {p.shape!r}"))
            if p.size[0] <= 0 or p.size[1] <= 0:
                out.append(Violation(f"{ploc}.size", "size components must be > 0"))
            if not (0 <= p.rotation < 360):
                out.append(Violation(f"{ploc}.rotation",
                                     "rotation must be normalized to [0, 360)"))
            if not _finite(*p.center, *p.size, p.rotation):
                out.append(Violation(ploc, "coordinates must be finite"))
    for i, v in enumerate(board.vias):
        vloc = f"vias[{i}]"
        if not (v.diameter > v.drill > 0):
            out.append(Violation(vloc, "must satisfy diameter > drill > 0"))
        if not _finite(*v.position, v.drill, v.diameter):
            out.append(Violation(vloc, "coordinates must be finite"))
    for i, h in enumerate(board.holes):
        if h.drill <= 0:
            out.append(Violation(f"holes[{i}].drill", "must be > 0"))
        if not _finite(*h.position, h.drill):
            out.append(Violation(f"holes[{i}]", "coordinates must be finite"))
    return out


def build_net_map(board: Board, layers: list[LayerName]) -> NetMap:
    """Group the board's nets by layer, restricted to the requested layers."""
    layer_set = set(board.layers)
    for name in layers:
        if name not in layer_set:
            raise ValueError(f"unknown layer: {name!r}")
    wanted = set(layers)
    net_map: NetMap = {}
    for net in board.nets:
        if net.layer in wanted:
            net_map.setdefault(net.layer, []).append(net)
    return net_map


def normalize_rotation(deg: float) -> float:
    """Fold an angle into [0, 360)."""
    r = deg % 360.0
    return r + 360.0 if r < 0 else r


def mil_to_mm(mil: float) -> float:
    return mil * MM_PER_MIL


def transform_board(board: Board, t: Transform) -> Board:
    """Apply a rigid motion to every geometric feature of the board."""
    if t.is_identity:
        return board
    nets = tuple(
        replace(
            net,
            tracks=tuple(replace(tr, start=t.apply(tr.start), end=t.apply(tr.end))
                         for tr in net.tracks),
            pads=tuple(
                replace(p, center=t.apply(p.center),
                        rotation=normalize_rotation(p.rotation + t.rotation))
                for p in net.pads),
        )
        for net in board.nets
    )
    return replace(
        board,
        nets=nets,
        outline=apply_transform(board.outline, t),
        vias=tuple(replace(v, position=t.apply(v.position)) for v in board.vias),
        holes=tuple(replace(h, position=t.apply(h.position)) for h in board.holes),
        footprints=tuple(replace(f, center=t.apply(f.center)) for f in board.footprints),
    )


def pad_count(board: Board) -> int:
    """Total pads across all nets; drives the cleaning-time estimate."""
    return sum(len(net.pads) for net in board.nets)
