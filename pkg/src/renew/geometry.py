"""Planar geometry kernel: polygon sets with holes, disc-dilation buffering,
Boolean operations, areas, path lengths, and quarter-turn rigid transforms.

All coordinates are millimetres. Polygon rings are stored with the outer ring
counter-clockwise and holes clockwise. Raw ring input is welded to a 1e-7 mm
vertex grid on construction; Boolean ops run unsnapped (keeping them
associative far below the 1e-9 tolerance) and discard output parts below
1e-6 mm^2 as numerical noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import shapely
from shapely.geometry import (
    LineString,
    MultiPolygon,
    Point as ShapelyPoint,
    Polygon as ShapelyPolygon,
    box,
)
from shapely.geometry.polygon import orient
from shapely import affinity
from shapely.ops import unary_union

Point = tuple[float, float]
Ring = tuple[Point, ...]

# Arc discretization: segments per full circle for buffers and discs.
CIRCLE_SEGMENTS = 128
_QUAD_SEGS = CIRCLE_SEGMENTS // 4

# Vertex welding grid applied where raw coordinates enter the kernel.
SNAP_GRID = 1e-7
# Parts smaller than this are numerical noise, far below fabrication resolution.
MIN_PART_AREA = 1e-6


@dataclass(frozen=True)
class PolygonSet:
    """A set of pairwise interior-disjoint polygons, each with optional holes.

    ``polygons`` is a tuple of ``(outer_ring, hole_rings)`` pairs. Rings are
    closed implicitly (first point is not repeated).
    """

    polygons: tuple[tuple[Ring, tuple[Ring, ...]], ...] = ()

    @property
    def is_empty(self) -> bool:
        return not self.polygons

    def to_shapely(self) -> MultiPolygon:
        polys = [ShapelyPolygon(outer, holes) for outer, holes in self.polygons]
        return MultiPolygon(polys)

    @classmethod
    def from_shapely(cls, geom) -> "PolygonSet":
        return _from_shapely(geom)

    @classmethod
    def from_rings(cls, rings: Iterable[Iterable[Point]]) -> "PolygonSet":
        """Build a single polygon from rings: first ring outer, rest holes.

        Vertices within SNAP_GRID of each other are welded; this is the one
        place raw (possibly noisy) coordinates enter the kernel.
        """
        rings = [_strip_closing_point(tuple((float(x), float(y)) for x, y in r)) for r in rings]
        if not rings:
            return EMPTY
        return _from_shapely(_weld(ShapelyPolygon(rings[0], rings[1:])))


EMPTY = PolygonSet()


@dataclass(frozen=True)
class PolylineSet:
    """Open polylines (closed contours repeat their first point at the end)."""

    polylines: tuple[tuple[Point, ...], ...] = ()

    @property
    def is_empty(self) -> bool:
        return not self.polylines


@dataclass(frozen=True)
class Transform:
    """Rigid motion: counter-clockwise quarter-turn rotation about the origin,
    then translation."""

    dx: float = 0.0
    dy: float = 0.0
    rotation: int = 0

    def __post_init__(self):
        if self.rotation not in (0, 90, 180, 270):
            raise ValueError(f"rotation must be a quarter turn, got {self.rotation}")

    @property
    def is_identity(self) -> bool:
        return self.dx == 0.0 and self.dy == 0.0 and self.rotation == 0

    def apply(self, p: Point) -> Point:
        x, y = p
        if self.rotation == 90:
            x, y = -y, x
        elif self.rotation == 180:
            x, y = -x, -y
        elif self.rotation == 270:
            x, y = y, -x
        return (x + self.dx, y + self.dy)


def _strip_closing_point(ring: Ring) -> Ring:
    if len(ring) > 1 and ring[0] == ring[-1]:
        ring = ring[:-1]
    # Canonical start: lexicographically smallest vertex. Keeps serialized
    # rings stable across construct/serialize/parse round trips.
    k = min(range(len(ring)), key=lambda i: ring[i])
    return ring[k:] + ring[:k]


def _from_shapely(geom) -> PolygonSet:
    """Normalize any shapely output into a PolygonSet, discarding noise parts."""
    if geom is None or geom.is_empty:
        return EMPTY
    if geom.geom_type == "Polygon":
        parts = [geom]
    elif geom.geom_type == "MultiPolygon":
        parts = list(geom.geoms)
    elif geom.geom_type == "GeometryCollection":
        parts = [g for g in geom.geoms if g.geom_type in ("Polygon", "MultiPolygon")]
        flat = []
        for g in parts:
            flat.extend(g.geoms if g.geom_type == "MultiPolygon" else [g])
        parts = flat
    else:
        # Lines/points carry no area.
        return EMPTY
    out = []
    for poly in parts:
        if poly.is_empty or poly.area < MIN_PART_AREA:
            continue
        poly = orient(poly, sign=1.0)  # outer CCW, holes CW
        outer = _strip_closing_point(tuple(poly.exterior.coords))
        holes = tuple(
            _strip_closing_point(tuple(hole.coords))
            for hole in poly.interiors
            if ShapelyPolygon(hole.coords).area >= MIN_PART_AREA
        )
        out.append((outer, holes))
    return PolygonSet(tuple(out))


def _weld(geom):
    return shapely.set_precision(geom, SNAP_GRID)


def _buffer(geom, dist: float):
    if dist == 0.0:
        return geom
    return geom.buffer(dist, quad_segs=_QUAD_SEGS)


def disc(center: Point, radius: float) -> PolygonSet:
    """Circular disc discretized at CIRCLE_SEGMENTS segments."""
    if radius <= 0:
        return EMPTY
    return _from_shapely(ShapelyPoint(center).buffer(radius, quad_segs=_QUAD_SEGS))


def _track_region(start: Point, end: Point, width: float, half_width: float):
    return LineString([start, end]).buffer(width / 2.0 + half_width, quad_segs=_QUAD_SEGS)


def _pad_region(center: Point, shape: str, size: tuple[float, float], rotation: float,
                half_width: float):
    w, h = size
    if shape == "circle":
        return ShapelyPoint(center).buffer(w / 2.0 + half_width, quad_segs=_QUAD_SEGS)
    if shape == "rect":
        base = box(-w / 2.0, -h / 2.0, w / 2.0, h / 2.0)
    elif shape == "oval":
        if abs(w - h) < 1e-12:
            return ShapelyPoint(center).buffer(w / 2.0 + half_width, quad_segs=_QUAD_SEGS)
        if w > h:
            base = LineString([(-(w - h) / 2.0, 0.0), ((w - h) / 2.0, 0.0)]).buffer(
                h / 2.0, quad_segs=_QUAD_SEGS)
        else:
            base = LineString([(0.0, -(h - w) / 2.0), (0.0, (h - w) / 2.0)]).buffer(
                w / 2.0, quad_segs=_QUAD_SEGS)
    else:
        raise ValueError(f"unsupported pad shape: {shape!r}")
    if rotation:
        base = affinity.rotate(base, rotation, origin=(0, 0))
    base = affinity.translate(base, center[0], center[1])
    return _buffer(base, half_width)


def buffer_shape(source, half_width: float) -> PolygonSet:
    """Disc-dilate a conductor shape: every point within half_width of it.

    Accepts a Track, Pad, Net (model types, matched structurally) or a
    PolygonSet. Tracks become width-w stadium regions; pads follow their
    declared shape; round joins throughout.
    """
    if half_width < 0:
        raise ValueError(f"half_width must be >= 0, got {half_width}")
    geom = _source_region(source, half_width)
    return _from_shapely(geom)


def _source_region(source, half_width: float):
    if isinstance(source, PolygonSet):
        return _buffer(source.to_shapely(), half_width)
    # model.Track / model.Pad / model.Net, matched by fields to avoid a cyclic import
    if hasattr(source, "tracks") and hasattr(source, "pads"):
        parts = [_track_region(t.start, t.end, t.width, half_width) for t in source.tracks]
        parts += [
            _pad_region(p.center, p.shape, p.size, p.rotation, half_width)
            for p in source.pads
        ]
        if not parts:
            return ShapelyPolygon()
        return unary_union(parts)
    if hasattr(source, "start") and hasattr(source, "end"):
        return _track_region(source.start, source.end, source.width, half_width)
    if hasattr(source, "center") and hasattr(source, "shape"):
        return _pad_region(source.center, source.shape, source.size, source.rotation,
                           half_width)
    raise TypeError(f"cannot buffer object of type {type(source).__name__}")


def boolean_union(sets: Iterable[PolygonSet]) -> PolygonSet:
    geoms = [s.to_shapely() for s in sets if not s.is_empty]
    if not geoms:
        return EMPTY
    return _from_shapely(unary_union(geoms))


def boolean_subtract(a: PolygonSet, b: PolygonSet) -> PolygonSet:
    if a.is_empty:
        return EMPTY
    if b.is_empty:
        return a
    return _from_shapely(a.to_shapely().difference(b.to_shapely()))


def boolean_intersect(a: PolygonSet, b: PolygonSet) -> PolygonSet:
    if a.is_empty or b.is_empty:
        return EMPTY
    return _from_shapely(a.to_shapely().intersection(b.to_shapely()))


def area(s: PolygonSet) -> float:
    """Total area in mm^2; holes subtract."""
    total = 0.0
    for outer, holes in s.polygons:
        total += _ring_area(outer)
        for hole in holes:
            total -= _ring_area(hole)
    return total


def _ring_area(ring: Ring) -> float:
    # Shoelace, orientation-independent.
    n = len(ring)
    acc = 0.0
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        acc += x1 * y2 - x2 * y1
    return abs(acc) / 2.0


def path_length(p: PolylineSet) -> float:
    """Sum of Euclidean segment lengths in mm."""
    total = 0.0
    for line in p.polylines:
        for (x1, y1), (x2, y2) in zip(line, line[1:]):
            total += math.hypot(x2 - x1, y2 - y1)
    return total


def boundary_polylines(s: PolygonSet) -> PolylineSet:
    """All rings of a polygon set as closed polylines (first point repeated)."""
    lines = []
    for outer, holes in s.polygons:
        lines.append(outer + (outer[0],))
        for hole in holes:
            lines.append(hole + (hole[0],))
    return PolylineSet(tuple(lines))


def bounding_box(s: PolygonSet) -> tuple[float, float, float, float]:
    """(min_x, min_y, max_x, max_y); raises on an empty set."""
    if s.is_empty:
        raise ValueError("bounding box of empty polygon set")
    xs = [x for outer, _ in s.polygons for x, _y in outer]
    ys = [y for outer, _ in s.polygons for _x, y in outer]
    return (min(xs), min(ys), max(xs), max(ys))


GeometryLike = Union[PolygonSet, PolylineSet]


def apply_transform(g, t: Transform):
    """Apply a rigid transform to a PolygonSet, PolylineSet or Board."""
    if isinstance(g, PolygonSet):
        return PolygonSet(tuple(
            (tuple(t.apply(p) for p in outer),
             tuple(tuple(t.apply(p) for p in hole) for hole in holes))
            for outer, holes in g.polygons))
    if isinstance(g, PolylineSet):
        return PolylineSet(tuple(
            tuple(t.apply(p) for p in line) for line in g.polylines))
    from . import model  # Board transform; deferred to avoid an import cycle

    if isinstance(g, model.Board):
        return model.transform_board(g, t)
    raise TypeError(f"cannot transform object of type {type(g).__name__}")
