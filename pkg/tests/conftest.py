"""Shared fixtures: seeded random polygon and board generators."""

from __future__ import annotations

import math
import random

import pytest

from renew.geometry import PolygonSet
from renew.model import Board, Footprint, Hole, Net, Pad, Track, Via


def star_polygon(rng: random.Random, max_vertices: int = 12,
                 extent: float = 100.0) -> PolygonSet:
    """Random simple polygon: varied radii at jittered evenly spaced angles.

    Keeping every angular gap below pi guarantees the star construction
    cannot self-intersect.
    """
    n = rng.randint(4, max_vertices)
    cx = rng.uniform(extent * 0.2, extent * 0.8)
    cy = rng.uniform(extent * 0.2, extent * 0.8)
    step = 2 * math.pi / n
    pts = []
    for k in range(n):
        a = (k + rng.uniform(-0.45, 0.45)) * step
        r = rng.uniform(extent * 0.05, extent * 0.18)
        pts.append((cx + r * math.cos(a), cy + r * math.sin(a)))
    return PolygonSet.from_rings([pts])


def rect_ring(x: float, y: float, w: float, h: float) -> list[tuple[float, float]]:
    return [(x, y), (x + w, y), (x + w, y + h), (x, y + h)]


def square_outline(size: float = 50.0) -> PolygonSet:
    return PolygonSet.from_rings([rect_ring(0.0, 0.0, size, size)])


def make_board(name: str = "fixture", nets: tuple[Net, ...] = (),
               layers: tuple[str, ...] = ("F.Cu",), outline: PolygonSet | None = None,
               **kw) -> Board:
    return Board(
        name=name,
        layers=layers,
        nets=nets,
        outline=outline if outline is not None else square_outline(),
        drc_min_isolation_width=kw.pop("drc_min_isolation_width", 0.381),
        **kw,
    )


def simple_net(net_id: int = 1, layer: str = "F.Cu", x0: float = 10.0,
               y0: float = 10.0, name: str | None = None) -> Net:
    """One track plus one round pad, offset so fixtures don't overlap."""
    return Net(
        id=net_id,
        name=name or f"N{net_id}",
        layer=layer,
        tracks=(Track((x0, y0), (x0 + 10.0, y0), 0.4),),
        pads=(Pad((x0, y0), "circle", (1.0, 1.0)),),
    )


def random_board(rng: random.Random, name: str = "rand", net_count: int = 4,
                 layers: tuple[str, ...] = ("F.Cu",)) -> Board:
    """Small board with nets on a coarse grid, guaranteed mutually clear."""
    nets = []
    footprints = []
    for i in range(net_count):
        layer = layers[i % len(layers)]
        # 12 mm pitch keeps buffered nets disjoint for any iso width <= 2 mm.
        gx = 8.0 + 12.0 * (i % 3)
        gy = 8.0 + 12.0 * (i // 3)
        dx = rng.uniform(-1.0, 1.0)
        dy = rng.uniform(-1.0, 1.0)
        width = rng.choice([0.25, 0.4, 0.6])
        tracks = (Track((gx + dx, gy + dy), (gx + dx + rng.uniform(3, 7), gy + dy), width),)
        pads = (Pad((gx + dx, gy + dy), rng.choice(["circle", "rect"]),
                    (1.2, 1.2), footprint_ref=f"U{i + 1}"),)
        nets.append(Net(id=i + 1, name=f"N{i + 1}", layer=layer,
                        tracks=tracks, pads=pads))
        footprints.append(Footprint(reference=f"U{i + 1}", center=(gx + dx, gy + dy)))
    vias = (Via((44.0, 44.0), 0.3, 0.6, ("F.Cu", "B.Cu")),) if len(layers) > 1 else ()
    holes = (Hole((46.0, 4.0), 2.2),)
    return make_board(name=name, nets=tuple(nets), layers=layers,
                      footprints=tuple(footprints), vias=vias, holes=holes)


def mutate_board(rng: random.Random, board: Board, kind: str) -> Board:
    """Derive a changed variant of a board; nets stay on the coarse grid."""
    from dataclasses import replace

    nets = list(board.nets)
    if kind == "identical":
        return board
    if kind == "move" and nets:
        i = rng.randrange(len(nets))
        net = nets[i]
        nets[i] = replace(
            net,
            tracks=tuple(replace(t, start=(t.start[0] + 2.0, t.start[1]),
                                 end=(t.end[0] + 2.0, t.end[1]))
                         for t in net.tracks),
            pads=tuple(replace(p, center=(p.center[0] + 2.0, p.center[1]))
                       for p in net.pads))
    elif kind == "remove" and nets:
        nets.pop(rng.randrange(len(nets)))
    elif kind == "add":
        x0 = 6.0 + rng.uniform(0, 2)
        nets.append(Net(id=90 + len(nets), name=f"N9{len(nets)}",
                        layer=board.layers[0],
                        tracks=(Track((x0, 44.0), (x0 + 4.0, 44.0), 0.4),),
                        pads=(Pad((x0, 44.0), "circle", (1.0, 1.0)),)))
    elif kind == "resize" and nets:
        i = rng.randrange(len(nets))
        net = nets[i]
        if net.tracks:
            nets[i] = replace(net, tracks=(
                replace(net.tracks[0], width=net.tracks[0].width + 0.2),
            ) + net.tracks[1:])
    elif kind == "reroute" and nets:
        i = rng.randrange(len(nets))
        net = nets[i]
        if net.tracks:
            t = net.tracks[0]
            nets[i] = replace(net, tracks=(
                replace(t, end=(t.end[0], t.end[1] + 3.0)),) + net.tracks[1:])
    elif kind == "via" and board.vias:
        return replace(board, nets=tuple(nets), vias=board.vias[1:])
    elif kind == "trim":
        return replace(board, nets=tuple(nets),
                       outline=square_outline(40.0))
    return replace(board, nets=tuple(nets))


MUTATION_KINDS = ("identical", "move", "remove", "add", "resize", "reroute", "via")


def board_pair(seed: int) -> tuple[Board, Board]:
    """Seeded (old, new) fixture pair; same outline, varied net changes."""
    rng = random.Random(seed)
    layers = ("F.Cu", "B.Cu") if seed % 3 == 0 else ("F.Cu",)
    old = random_board(rng, name=f"old-{seed}",
                       net_count=rng.randint(2, 7), layers=layers)
    kind = MUTATION_KINDS[seed % len(MUTATION_KINDS)]
    new = mutate_board(rng, old, kind)
    new = replace_name(new, f"new-{seed}")
    return old, new


def replace_name(board: Board, name: str) -> Board:
    from dataclasses import replace
    return replace(board, name=name)


@pytest.fixture
def rng():
    return random.Random(20260816)

def plan_with(*, deposit_regions=None, engrave_regions=None,
              deposit_midlines=None, engrave_midlines=None, via_plan=None,
              trim_region=None, conflicts=None, layers=("F.Cu",),
              **metric_overrides):
    """A renewal plan with hand-picked metrics and optional geometry."""
    from renew.diff import ConflictReport, PlanMetrics, RenewalPlan, ViaPlan
    from renew.geometry import EMPTY

    values = dict(groove_area=0.0, deposit_path_len=0.0, engrave_path_len=0.0,
                  old_outline_len=0.0, new_outline_len=0.0, stencil_cut_len=0.0,
                  old_pad_count=0, iteration=1, benchmark_trace_len=0.0,
                  trim_cut_len=0.0)
    values.update(metric_overrides)
    return RenewalPlan(deposit_regions=deposit_regions or {},
                       engrave_regions=engrave_regions or {},
                       deposit_midlines=deposit_midlines or {},
                       engrave_midlines=engrave_midlines or {},
                       via_plan=via_plan or ViaPlan(),
                       trim_region=EMPTY if trim_region is None else trim_region,
                       conflicts=conflicts or ConflictReport(),
                       metrics=PlanMetrics(**values), layers=tuple(layers))
