"""Board design ingest and serialization.

Two input formats: a canonical JSON schema (round-trip guaranteed, the tool's
source of truth) and a read-only subset of the common s-expression PCB file
format. One output format: canonical JSON, deterministic at 6 decimals.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass

from .geometry import PolygonSet, disc
from .model import (
    Board,
    Footprint,
    Hole,
    Net,
    Pad,
    Track,
    Via,
    mil_to_mm,
    normalize_rotation,
    validate_board,
)

log = logging.getLogger(__name__)

# 15 mil: common single-tool groove width; used when a design carries no
# explicit clearance rule.
DEFAULT_MIN_ISOLATION_MM = mil_to_mm(15)
DEFAULT_BASE_ENGRAVE_DEPTH = 0.15

_KNOWN_KEYS = {
    "name", "units", "layers", "drcMinIsolationWidth", "iterationIndex",
    "baseEngraveDepth", "outline", "nets", "vias", "holes", "footprints",
}


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # error | warning
    line: int
    message: str


class BoardParseError(ValueError):
    """Unrecoverable parse failure; carries a 1-based line number."""

    def __init__(self, message: str, line: int = 1):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.bare_message = message


def _require(data: dict, key: str):
    if key not in data:
        raise BoardParseError(f"missing required key: {key!r}")
    return data[key]


def _as_rings(outline_json) -> list[list[tuple[float, float]]]:
    if not isinstance(outline_json, list) or not outline_json:
        raise BoardParseError("outline must be a non-empty list of rings")
    first = outline_json[0]
    if first and isinstance(first[0], (int, float)):
        outline_json = [outline_json]  # single bare ring
    return [[(float(x), float(y)) for x, y in ring] for ring in outline_json]


def parse_canonical_json(data: bytes | str,
                         diagnostics: list[ParseDiagnostic] | None = None) -> Board:
    """Parse the canonical board JSON. Unknown keys warn; bad values raise."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise BoardParseError(f"malformed JSON: {e.msg}", line=e.lineno) from e
    if not isinstance(doc, dict):
        raise BoardParseError("top level must be an object")

    for key in doc:
        if key not in _KNOWN_KEYS:
            msg = f"ignoring unknown key: {key!r}"
            log.debug(msg)
            if diagnostics is not None:
                diagnostics.append(ParseDiagnostic("warning", 1, msg))

    name = str(_require(doc, "name"))
    units = _require(doc, "units")
    if units not in ("mm", "mil"):
        raise BoardParseError(f"units must be 'mm' or 'mil', got {units!r}")
    scale = 1.0 if units == "mm" else mil_to_mm(1)

    def L(v) -> float:  # length in declared units -> mm
        return float(v) * scale

    layers = tuple(str(x) for x in _require(doc, "layers"))
    outline_rings = _as_rings(_require(doc, "outline"))
    outline = PolygonSet.from_rings(
        [[(L(x), L(y)) for x, y in ring] for ring in outline_rings])

    if "drcMinIsolationWidth" in doc:
        iso = L(doc["drcMinIsolationWidth"])
    else:
        iso = DEFAULT_MIN_ISOLATION_MM
        msg = ("no drcMinIsolationWidth; defaulting to "
               f"{DEFAULT_MIN_ISOLATION_MM} mm (15 mil)")
        log.warning(msg)
        if diagnostics is not None:
            diagnostics.append(ParseDiagnostic("warning", 1, msg))

    nets = []
    for n in doc.get("nets", []):
        tracks = tuple(
            Track((L(t["x1"]), L(t["y1"])), (L(t["x2"]), L(t["y2"])), L(t["w"]))
            for t in n.get("tracks", []))
        pads = tuple(
            Pad((L(p["x"]), L(p["y"])), str(p["shape"]), (L(p["w"]), L(p["h"])),
                normalize_rotation(float(p.get("rot", 0.0))),
                p.get("footprint"))
            for p in n.get("pads", []))
        nets.append(Net(int(_require(n, "id")), str(_require(n, "name")),
                        str(_require(n, "layer")), tracks, pads))

    vias = tuple(
        Via((L(v["x"]), L(v["y"])), L(v["drill"]), L(v["dia"]),
            (str(v["from"]), str(v["to"])))
        for v in doc.get("vias", []))
    holes = tuple(Hole((L(h["x"]), L(h["y"])), L(h["drill"]))
                  for h in doc.get("holes", []))
    footprints = tuple(Footprint(str(f["ref"]), (L(f["x"]), L(f["y"])))
                       for f in doc.get("footprints", []))

    board = Board(
        name=name,
        layers=layers,
        nets=tuple(nets),
        outline=outline,
        drc_min_isolation_width=iso,
        vias=vias,
        holes=holes,
        footprints=footprints,
        iteration_index=int(doc.get("iterationIndex", 1)),
        base_engrave_depth=float(doc.get("baseEngraveDepth",
                                         DEFAULT_BASE_ENGRAVE_DEPTH)),
    )
    violations = validate_board(board)
    if violations:
        detail = "; ".join(f"{v.field}: {v.rule}" for v in violations[:5])
        raise BoardParseError(f"board violates invariants: {detail}")
    return board


def _fmt(v: float) -> str:
    """Fixed 6-decimal formatting, trailing zeros trimmed to one."""
    s = f"{v:.6f}".rstrip("0")
    return s + "0" if s.endswith(".") else s


def _j(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return json.dumps(v)
    if v is None:
        return "null"
    raise TypeError(f"unexpected value {v!r}")


def _obj(pairs) -> str:
    return "{" + ", ".join(f"{json.dumps(k)}: {v}" for k, v in pairs) + "}"


def _arr(items) -> str:
    return "[" + ", ".join(items) + "]"


def serialize_canonical_json(board: Board) -> bytes:
    """Deterministic canonical JSON: stable key order, 6-decimal lengths."""
    violations = validate_board(board)
    if violations:
        detail = "; ".join(f"{v.field}: {v.rule}" for v in violations[:5])
        raise ValueError(f"cannot serialize invalid board: {detail}")

    def pt_pair(p):
        return _arr([_fmt(p[0]), _fmt(p[1])])

    rings = []
    for outer, holes_ in board.outline.polygons:
        rings.append(_arr(pt_pair(p) for p in outer))
        rings.extend(_arr(pt_pair(p) for p in hole) for hole in holes_)

    def track_obj(t: Track) -> str:
        return _obj([("x1", _fmt(t.start[0])), ("y1", _fmt(t.start[1])),
                     ("x2", _fmt(t.end[0])), ("y2", _fmt(t.end[1])),
                     ("w", _fmt(t.width))])

    def pad_obj(p: Pad) -> str:
        pairs = [("x", _fmt(p.center[0])), ("y", _fmt(p.center[1])),
                 ("shape", _j(p.shape)), ("w", _fmt(p.size[0])),
                 ("h", _fmt(p.size[1])), ("rot", _fmt(p.rotation))]
        if p.footprint_ref is not None:
            pairs.append(("footprint", _j(p.footprint_ref)))
        return _obj(pairs)

    def net_obj(n: Net) -> str:
        return _obj([
            ("id", _j(n.id)), ("name", _j(n.name)), ("layer", _j(n.layer)),
            ("tracks", _arr(track_obj(t) for t in n.tracks)),
            ("pads", _arr(pad_obj(p) for p in n.pads)),
        ])

    if board.nets:
        nets_json = "[\n    " + ",\n    ".join(net_obj(n) for n in board.nets) + "\n  ]"
    else:
        nets_json = "[]"
    via_objs = (_obj([("x", _fmt(v.position[0])), ("y", _fmt(v.position[1])),
                      ("drill", _fmt(v.drill)), ("dia", _fmt(v.diameter)),
                      ("from", _j(v.layer_span[0])), ("to", _j(v.layer_span[1]))])
                for v in board.vias)
    hole_objs = (_obj([("x", _fmt(h.position[0])), ("y", _fmt(h.position[1])),
                       ("drill", _fmt(h.drill))]) for h in board.holes)
    fp_objs = (_obj([("ref", _j(f.reference)), ("x", _fmt(f.center[0])),
                     ("y", _fmt(f.center[1]))]) for f in board.footprints)
    lines = [
        f'  "name": {_j(board.name)},',
        '  "units": "mm",',
        f'  "layers": {_arr(_j(x) for x in board.layers)},',
        f'  "drcMinIsolationWidth": {_fmt(board.drc_min_isolation_width)},',
        f'  "iterationIndex": {board.iteration_index},',
        f'  "baseEngraveDepth": {_fmt(board.base_engrave_depth)},',
        f'  "outline": {_arr(rings)},',
        f'  "nets": {nets_json},',
        f'  "vias": {_arr(via_objs)},',
        f'  "holes": {_arr(hole_objs)},',
        f'  "footprints": {_arr(fp_objs)}',
    ]
    return ("{\n" + "\n".join(lines) + "\n}\n").encode("utf-8")


# ----------------------------------------------------------------------------
# s-expression PCB subset
# ----------------------------------------------------------------------------

class _Node:
    """A parsed s-expression list; atoms are str, nesting is _Node."""

    __slots__ = ("items", "line")

    def __init__(self, items, line):
        self.items = items
        self.line = line

    @property
    def head(self) -> str:
        return self.items[0] if self.items and isinstance(self.items[0], str) else ""

    def children(self, head: str):
        return [c for c in self.items if isinstance(c, _Node) and c.head == head]

    def child(self, head: str):
        found = self.children(head)
        return found[0] if found else None

    def atoms(self):
        return [a for a in self.items[1:] if isinstance(a, str)]


def _tokenize(text: str):
    """Yield (token, line) pairs; quoted strings are single tokens."""
    line = 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
        elif c.isspace():
            i += 1
        elif c in "()":
            yield c, line
            i += 1
        elif c == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    buf.append(text[j + 1])
                    j += 2
                else:
                    if text[j] == "\n":
                        line += 1
                    buf.append(text[j])
                    j += 1
            if j >= n:
                raise BoardParseError("unterminated string", line)
            yield "".join(buf), line
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '()"':
                j += 1
            yield text[i:j], line
            i = j


def _parse_sexpr(text: str) -> _Node:
    stack: list[_Node] = []
    root: _Node | None = None
    last_line = 1
    for token, line in _tokenize(text):
        last_line = line
        if token == "(":
            node = _Node([], line)
            if stack:
                stack[-1].items.append(node)
            stack.append(node)
        elif token == ")":
            if not stack:
                raise BoardParseError("unbalanced ')'", line)
            node = stack.pop()
            if not stack:
                if root is not None:
                    raise BoardParseError("multiple top-level forms", line)
                root = node
        else:
            if not stack:
                raise BoardParseError(f"stray atom {token!r} outside any form", line)
            stack[-1].items.append(token)
    if stack:
        raise BoardParseError("unbalanced '(': form never closed", stack[-1].line)
    if root is None:
        raise BoardParseError("no board form found", last_line)
    return root


def _nums(node: _Node, head: str, count: int, default=None):
    child = node.child(head)
    if child is None:
        if default is not None:
            return default
        raise BoardParseError(f"{node.head}: missing ({head} ...)", node.line)
    vals = [float(a) for a in child.atoms()[:count]]
    while len(vals) < count:
        vals.append(0.0)
    return vals

_EDGE_LAYER = "Edge.Cuts"

# Forms we deliberately skip without a warning: metadata and non-copper art.
_SILENT_FORMS = {
    "version", "generator", "generator_version", "general", "paper", "page",
    "title_block", "layers", "property", "gr_text", "gr_poly", "group",
    "attr", "model", "fp_text", "fp_line", "fp_rect", "fp_circle", "fp_poly",
    "zone", "target", "tstamp", "uuid", "descr", "tags", "path",
    "solder_mask_margin", "embedded_fonts",
}

_ARC_FORMS = {"arc", "gr_arc", "fp_arc"}


def _pad_layers(pad_node: _Node, board_layers: tuple[str, ...]) -> list[str]:
    layers_node = pad_node.child("layers")
    if layers_node is None:
        return []
    out = []
    for atom in layers_node.atoms():
        if atom in ("*.Cu", "F&B.Cu"):
            out.extend(l for l in board_layers if l.endswith(".Cu"))
        elif atom.endswith(".Cu"):
            out.append(atom)
    seen = set()
    return [x for x in out if not (x in seen or seen.add(x))]


def _ring_extent(ring: list[tuple[float, float]]) -> float:
    xs = [p[0] for p in ring]
    ys = [p[1] for p in ring]
    return (max(xs) - min(xs)) * (max(ys) - min(ys))


def _chain_outline(segments: list[tuple[tuple[float, float], tuple[float, float], int]],
                   tol: float = 1e-3) -> list[list[tuple[float, float]]]:
    """Chain edge segments into closed rings; endpoints match within tol."""
    remaining = list(segments)
    rings = []
    while remaining:
        start, end, line = remaining.pop(0)
        ring = [start, end]
        guard = len(remaining) + 2
        while math.dist(ring[-1], ring[0]) > tol:
            for i, (s, e, _l) in enumerate(remaining):
                if math.dist(s, ring[-1]) <= tol:
                    ring.append(e)
                    remaining.pop(i)
                    break
                if math.dist(e, ring[-1]) <= tol:
                    ring.append(s)
                    remaining.pop(i)
                    break
            else:
                raise BoardParseError(
                    "outline does not close into a ring", line)
            guard -= 1
            if guard < 0:
                raise BoardParseError("outline chaining did not terminate", line)
        rings.append(ring[:-1])
    return rings


def parse_sexpr_board(data: bytes | str) -> tuple[Board, list[ParseDiagnostic]]:
    """Parse the supported s-expression PCB subset.

    Recognized forms: net declarations, track segments, vias, footprints with
    pads, outline graphics (lines/rects/circles) on the edge-cuts layer, and
    clearance rules (in setup or net_class forms, most restrictive wins).
    Pad positions use the subset convention global = footprint_center +
    R_ccw(footprint_rot) * local. Through-hole pads on *.Cu are instantiated
    on every copper layer. Arc forms are rejected, not approximated.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    root = _parse_sexpr(data)
    if root.head != "kicad_pcb":
        raise BoardParseError(
            f"expected a kicad_pcb board form, got ({root.head} ...)", root.line)

    diagnostics: list[ParseDiagnostic] = []
    net_names: dict[int, str] = {}
    tracks_by_key: dict[tuple[int, str], list[Track]] = {}
    pads_by_key: dict[tuple[int, str], list[Pad]] = {}
    vias: list[Via] = []
    holes: list[Hole] = []
    footprints: list[Footprint] = []
    edge_segments = []
    edge_circles = []
    clearances: list[float] = []
    copper_layers: list[str] = []

    layers_node = root.child("layers")
    if layers_node is not None:
        for entry in (c for c in layers_node.items[1:] if isinstance(c, _Node)):
            atoms = [a for a in entry.items if isinstance(a, str)]
            copper = [a for a in atoms if a.endswith(".Cu")]
            copper_layers.extend(copper)

    def warn(node: _Node, message: str):
        diagnostics.append(ParseDiagnostic("warning", node.line, message))

    def on_edge(node: _Node) -> bool:
        layer = node.child("layer")
        return layer is not None and _EDGE_LAYER in layer.atoms()

    for node in (c for c in root.items[1:] if isinstance(c, _Node)):
        head = node.head
        if head in _ARC_FORMS:
            raise BoardParseError("arcs unsupported", node.line)
        if head == "net":
            atoms = node.atoms()
            if len(atoms) >= 1:
                net_id = int(atoms[0])
                net_names[net_id] = atoms[1] if len(atoms) > 1 else f"net-{net_id}"
        elif head == "segment":
            (x1, y1) = _nums(node, "start", 2)
            (x2, y2) = _nums(node, "end", 2)
            (w,) = _nums(node, "width", 1)
            layer_node = node.child("layer")
            net_node = node.child("net")
            if layer_node is None or net_node is None:
                raise BoardParseError("segment missing layer or net", node.line)
            layer = layer_node.atoms()[0]
            net_id = int(net_node.atoms()[0])
            key = (net_id, layer)
            tracks_by_key.setdefault(key, []).append(
                Track((x1, y1), (x2, y2), w))
        elif head == "via":
            (x, y) = _nums(node, "at", 2)
            (size,) = _nums(node, "size", 1)
            (drill,) = _nums(node, "drill", 1)
            span_node = node.child("layers")
            span = tuple(span_node.atoms()[:2]) if span_node else ("F.Cu", "B.Cu")
            if len(span) < 2:
                span = (span[0], span[0])
            vias.append(Via((x, y), drill, size, span))
        elif head == "footprint" or head == "module":
            _ingest_footprint(node, net_names, pads_by_key, holes, footprints,
                              tuple(copper_layers) or ("F.Cu", "B.Cu"), warn)
        elif head in ("gr_line", "gr_rect", "gr_circle"):
            if not on_edge(node):
                continue  # copper-layer art is out of subset; silently skipped
            if head == "gr_line":
                (x1, y1) = _nums(node, "start", 2)
                (x2, y2) = _nums(node, "end", 2)
                edge_segments.append(((x1, y1), (x2, y2), node.line))
            elif head == "gr_rect":
                (x1, y1) = _nums(node, "start", 2)
                (x2, y2) = _nums(node, "end", 2)
                corners = [(x1, y1), (x2, y1), (x2, y2), (x1, y2)]
                for a, b in zip(corners, corners[1:] + corners[:1]):
                    edge_segments.append((a, b, node.line))
            else:
                (cx, cy) = _nums(node, "center", 2)
                (ex, ey) = _nums(node, "end", 2)
                edge_circles.append(((cx, cy), math.dist((cx, cy), (ex, ey))))
        elif head == "setup":
            for c in node.children("clearance"):
                clearances.append(float(c.atoms()[0]))
        elif head == "net_class":
            c = node.child("clearance")
            if c is not None:
                clearances.append(float(c.atoms()[0]))
        elif head in _SILENT_FORMS:
            continue
        else:
            warn(node, f"unrecognized form ({head} ...) skipped")

    if not edge_segments and not edge_circles:
        raise BoardParseError("missing board outline on " + _EDGE_LAYER, root.line)

    rings = _chain_outline(edge_segments) if edge_segments else []
    if rings:
        # First ring is the outer boundary; later rings are interior cutouts.
        rings.sort(key=_ring_extent, reverse=True)
        outline = PolygonSet.from_rings(rings)
    else:
        (center, radius) = edge_circles[0]
        outline = disc(center, radius)

    layer_names = tuple(copper_layers) if copper_layers else tuple(sorted(
        {layer for (_id, layer) in list(tracks_by_key) + list(pads_by_key)}))

    nets = []
    for (net_id, layer) in sorted(set(tracks_by_key) | set(pads_by_key)):
        nets.append(Net(
            id=net_id,
            name=net_names.get(net_id, f"net-{net_id}"),
            layer=layer,
            tracks=tuple(tracks_by_key.get((net_id, layer), ())),
            pads=tuple(pads_by_key.get((net_id, layer), ())),
        ))

    if clearances:
        iso = min(clearances)
    else:
        iso = DEFAULT_MIN_ISOLATION_MM
        diagnostics.append(ParseDiagnostic(
            "warning", 1,
            f"no clearance rule; defaulting to {DEFAULT_MIN_ISOLATION_MM} mm (15 mil)"))

    name_node = root.child("title_block")
    board_name = "board"
    if name_node is not None and name_node.child("title") is not None:
        board_name = name_node.child("title").atoms()[0]

    board = Board(
        name=board_name,
        layers=layer_names,
        nets=tuple(nets),
        outline=outline,
        drc_min_isolation_width=iso,
        vias=tuple(vias),
        holes=tuple(holes),
        footprints=tuple(footprints),
    )
    violations = validate_board(board)
    if violations:
        detail = "; ".join(f"{v.field}: {v.rule}" for v in violations[:5])
        raise BoardParseError(f"parsed board violates invariants: {detail}")
    return board, diagnostics


def _ingest_footprint(node: _Node, net_names, pads_by_key, holes, footprints,
                      copper_layers: tuple[str, ...], warn):
    at = _nums(node, "at", 3, default=[0.0, 0.0, 0.0])
    fx, fy, frot = at[0], at[1], at[2] if len(at) > 2 else 0.0
    reference = None
    prop = [c for c in node.children("property")
            if len(c.atoms()) >= 2 and c.atoms()[0] == "Reference"]
    if prop:
        reference = prop[0].atoms()[1]
    else:
        for t in node.children("fp_text"):
            atoms = t.atoms()
            if len(atoms) >= 2 and atoms[0] == "reference":
                reference = atoms[1]
                break
    if reference is None:
        reference = f"FP@{node.line}"
        warn(node, "footprint without reference designator")
    footprints.append(Footprint(reference=reference, center=(fx, fy)))

    rot_rad = math.radians(frot)
    cos_r, sin_r = math.cos(rot_rad), math.sin(rot_rad)

    for pad_node in node.children("pad"):
        if any(c.head in _ARC_FORMS for c in pad_node.items if isinstance(c, _Node)):
            raise BoardParseError("arcs unsupported", pad_node.line)
        atoms = pad_node.atoms()
        pad_type = atoms[1] if len(atoms) > 1 else "smd"
        shape = atoms[2] if len(atoms) > 2 else "rect"
        pat = _nums(pad_node, "at", 3, default=[0.0, 0.0, 0.0])
        px, py, prot = pat[0], pat[1], pat[2] if len(pat) > 2 else 0.0
        gx = fx + cos_r * px - sin_r * py
        gy = fy + sin_r * px + cos_r * py
        if pad_type == "np_thru_hole":
            (drill,) = _nums(pad_node, "drill", 1, default=[0.0])
            if drill > 0:
                holes.append(Hole((gx, gy), drill))
            continue
        (w, h) = _nums(pad_node, "size", 2)
        if shape == "roundrect":
            shape = "rect"  # corner radius below fabrication resolution here
        if shape not in ("circle", "rect", "oval"):
            warn(pad_node, f"unsupported pad shape {shape!r} approximated as rect")
            shape = "rect"
        net_node = pad_node.child("net")
        if net_node is None:
            continue  # unconnected pad carries no copper requirement in subset
        net_id = int(net_node.atoms()[0])
        for layer in _pad_layers(pad_node, copper_layers) or [copper_layers[0]]:
            pads_by_key.setdefault((net_id, layer), []).append(Pad(
                center=(gx, gy), shape=shape, size=(w, h),
                rotation=normalize_rotation(frot + prot),
                footprint_ref=reference,
            ))
