"""HTTP facade over the renewal library.

One process, in-memory sessions. A session accumulates the workflow state
(two boards, an alignment, a computed plan, sustainability parameters) and
every endpoint is a thin translation layer over the library calls the CLI
uses, so exported artifacts stay byte-identical between the two surfaces.

Wire conventions:
  * board uploads are raw file bodies; the first non-blank byte picks the
    parser ("{" canonical JSON, "(" KiCad s-expression)
  * alignment specs are {"mode": "bboxCorner", "corner": "BL"},
    {"mode": "footprintCenter", "refOld": "U1", "refNew": "U1"} or
    {"mode": "explicitTransform", "transform": {"dx", "dy", "rotation"}}
  * geometry in comparison responses is rounded to 1e-4 mm for transport
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import HTMLResponse
from fastapi.staticfiles import StaticFiles

from .diff import (
    IDENTITY,
    AlignmentSpec,
    RenewalPlan,
    compute_alignment,
    run_renewal,
)
from .fabplan import metrics_payload, plan_artifacts
from .geometry import PolygonSet, Transform, bounding_box
from .ingest import BoardParseError, parse_canonical_json, parse_sexpr_board
from .model import Board, transform_board
from .sustain import (
    SustainParams,
    analyze,
    load_params,
    params_from_mapping,
    render_report_json,
)

PARAMS_ENV_VAR = "RENEW_PARAMS"
UI_DIR_ENV_VAR = "RENEW_UI_DIR"
DEFAULT_UI_DIR = "frontend/dist"

EXPORT_KINDS = ("plan.json", "stencil.svg", "engrave.svg", "engrave.gcode",
                "report.json")
_MEDIA_TYPES = {
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".gcode": "text/plain",
}

BOARD_ROLES = ("old", "new")


@dataclass
class _Session:
    id: str
    params: SustainParams
    old_board: Board | None = None
    new_board: Board | None = None
    transform: Transform | None = None
    plan: RenewalPlan | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class _SessionStore:
    """Sessions live for the process lifetime; no eviction at desk scale."""

    def __init__(self, default_params: SustainParams):
        self._default_params = default_params
        self._sessions: dict[str, _Session] = {}
        self._lock = threading.Lock()

    def create(self) -> _Session:
        session = _Session(id=uuid.uuid4().hex, params=self._default_params)
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> _Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session


def _default_params() -> SustainParams:
    params = SustainParams()
    env_path = os.environ.get(PARAMS_ENV_VAR)
    if env_path:
        params = load_params(env_path, params)
    return params


def _parse_board(body: bytes) -> tuple[Board, list]:
    head = body.lstrip()[:1]
    diagnostics: list = []
    if head == b"{":
        board = parse_canonical_json(body, diagnostics)
        return board, diagnostics
    if head == b"(":
        return parse_sexpr_board(body)
    raise BoardParseError("unrecognized board format", line=1)


def _board_summary(board: Board) -> dict:
    return {
        "layers": list(board.layers),
        "bbox": list(bounding_box(board.outline)),
        "netCount": len(board.nets),
        "footprintRefs": [fp.reference for fp in board.footprints],
    }


def _spec_from_payload(doc) -> AlignmentSpec:
    if not isinstance(doc, dict):
        raise ValueError("alignment spec must be a JSON object")
    mode = doc.get("mode")
    if mode == "bboxCorner":
        return AlignmentSpec.bbox_corner(str(doc.get("corner", "BL")))
    if mode == "footprintCenter":
        ref_old, ref_new = doc.get("refOld"), doc.get("refNew")
        if not ref_old or not ref_new:
            raise ValueError("footprintCenter needs refOld and refNew")
        return AlignmentSpec.footprint_center(str(ref_old), str(ref_new))
    if mode == "explicitTransform":
        raw = doc.get("transform") or {}
        return AlignmentSpec.explicit(Transform(
            dx=float(raw.get("dx", 0.0)),
            dy=float(raw.get("dy", 0.0)),
            rotation=int(raw.get("rotation", 0))))
    raise ValueError(f"unknown alignment mode: {mode!r}")


def _transform_payload(t: Transform) -> dict:
    return {"dx": t.dx, "dy": t.dy, "rotation": t.rotation}


def _point4(point) -> list[float]:
    return [round(point[0], 4), round(point[1], 4)]


def _regions4(shape: PolygonSet) -> list[dict]:
    return [
        {"outer": [_point4(p) for p in outer],
         "holes": [[_point4(p) for p in hole] for hole in holes]}
        for outer, holes in shape.polygons
    ]


def _compare_payload(plan: RenewalPlan, old_board: Board, new_board: Board,
                     t: Transform) -> dict:
    """Render-ready geometry for the UI overlay plus the plan metrics."""
    return {
        "layers": list(plan.layers),
        "deposit": {layer: _regions4(plan.deposit_regions[layer])
                    for layer in plan.layers},
        "engrave": {layer: _regions4(plan.engrave_regions[layer])
                    for layer in plan.layers},
        "conflicts": {
            "messages": list(plan.conflicts.messages),
            "regions": {layer: _regions4(regions)
                        for layer, regions
                        in sorted(plan.conflicts.regions.items())},
        },
        "trim": _regions4(plan.trim_region),
        "oldOutline": _regions4(old_board.outline),
        "newOutline": _regions4(transform_board(new_board, t).outline),
        "transform": _transform_payload(t),
        "metrics": metrics_payload(plan.metrics),
    }


async def _json_body(request: Request) -> dict:
    body = await request.body()
    if not body:
        return {}
    try:
        doc = json.loads(body)
    except ValueError:
        raise HTTPException(status_code=400, detail="body must be JSON")
    if not isinstance(doc, dict):
        raise HTTPException(status_code=400, detail="body must be an object")
    return doc


def create_app(ui_dir: str | None = None,
               default_params: SustainParams | None = None) -> FastAPI:
    """Build the application. `ui_dir` overrides $RENEW_UI_DIR; sessions
    start from `default_params` (falling back to $RENEW_PARAMS, then the
    built-in defaults, same precedence the CLI applies)."""
    if default_params is None:
        default_params = _default_params()
    store = _SessionStore(default_params)
    app = FastAPI(title="board renewal service")

    @app.post("/session")
    def create_session() -> dict:
        return {"id": store.create().id}

    @app.post("/session/{session_id}/board/{role}")
    async def post_board(session_id: str, role: str,
                         request: Request) -> dict:
        session = store.get(session_id)
        if role not in BOARD_ROLES:
            raise HTTPException(status_code=404,
                                detail=f"unknown board role: {role!r}")
        body = await request.body()
        try:
            board, diagnostics = _parse_board(body)
        except BoardParseError as exc:
            raise HTTPException(status_code=422, detail={
                "message": str(exc),
                "diagnostics": [{"severity": "error", "line": exc.line,
                                 "message": str(exc)}],
            })
        with session.lock:
            if role == "old":
                session.old_board = board
            else:
                session.new_board = board
            # any previously computed alignment or plan is now stale
            session.transform = None
            session.plan = None
        summary = _board_summary(board)
        summary["diagnostics"] = [
            {"severity": d.severity, "line": d.line, "message": d.message}
            for d in diagnostics
        ]
        return summary

    @app.post("/session/{session_id}/align")
    async def post_align(session_id: str, request: Request) -> dict:
        session = store.get(session_id)
        doc = await _json_body(request)
        with session.lock:
            old_board, new_board = session.old_board, session.new_board
            if old_board is None or new_board is None:
                raise HTTPException(status_code=409,
                                    detail="both boards must be uploaded")
            try:
                spec = _spec_from_payload(doc)
                t = compute_alignment(old_board, new_board, spec)
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            session.transform = t
            session.plan = None
        return _transform_payload(t)

    @app.post("/session/{session_id}/compare")
    async def post_compare(session_id: str, request: Request) -> dict:
        session = store.get(session_id)
        doc = await _json_body(request)
        with session.lock:
            old_board, new_board = session.old_board, session.new_board
            if old_board is None or new_board is None:
                raise HTTPException(status_code=409,
                                    detail="both boards must be uploaded")
            layers = doc.get("layers")
            if layers is None:
                layers = list(old_board.layers)
            if (not isinstance(layers, list) or not layers
                    or not all(isinstance(l, str) for l in layers)):
                raise HTTPException(status_code=400,
                                    detail="layers must be a non-empty "
                                           "list of layer names")
            t = session.transform if session.transform is not None \
                else IDENTITY
            try:
                plan = run_renewal(old_board, new_board,
                                   AlignmentSpec.explicit(t), layers)
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            session.plan = plan
        return _compare_payload(plan, old_board, new_board, t)

    @app.post("/session/{session_id}/analyze")
    async def post_analyze(session_id: str, request: Request) -> dict:
        session = store.get(session_id)
        doc = await _json_body(request)
        overrides = doc.get("overrides") or {}
        if not isinstance(overrides, dict):
            raise HTTPException(status_code=400,
                                detail="overrides must be an object")
        persist = bool(doc.get("persist", False))
        with session.lock:
            plan = session.plan
            if plan is None:
                raise HTTPException(status_code=409,
                                    detail="no plan; run compare first")
            old_board, new_board = session.old_board, session.new_board
            try:
                params = params_from_mapping(overrides, session.params)
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            if persist:
                session.params = params
        report = analyze(plan, old_board, new_board, params)
        # round-trip through the artifact serializer so the response is
        # exactly what export/report.json would stream
        return json.loads(render_report_json(report))

    @app.get("/session/{session_id}/export/{kind}")
    def get_export(session_id: str, kind: str) -> Response:
        session = store.get(session_id)
        if kind not in EXPORT_KINDS:
            raise HTTPException(status_code=404,
                                detail=f"unknown export kind: {kind!r}")
        with session.lock:
            plan = session.plan
            old_board, new_board = session.old_board, session.new_board
            params = session.params
        if plan is None:
            raise HTTPException(status_code=409,
                                detail="no plan; run compare first")
        if kind == "report.json":
            data = render_report_json(analyze(plan, old_board, new_board,
                                              params))
        else:
            data = plan_artifacts(plan, old_board, new_board, params)[kind]
        media_type = _MEDIA_TYPES[os.path.splitext(kind)[1]]
        return Response(content=data, media_type=media_type)

    directory = ui_dir or os.environ.get(UI_DIR_ENV_VAR) or DEFAULT_UI_DIR
    if os.path.isdir(directory):
        app.mount("/", StaticFiles(directory=directory, html=True),
                  name="ui")
    else:
        @app.get("/", include_in_schema=False)
        def index() -> HTMLResponse:
            return HTMLResponse(
                "<h1>board renewal service</h1>"
                "<p>UI bundle not found; the JSON API is live.</p>")

    return app
