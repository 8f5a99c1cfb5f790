"""HTTP/JSON API over a workspace directory and a measure store.

Documents persist as their canonical DSL files on disk (the same files the
CLI reads), so CLI, service and UI stay interchangeable. Writes are
serialized through a single lock and swap in a freshly resolved snapshot;
readers always see a complete workspace (snapshot isolation). Server-sent
events push kpi_status and revision changes.
"""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse, StreamingResponse

from . import archtrace, guidance, render, validation
from .diagnostics import Diagnostic, SafError
from .dsl import parse_document, parse_workspace, serialize
from .ingest import format_rfc3339, load_store, parse_rfc3339
from .kpi import KpiState, KpiStatus, detect_transitions, evaluate
from .workspace import Workspace

KIND_SUFFIX = {
    "dm": ".dm.saf",
    "sq": ".sq.csv",
    "matrix": ".matrix.csv",
    "kpi": ".kpi.saf",
    "arch": ".arch.saf",
}


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, diagnostics: list[Diagnostic] | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.diagnostics = diagnostics or []


def status_payload(status: KpiStatus) -> dict:
    return {
        "kpi_id": status.kpi_id,
        "value": status.value,
        "state": status.state.value,
        "as_of": format_rfc3339(status.as_of),
        "inputs_used": status.inputs_used,
    }


@dataclass
class _Subscriber:
    events: queue.Queue = field(default_factory=lambda: queue.Queue(maxsize=256))
    dropped: bool = False


class EventBus:
    """Non-blocking fan-out; slow consumers are dropped with a marker event."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._subscribers: list[_Subscriber] = []

    def subscribe(self) -> _Subscriber:
        sub = _Subscriber()
        with self._lock:
            self._subscribers.append(sub)
        return sub

    def unsubscribe(self, sub: _Subscriber) -> None:
        with self._lock:
            if sub in self._subscribers:
                self._subscribers.remove(sub)

    def publish(self, event_type: str, payload: dict) -> None:
        with self._lock:
            for sub in list(self._subscribers):
                if sub.dropped:
                    continue
                try:
                    sub.events.put_nowait((event_type, payload))
                except queue.Full:
                    sub.dropped = True
                    self._subscribers.remove(sub)


class ServiceState:
    """Workspace snapshot + store, guarded by a single writer lock."""

    def __init__(self, workspace_dir: Path, store_dir: Path):
        self.workspace_dir = workspace_dir
        self.store_dir = store_dir
        self.lock = threading.Lock()
        self.revision = 1
        self.bus = EventBus()
        result = parse_workspace(workspace_dir)
        if result.document is None:
            details = "; ".join(d.render() for d in result.diagnostics)
            raise SafError("E100", f"workspace does not load: {details}")
        self.workspace: Workspace = result.document
        self.store, _ = load_store(store_dir)
        self.last_states: dict[str, KpiState] = {}
        now = datetime.now(timezone.utc)
        for kpi in self.workspace.all_kpis():
            self.last_states[kpi.id] = evaluate(kpi, self.store, now).state

    def document_path(self, kind: str, doc_id: str) -> Path:
        return self.workspace_dir / f"{doc_id}{KIND_SUFFIX[kind]}"

    def snapshot(self) -> tuple[Workspace, int]:
        return self.workspace, self.revision


def create_app(
    workspace_dir: str | Path,
    store_dir: str | Path,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    state = ServiceState(Path(workspace_dir), Path(store_dir))
    app = FastAPI(title="saf-toolkit service", version="0.1.0")
    app.state.saf = state

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        body = {"code": exc.code, "message": exc.message}
        if exc.diagnostics:
            body["diagnostics"] = [d.to_json() for d in exc.diagnostics]
        return JSONResponse(status_code=exc.status, content=body)

    @app.middleware("http")
    async def _revision_header(request: Request, call_next):
        response = await call_next(request)
        response.headers["X-Workspace-Revision"] = str(state.revision)
        return response

    # --- workspace documents -------------------------------------------------

    @app.get("/api/workspace")
    def workspace_index():
        ws, revision = state.snapshot()
        documents = []
        for kind, items in (
            ("dm", ws.decision_maps),
            ("sq", ws.sq_models),
            ("matrix", ws.matrices),
            ("kpi", ws.kpi_documents),
            ("arch", ws.architecture_descriptions),
        ):
            for doc in items:
                documents.append(
                    {"kind": kind, "id": doc.id, "file": state.document_path(kind, doc.id).name}
                )
        return {"revision": revision, "documents": documents}

    def _find_document(ws: Workspace, kind: str, doc_id: str):
        if kind not in KIND_SUFFIX:
            raise ApiError(404, "unknown_kind", f"unknown document kind {kind!r}")
        doc = ws.find_document(kind, doc_id)
        if doc is None:
            raise ApiError(404, "not_found", f"no {kind} document with id {doc_id!r}")
        return doc

    @app.get("/api/models/{kind}/{doc_id}")
    def get_model(kind: str, doc_id: str):
        ws, revision = state.snapshot()
        doc = _find_document(ws, kind, doc_id)
        return Response(
            content=serialize(doc),
            media_type="text/plain; charset=utf-8",
            headers={"X-Workspace-Revision": str(revision)},
        )

    @app.put("/api/models/{kind}/{doc_id}")
    async def put_model(kind: str, doc_id: str, request: Request):
        if kind not in KIND_SUFFIX:
            raise ApiError(404, "unknown_kind", f"unknown document kind {kind!r}")
        raw = await request.body()
        text = raw.decode("utf-8", errors="replace")
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("application/json"):
            try:
                text = json.loads(text)["text"]
            except (ValueError, KeyError, TypeError) as exc:
                raise ApiError(400, "malformed_body", f"JSON body needs a 'text' field: {exc}")

        with state.lock:
            if_match = request.headers.get("if-match")
            if if_match is not None and if_match.strip() != str(state.revision):
                raise ApiError(
                    409,
                    "revision_conflict",
                    f"workspace revision is {state.revision}, If-Match was {if_match.strip()}",
                )
            path = state.document_path(kind, doc_id)
            result = parse_document(text, path)
            if result.document is None:
                raise ApiError(422, "invalid_document", "document does not parse", result.diagnostics)
            if result.document.id != doc_id:
                raise ApiError(
                    422,
                    "id_mismatch",
                    f"document id {result.document.id!r} does not match URL id {doc_id!r}",
                )
            canonical = serialize(result.document)
            previous = path.read_text(encoding="utf-8") if path.exists() else None
            path.write_text(canonical, encoding="utf-8")
            reloaded = parse_workspace(state.workspace_dir)
            if reloaded.document is None:
                # Atomic per id: restore the old bytes, keep the old snapshot.
                if previous is None:
                    path.unlink()
                else:
                    path.write_text(previous, encoding="utf-8")
                raise ApiError(
                    422, "invalid_workspace", "document breaks the workspace", reloaded.diagnostics
                )
            state.workspace = reloaded.document
            state.revision += 1
            revision = state.revision
        state.bus.publish("revision", {"revision": revision, "kind": kind, "id": doc_id})
        return {"revision": revision, "diagnostics": []}

    # --- validation & guidance -----------------------------------------------

    @app.post("/api/validate")
    def validate_workspace():
        ws, revision = state.snapshot()
        diags = validation.validate(ws)
        return {"revision": revision, "diagnostics": [d.to_json() for d in diags]}

    @app.get("/api/consistency")
    def consistency():
        ws, revision = state.snapshot()
        summary = validation.consistency_summary(ws)
        return {"revision": revision, **summary.to_json()}

    @app.get("/api/models/dm/{doc_id}/render")
    def render_dm(doc_id: str, format: str = Query("svg")):
        ws, revision = state.snapshot()
        dm = _find_document(ws, "dm", doc_id)
        layout = render.layout_dm(dm)
        headers = {"X-Workspace-Revision": str(revision)}
        if format == "svg":
            return Response(
                content=render.render_svg(layout, dm), media_type="image/svg+xml", headers=headers
            )
        if format == "drawio":
            return Response(
                content=render.export_drawio(layout, dm), media_type="application/xml", headers=headers
            )
        if format == "json":
            return JSONResponse(render.layout_to_json(layout), headers=headers)
        raise ApiError(400, "unknown_format", f"unknown render format {format!r}")

    @app.post("/api/guidance/decision-graph/step")
    async def graph_step(request: Request):
        try:
            payload = await request.json()
            answers = payload["answers"]
            assert isinstance(answers, list)
        except Exception as exc:
            raise ApiError(400, "malformed_body", f"body must be {{\"answers\": [...]}}: {exc}")
        try:
            outcome = guidance.classify_impact(guidance.DEFAULT_DECISION_GRAPH, list(answers))
        except SafError as exc:
            raise ApiError(400, exc.code, exc.message)
        if outcome.done:
            return {"level": outcome.level.value}
        return {"next_question": outcome.pending_question, "node": outcome.pending_node}

    @app.get("/api/guidance/checklist")
    def checklist():
        ws, revision = state.snapshot()
        report = guidance.checklist_report(ws)
        return {
            "revision": revision,
            "items": [
                {"item": r.item_id, "status": r.status, "evidence": r.evidence} for r in report
            ],
        }

    @app.get("/api/suggestions")
    def suggestions(dm: str = Query(...)):
        ws, revision = state.snapshot()
        doc = _find_document(ws, "dm", dm)
        result = guidance.suggest_effects(doc, list(ws.matrices))
        return {"revision": revision, "suggestions": [s.to_json() for s in result]}

    # --- measures & KPIs ------------------------------------------------------

    @app.post("/api/measures")
    async def post_measures(request: Request, strict: bool = False, at: str | None = None):
        body = (await request.body()).decode("utf-8", errors="replace")
        with state.lock:
            ws = state.workspace
            specs = ws.metric_specs()
            outcome = state.store.ingest_batch(
                body,
                strict=strict,
                known_metrics=set(specs) if specs else None,
                metric_units={m.id: m.unit for m in specs.values()},
            )
            as_of = parse_rfc3339(at) if at else datetime.now(timezone.utc)
            ingested_metrics = {
                r.metric for r in state.store.records[len(state.store) - outcome.accepted:]
            }
            affected = [
                k for k in ws.all_kpis()
                if set(k.expression.metrics()) & ingested_metrics
            ]
            statuses = [evaluate(k, state.store, as_of) for k in affected]
            previous = [
                KpiStatus(k.id, None, state.last_states.get(k.id, KpiState.UNKNOWN), as_of, 0)
                for k in affected
            ]
            transitions = detect_transitions(previous, statuses, {k.id: k for k in affected})
            for status in statuses:
                state.last_states[status.kpi_id] = status.state
        for status in statuses:
            state.bus.publish("kpi_status", status_payload(status))
        for transition in transitions:
            state.bus.publish(
                "kpi_transition",
                {"kpi_id": transition.kpi_id, "fired_actions": list(transition.fired_actions)},
            )
        return {
            "accepted": outcome.accepted,
            "rejected": [{"line": r.line, "reason": r.reason} for r in outcome.rejected],
            "notes": outcome.notes,
            "evaluated": [status_payload(s) for s in statuses],
            "transitions": [
                {"kpi_id": t.kpi_id, "fired_actions": list(t.fired_actions)} for t in transitions
            ],
        }

    @app.get("/api/kpis")
    def list_kpis():
        ws, revision = state.snapshot()
        return {
            "revision": revision,
            "kpis": [
                {
                    "id": k.id,
                    "name": k.name,
                    "csf": k.csf_ref,
                    "expr": k.expression.render(),
                    "target": {
                        "comparator": k.target.comparator,
                        "threshold": k.target.threshold,
                        "unit": k.target.unit,
                    },
                    "concerns": list(k.concern_refs),
                    "on_miss": list(k.action_refs),
                }
                for k in ws.all_kpis()
            ],
        }

    @app.get("/api/kpis/{kpi_id}/status")
    def kpi_status(kpi_id: str, at: str | None = None):
        ws, revision = state.snapshot()
        kpi = ws.find_kpi(kpi_id)
        if kpi is None:
            raise ApiError(404, "E501", f"unknown KPI {kpi_id!r}")
        as_of = parse_rfc3339(at) if at else datetime.now(timezone.utc)
        status = evaluate(kpi, state.store, as_of)
        # Byte-compatible with `saf kpi eval --kpi ... --format json`.
        return Response(
            content=json.dumps(status_payload(status), indent=2) + "\n",
            media_type="application/json",
            headers={"X-Workspace-Revision": str(revision)},
        )

    @app.get("/api/kpis/{kpi_id}/trace")
    def kpi_trace(kpi_id: str):
        ws, revision = state.snapshot()
        try:
            trace = archtrace.trace_kpi(ws, kpi_id)
        except SafError as exc:
            raise ApiError(404, exc.code, exc.message)
        return JSONResponse(trace.to_json(), headers={"X-Workspace-Revision": str(revision)})

    @app.get("/api/elements/{element_id}/impacts")
    def element_impacts(element_id: str):
        ws, _ = state.snapshot()
        try:
            impacts = archtrace.impacts_of_element(ws, element_id)
        except SafError as exc:
            raise ApiError(404, exc.code, exc.message)
        return impacts.to_json()

    # --- events ----------------------------------------------------------------

    @app.get("/api/events")
    def events(max_events: int | None = None, timeout: float = 30.0):
        """SSE stream of kpi_status / kpi_transition / revision events.

        max_events closes the stream after N events (handy for scripts);
        timeout bounds the wait for the next event.
        """
        sub = state.bus.subscribe()

        def stream():
            sent = 0
            try:
                yield "event: hello\ndata: {}\n\n"
                while max_events is None or sent < max_events:
                    try:
                        event_type, payload = sub.events.get(timeout=timeout)
                    except queue.Empty:
                        if max_events is not None:
                            break
                        yield ": keepalive\n\n"
                        continue
                    yield f"event: {event_type}\ndata: {json.dumps(payload)}\n\n"
                    sent += 1
                if sub.dropped:
                    yield "event: dropped\ndata: {}\n\n"
            finally:
                state.bus.unsubscribe(sub)

        return StreamingResponse(stream(), media_type="text/event-stream")

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
