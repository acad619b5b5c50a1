"""HTTP service: design storage, evaluation, and steerable evolution sessions.

Designs persist as JSON files under the data directory and survive
restarts; sessions live in memory. A session runs its optimizer on a
worker thread and, when a human checkpoint comes up, parks on an event
until a choice or an abort arrives over the API.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import GamesmithError, SchemaError
from .evolve import Candidate, EvolutionConfig, EvolutionResult, balance, generate
from .metrics import MetricWeights
from .model import GameDesign, validate_design
from .sampler import SamplerCaps
from .serialize import design_from_dict, design_to_dict
from .simulate import SimConfig, playthrough_digest, render_summary, simulate


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _issues_payload(report) -> list[dict]:
    return [
        {"severity": i.severity, "code": i.code, "message": i.message,
         "componentRef": i.component_ref}
        for i in report.issues
    ]


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, **extra: Any):
        super().__init__(message)
        self.status = status
        self.payload = {"error": code, "message": message, **extra}


class DesignStore:
    """Disk-backed design storage with optimistic revisions."""

    def __init__(self, data_dir: Path):
        self.dir = data_dir / "designs"
        self.dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._items: dict[str, dict] = {}
        for path in sorted(self.dir.glob("*.json")):
            doc = json.loads(path.read_text())
            self._items[doc["id"]] = doc

    def _write(self, doc: dict) -> None:
        path = self.dir / f"{doc['id']}.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(doc, indent=2) + "\n")
        tmp.replace(path)

    def create(self, design: GameDesign) -> dict:
        with self._lock:
            design_id = uuid.uuid4().hex[:12]
            doc = {"id": design_id, "name": design.name, "revision": 1,
                   "design": design_to_dict(design)}
            self._items[design_id] = doc
            self._write(doc)
            return doc

    def get(self, design_id: str) -> dict:
        doc = self._items.get(design_id)
        if doc is None:
            raise ApiError(404, "NOT_FOUND", f"no design {design_id!r}")
        return doc

    def list(self) -> list[dict]:
        return [{"id": d["id"], "name": d["name"], "revision": d["revision"]}
                for d in sorted(self._items.values(), key=lambda d: d["id"])]

    def update(self, design_id: str, design: GameDesign, revision: int) -> dict:
        with self._lock:
            doc = self.get(design_id)
            if revision != doc["revision"]:
                raise ApiError(409, "REVISION_CONFLICT",
                               f"design is at revision {doc['revision']}, not {revision}")
            doc = {"id": design_id, "name": design.name,
                   "revision": doc["revision"] + 1, "design": design_to_dict(design)}
            self._items[design_id] = doc
            self._write(doc)
            return doc

    def delete(self, design_id: str) -> None:
        with self._lock:
            self._items.pop(design_id, None)
            path = self.dir / f"{design_id}.json"
            if path.exists():
                path.unlink()

    def load_design(self, design_id: str) -> GameDesign:
        return design_from_dict(self.get(design_id)["design"])


@dataclass
class Session:
    id: str
    mode: str
    config: EvolutionConfig
    status: str = "running"  # running | awaitingChoice | finished | aborted
    generation: int = 0
    pending: list[Candidate] = field(default_factory=list)
    result: EvolutionResult | None = None
    created_at: str = field(default_factory=_now)
    updated_at: str = field(default_factory=_now)
    lock: threading.Lock = field(default_factory=threading.Lock)
    turn: threading.Event = field(default_factory=threading.Event)
    choice: int | None = None
    abort_requested: bool = False
    error: str | None = None
    thread: threading.Thread | None = None

    def to_dict(self) -> dict:
        doc = {
            "id": self.id,
            "mode": self.mode,
            "status": self.status,
            "generation": self.generation,
            "config": self.config.to_dict(),
            "createdAt": self.created_at,
            "updatedAt": self.updated_at,
        }
        if self.error is not None:
            doc["error"] = self.error
        if self.status == "awaitingChoice":
            doc["pendingCandidates"] = [
                {"index": i, "fitness": c.fitness, "playthrough": c.digest,
                 "design": _design_digest(c.design)}
                for i, c in enumerate(self.pending)
            ]
        if self.status == "finished" and self.result is not None:
            doc["result"] = self.result.to_dict()
        return doc


def _design_digest(design: GameDesign) -> dict:
    return {
        "name": design.name,
        "states": len(design.states),
        "actions": len(design.actions),
        "resources": len(design.resources),
        "transitions": len(design.transitions),
        "taps": len(design.taps),
        "drains": len(design.drains),
        "converters": len(design.converters),
    }


class _SessionSelector:
    """Bridges the GA's selector callback to the HTTP choose/abort endpoints."""

    def __init__(self, session: Session):
        self.session = session

    def choose(self, generation: int, candidates: list[Candidate]) -> int | None:
        s = self.session
        with s.lock:
            if s.abort_requested:
                return None
            s.status = "awaitingChoice"
            s.generation = generation
            s.pending = list(candidates)
            s.choice = None
            s.turn.clear()
            s.updated_at = _now()
        s.turn.wait()
        with s.lock:
            s.pending = []
            if s.abort_requested or s.choice is None:
                return None
            if s.status != "aborted":
                s.status = "running"
            s.updated_at = _now()
            return s.choice


class SessionManager:
    def __init__(self, store: DesignStore, caps: SamplerCaps):
        self.store = store
        self.caps = caps
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def get(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise ApiError(404, "NOT_FOUND", f"no session {session_id!r}")
        return session

    def start(self, design: GameDesign, mode: str, config: EvolutionConfig) -> Session:
        session = Session(id=uuid.uuid4().hex[:12], mode=mode, config=config)
        selector = _SessionSelector(session)

        def progress(generation: int, best: float, mean: float) -> bool:
            with session.lock:
                session.generation = generation
                session.updated_at = _now()
                return not session.abort_requested

        def work() -> None:
            try:
                optimizer = balance if mode == "balance" else generate
                kwargs = {"selector": selector, "progress": progress}
                if mode == "generate":
                    kwargs["caps"] = self.caps
                result = optimizer(design, config, **kwargs)
                with session.lock:
                    session.result = result
                    session.status = "aborted" if result.aborted else "finished"
                    session.updated_at = _now()
            except Exception as exc:  # surfaced via the session, not the log
                with session.lock:
                    session.status = "aborted"
                    session.error = str(exc)
                    session.updated_at = _now()

        session.thread = threading.Thread(target=work, daemon=True)
        with self._lock:
            self._sessions[session.id] = session
        session.thread.start()
        return session

    def choose(self, session_id: str, index: int) -> Session:
        session = self.get(session_id)
        with session.lock:
            if session.status != "awaitingChoice":
                raise ApiError(409, "WRONG_STATE",
                               f"session is {session.status}, not awaitingChoice")
            if not 0 <= index < len(session.pending):
                raise ApiError(400, "INDEX_OUT_OF_RANGE",
                               f"index {index} outside 0..{len(session.pending) - 1}")
            session.choice = index
            session.status = "running"
            session.updated_at = _now()
            session.turn.set()
        return session

    def abort(self, session_id: str) -> Session:
        session = self.get(session_id)
        with session.lock:
            if session.status == "finished":
                raise ApiError(409, "WRONG_STATE", "session already finished")
            if session.status != "aborted":
                session.abort_requested = True
                session.status = "aborted"
                session.updated_at = _now()
                session.turn.set()
        return session

    def result(self, session_id: str) -> dict:
        session = self.get(session_id)
        with session.lock:
            if session.result is None:
                raise ApiError(409, "WRONG_STATE",
                               f"session is {session.status} with no result yet")
            return {"result": session.result.to_dict(),
                    "partial": session.result.aborted,
                    "status": session.status}


def _decode_design(payload: Any) -> GameDesign:
    if not isinstance(payload, dict):
        raise ApiError(400, "SCHEMA_ERROR", "design document must be an object")
    try:
        design = design_from_dict(payload)
    except SchemaError as exc:
        raise ApiError(400, "SCHEMA_ERROR", str(exc))
    report = validate_design(design)
    if not report.valid:
        raise ApiError(400, "VALIDATION_ERROR", "design is invalid",
                       issues=_issues_payload(report))
    return design


def create_app(data_dir: str | Path = "data",
               default_sim: SimConfig | None = None,
               default_evo: EvolutionConfig | None = None,
               caps: SamplerCaps | None = None,
               static_dir: str | Path | None = None) -> FastAPI:
    """Build the service; all state lives under `data_dir`."""
    store = DesignStore(Path(data_dir))
    caps = caps or SamplerCaps()
    sessions = SessionManager(store, caps)
    default_sim = default_sim or SimConfig()
    default_evo = default_evo or EvolutionConfig()
    app = FastAPI(title="gamesmith", version="0.1.0")

    @app.exception_handler(ApiError)
    async def handle_api_error(_request: Request, exc: ApiError):
        return JSONResponse(exc.payload, status_code=exc.status)

    async def body_of(request: Request) -> dict:
        raw = await request.body()
        if not raw:
            return {}
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ApiError(400, "PARSE_ERROR", f"body is not valid JSON: {exc}")
        if not isinstance(doc, dict):
            raise ApiError(400, "SCHEMA_ERROR", "body must be a JSON object")
        return doc

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.post("/designs", status_code=201)
    async def create_design(request: Request):
        design = _decode_design(await body_of(request))
        return store.create(design)

    @app.get("/designs")
    async def list_designs():
        return {"designs": store.list()}

    @app.get("/designs/{design_id}")
    async def get_design(design_id: str):
        return store.get(design_id)

    @app.put("/designs/{design_id}")
    async def update_design(design_id: str, request: Request, revision: int | None = None):
        if revision is None:
            raise ApiError(400, "MISSING_REVISION",
                           "pass the current revision as ?revision=N")
        design = _decode_design(await body_of(request))
        return store.update(design_id, design, revision)

    @app.delete("/designs/{design_id}", status_code=204)
    async def delete_design(design_id: str):
        store.delete(design_id)

    def _weights_from(doc: dict) -> MetricWeights:
        weights = doc.get("weights", {})
        if not isinstance(weights, dict):
            raise ApiError(400, "SCHEMA_ERROR", "weights must be an object")
        try:
            return MetricWeights.from_dict(weights)
        except GamesmithError as exc:
            raise ApiError(400, exc.code, str(exc))

    def _sim_from(doc: dict, base: SimConfig) -> SimConfig:
        overrides = doc.get("simConfig", {})
        try:
            return SimConfig.from_dict(overrides, base)
        except ValueError as exc:
            raise ApiError(400, "SCHEMA_ERROR", str(exc))

    @app.post("/designs/{design_id}/evaluate")
    async def evaluate_design(design_id: str, request: Request):
        design = store.load_design(design_id)
        doc = await body_of(request)
        weights = _weights_from(doc)
        sim_cfg = _sim_from(doc, default_sim)
        if "seed" in doc:
            sim_cfg = sim_cfg.with_seed(int(doc["seed"]))
        report = simulate(design, weights, sim_cfg)
        return {
            "report": report.to_dict(),
            "summary": render_summary(design, report),
            "digest": playthrough_digest(report),
            "seed": sim_cfg.seed,
        }

    @app.post("/sessions", status_code=201)
    async def start_session(request: Request):
        doc = await body_of(request)
        design_id = doc.get("designId")
        mode = doc.get("mode")
        if mode not in ("balance", "generate"):
            raise ApiError(400, "SCHEMA_ERROR", "mode must be 'balance' or 'generate'")
        if not design_id:
            raise ApiError(400, "SCHEMA_ERROR", "designId is required")
        design = store.load_design(design_id)
        try:
            config = EvolutionConfig.from_dict(doc.get("config", {}), default_evo)
        except (ValueError, GamesmithError) as exc:
            raise ApiError(400, "SCHEMA_ERROR", str(exc))
        session = sessions.start(design, mode, config)
        return {"id": session.id, "status": session.status, "mode": mode}

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        session = sessions.get(session_id)
        with session.lock:
            return session.to_dict()

    @app.post("/sessions/{session_id}/choice")
    async def choose(session_id: str, request: Request):
        doc = await body_of(request)
        if "index" not in doc:
            raise ApiError(400, "SCHEMA_ERROR", "index is required")
        session = sessions.choose(session_id, int(doc["index"]))
        with session.lock:
            return {"id": session.id, "status": session.status}

    @app.post("/sessions/{session_id}/abort")
    async def abort(session_id: str):
        session = sessions.abort(session_id)
        with session.lock:
            return {"id": session.id, "status": session.status}

    @app.get("/sessions/{session_id}/result")
    async def session_result(session_id: str):
        return sessions.result(session_id)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def serve(host: str, port: int, data_dir: str,
          static_dir: str | None = None) -> None:
    import uvicorn

    app = create_app(data_dir=data_dir, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
