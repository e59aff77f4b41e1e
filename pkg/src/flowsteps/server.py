"""HTTP/JSON facade over sessions, translation, and fixtures.

All state lives in per-id sessions; mutations on one session are serialized
behind its lock while different sessions proceed concurrently. Fixture files
are only ever loaded by name from the configured directory.
"""

from __future__ import annotations

import asyncio
import json
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse, StreamingResponse

from .errors import FiringError, FlowstepsError
from .gwt import render_feature
from .mapping import pn_to_scenarios, scenarios_to_feature
from .petri import classify_constructs
from .pnml import parse_pnml
from .session import (
    Session,
    SessionPolicy,
    create_session,
    fire_interactive,
    session_state,
)

_SAFE_NAME = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._ -]*$")


@dataclass
class ServerConfig:
    fixtures_dir: str
    host: str = "127.0.0.1"
    port: int = 8000
    max_sessions: int = 16
    cors: bool = False

    def __post_init__(self):
        if not (1 <= self.port <= 65535):
            raise ValueError(f"invalid port {self.port}")
        if not Path(self.fixtures_dir).is_dir():
            raise ValueError(f"fixtures directory {self.fixtures_dir!r} does not exist")

    @classmethod
    def from_file(cls, path: str) -> "ServerConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {"fixtures_dir", "host", "port", "max_sessions", "cors"}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "fixtures_dir" not in raw:
            raise ValueError("config must set fixtures_dir")
        return cls(**raw)


class ApiError(Exception):
    def __init__(self, status_code: int, code: str, message: str, details=None):
        super().__init__(message)
        self.status_code = status_code
        self.code = code
        self.message = message
        self.details = details


@dataclass
class _LiveSession:
    session: Session
    sut_file: str | None
    created_at: float
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)
    subscribers: list[asyncio.Queue] = field(default_factory=list)


class _Fixtures:
    def __init__(self, directory: str):
        self.directory = Path(directory)

    def listing(self) -> dict:
        names = sorted(p.name for p in self.directory.iterdir() if p.is_file())
        return {
            "models": [n for n in names if n.endswith(".pnml")],
            "bindings": [n for n in names if n.endswith(".bindings.json")],
            "suts": [n for n in names if n.endswith(".sut.json")],
        }

    def read(self, name: str, suffix: str) -> str:
        if not _SAFE_NAME.match(name) or not name.endswith(suffix):
            raise ApiError(400, "invalid_name",
                           f"fixture name {name!r} must be a plain {suffix} file name")
        path = self.directory / name
        if not path.is_file():
            raise ApiError(404, "not_found", f"no fixture named {name!r}")
        return path.read_text(encoding="utf-8")

    def load_net(self, name: str):
        return parse_pnml(self.read(name, ".pnml"))

    def load_json(self, name: str, suffix: str) -> dict:
        try:
            return json.loads(self.read(name, suffix))
        except json.JSONDecodeError as exc:
            raise ApiError(400, "invalid_fixture", f"{name}: not valid JSON: {exc}")


def _state_body(session: Session) -> dict:
    state = session_state(session)
    return {
        "marking": state["marking"].to_dict(),
        "enabled": [entry.to_dict() for entry in state["enabled"]],
        "log_length": len(state["log"]),
    }


def create_app(config: ServerConfig) -> FastAPI:
    app = FastAPI(title="flowsteps", version="0.1.0")
    fixtures = _Fixtures(config.fixtures_dir)
    live: dict[str, _LiveSession] = {}

    if config.cors:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
        )

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        body = {"error": {"code": exc.code, "message": exc.message}}
        if exc.details is not None:
            body["error"]["details"] = exc.details
        return JSONResponse(status_code=exc.status_code, content=body)

    @app.exception_handler(FlowstepsError)
    async def handle_domain_error(request: Request, exc: FlowstepsError):
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "invalid_input", "message": str(exc)}},
        )

    def get_live(session_id: str) -> _LiveSession:
        entry = live.get(session_id)
        if entry is None:
            raise ApiError(404, "not_found", f"no session {session_id!r}")
        return entry

    @app.get("/models")
    async def list_models():
        return fixtures.listing()

    @app.get("/models/{name}/gwt")
    async def model_gwt(name: str, loop_bound: int = 2, max_scenarios: int = 256):
        net = fixtures.load_net(name)
        traces = pn_to_scenarios(net, loop_bound=loop_bound, max_scenarios=max_scenarios)
        ast = scenarios_to_feature(traces, net, name=net.id)
        return {"feature": render_feature(ast)}

    @app.get("/models/{name}/net")
    async def model_net(name: str):
        # structure for clients that draw the net; enablement stays server-side
        net = fixtures.load_net(name)
        return {
            "id": net.id,
            "places": [{"id": p.id, "label": p.label} for p in net.places],
            "transitions": [
                {"id": t.id, "label": t.label} for t in net.transitions
            ],
            "arcs": [
                {"id": a.id, "source": a.source, "target": a.target,
                 "weight": a.weight}
                for a in net.arcs
            ],
            "initial_marking": net.initial_marking.to_dict(),
            "constructs": [
                {"node": node, "kind": kind.value}
                for node, kind in classify_constructs(net)
            ],
        }

    @app.post("/sessions", status_code=201)
    async def create(body: dict):
        known = {"model", "bindings", "sut", "advance_on_failure"}
        unknown = set(body) - known
        if unknown:
            raise ApiError(400, "invalid_request", f"unknown keys: {sorted(unknown)}")
        model = body.get("model")
        if not isinstance(model, str):
            raise ApiError(400, "invalid_request", "body must name a 'model' fixture")
        if len(live) >= config.max_sessions:
            raise ApiError(429, "session_limit",
                           f"at most {config.max_sessions} concurrent sessions")
        net = fixtures.load_net(model)
        manifest = None
        if body.get("bindings") is not None:
            manifest = fixtures.load_json(body["bindings"], ".bindings.json")
        sut_file = body.get("sut")
        sut_fixture = fixtures.load_json(sut_file, ".sut.json") if sut_file else None
        policy = SessionPolicy(advance_on_failure=bool(body.get("advance_on_failure", False)))
        session = create_session(net, manifest, sut_fixture, policy)
        live[session.id] = _LiveSession(
            session=session, sut_file=sut_file, created_at=time.time()
        )
        return {
            "session_id": session.id,
            "created_at": live[session.id].created_at,
            "state": _state_body(session),
        }

    @app.get("/sessions/{session_id}/state")
    async def state(session_id: str):
        entry = get_live(session_id)
        async with entry.lock:
            return _state_body(entry.session)

    @app.post("/sessions/{session_id}/fire")
    async def fire(session_id: str, body: dict):
        transition = body.get("transition")
        if not isinstance(transition, str):
            raise ApiError(400, "invalid_request", "body must name a 'transition'")
        entry = get_live(session_id)
        async with entry.lock:
            try:
                report = await run_in_threadpool(
                    fire_interactive, entry.session, transition
                )
            except FiringError as exc:
                raise ApiError(409, "transition_not_enabled", str(exc))
            payload = report.to_dict()
            for queue in entry.subscribers:
                queue.put_nowait(payload)
        return payload

    @app.post("/sessions/{session_id}/reset")
    async def reset(session_id: str):
        entry = get_live(session_id)
        async with entry.lock:
            # re-read the sut fixture so corrections on disk take effect
            sut_fixture = (
                fixtures.load_json(entry.sut_file, ".sut.json")
                if entry.sut_file
                else None
            )
            entry.session.reset(sut_fixture)
            return {"state": _state_body(entry.session)}

    @app.delete("/sessions/{session_id}")
    async def delete(session_id: str):
        entry = get_live(session_id)
        async with entry.lock:
            for queue in entry.subscribers:
                queue.put_nowait(None)
            del live[session_id]
        return {"deleted": True}

    @app.get("/sessions/{session_id}/events")
    async def events(session_id: str):
        entry = get_live(session_id)

        async def stream():
            queue: asyncio.Queue = asyncio.Queue()
            async with entry.lock:
                backlog = [report.to_dict() for report in entry.session.log]
                entry.subscribers.append(queue)
            try:
                for payload in backlog:
                    yield _sse_event(payload)
                while True:
                    payload = await queue.get()
                    if payload is None:
                        break
                    yield _sse_event(payload)
            finally:
                if queue in entry.subscribers:
                    entry.subscribers.remove(queue)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


def _sse_event(payload: dict) -> str:
    return f"event: firing\ndata: {json.dumps(payload, sort_keys=True)}\n\n"


def serve(config: ServerConfig) -> None:
    """Run the HTTP service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)
