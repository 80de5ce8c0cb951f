"""HTTP control surface and WebSocket event stream for sessions.

Control is plain request/response JSON; events go out over a persistent
WebSocket per session, in sequence order, each frame wrapped in an
envelope carrying ``protocol_version``. A malformed inbound frame closes
that one connection with a protocol error; the session itself is
untouched.
"""
from __future__ import annotations

import asyncio
import json
import socket
import threading
from typing import Any

from fastapi import Body, FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from . import __version__
from .codemap import EditorGeometry
from .config import ServiceConfig
from .gazeio import GazeSample
from .llm import Backend, BackendRejected, BackendUnavailable, HttpChatBackend, MockBackend
from .metrics import InsufficientData
from .session import PhaseError, Session, SessionError, StreamError, open_session

PROTOCOL_VERSION = 1
_WS_POLL_S = 0.02


def backend_from_config(config: ServiceConfig) -> Backend:
    if config.backend.kind == "http":
        return HttpChatBackend(
            endpoint=config.backend.endpoint,
            model=config.backend.model,
            token_env=config.backend.token_env,
            timeout_s=config.backend.timeout_s,
            retries=config.backend.retries,
        )
    return MockBackend(config.backend.script)


def _error_response(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "detail": detail}})


def _frame(event_dict: dict) -> dict:
    return {"protocol_version": PROTOCOL_VERSION, **event_dict}


def create_app(config: ServiceConfig, backend: Backend | None = None) -> FastAPI:
    app = FastAPI(title="gazeprompt", version=__version__)
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()
    shared_backend = backend or backend_from_config(config)

    def get_session(session_id: str) -> Session | None:
        with registry_lock:
            return sessions.get(session_id)

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "version": __version__,
            "protocol_version": PROTOCOL_VERSION,
        }

    @app.post("/sessions")
    def create_session(body: dict = Body(default={})) -> Any:
        session_id = body.get("session_id")
        with registry_lock:
            if session_id and session_id in sessions:
                return _error_response(409, "duplicate_session", f"{session_id} already exists")
            session = open_session(config, backend=shared_backend, session_id=session_id)
            sessions[session.session_id] = session
        return {"session_id": session.session_id, "phase": session.phase, "mode": config.mode}

    @app.get("/sessions/{session_id}")
    def session_info(session_id: str) -> Any:
        session = get_session(session_id)
        if session is None:
            return _error_response(404, "unknown_session", session_id)
        return {
            "session_id": session.session_id,
            "phase": session.phase,
            "mode": session.config.mode,
            "language_hint": session.config.language_hint,
            "snippet": session.snippet,
            "geometry": session.geometry.to_dict(),
            "thresholds": session.config.thresholds.to_dict(),
            "n_samples": session.n_samples,
        }

    @app.post("/sessions/{session_id}/samples")
    def push_samples(session_id: str, body: dict = Body(...)) -> Any:
        session = get_session(session_id)
        if session is None:
            return _error_response(404, "unknown_session", session_id)
        try:
            batch = [GazeSample.from_dict(s) for s in body["samples"]]
        except (KeyError, TypeError, ValueError) as exc:
            return _error_response(422, "malformed_batch", str(exc))
        try:
            session.ingest(batch)
        except PhaseError as exc:
            return _error_response(409, "wrong_phase", str(exc))
        except StreamError as exc:
            return _error_response(422, "nonmonotonic_timestamps", str(exc))
        return {"accepted": len(batch), "phase": session.phase, "n_samples": session.n_samples}

    @app.post("/sessions/{session_id}/geometry")
    def push_geometry(session_id: str, body: dict = Body(...)) -> Any:
        session = get_session(session_id)
        if session is None:
            return _error_response(404, "unknown_session", session_id)
        try:
            geometry = EditorGeometry.from_dict(body["geometry"])
        except (KeyError, TypeError, ValueError) as exc:
            return _error_response(422, "malformed_geometry", str(exc))
        try:
            session.update_geometry(geometry)
        except PhaseError as exc:
            return _error_response(409, "wrong_phase", str(exc))
        return {"phase": session.phase}

    @app.get("/sessions/{session_id}/snapshot")
    def snapshot(session_id: str) -> Any:
        session = get_session(session_id)
        if session is None:
            return _error_response(404, "unknown_session", session_id)
        metrics, flags, lines = session.snapshot()
        return {
            "phase": session.phase,
            "n_samples": session.n_samples,
            "metrics": metrics.to_dict() if metrics else None,
            "flags": flags.to_dict() if flags else None,
            "lines": lines,
        }

    @app.post("/sessions/{session_id}/trigger")
    def trigger(session_id: str, body: dict = Body(default={})) -> Any:
        session = get_session(session_id)
        if session is None:
            return _error_response(404, "unknown_session", session_id)
        try:
            events = session.trigger(body.get("mode"))
        except PhaseError as exc:
            return _error_response(409, "wrong_phase", str(exc))
        except InsufficientData as exc:
            return _error_response(422, "insufficient_data", str(exc))
        except SessionError as exc:
            return _error_response(422, "bad_mode", str(exc))
        preview = events[-1]
        return {"phase": session.phase, **preview.payload}

    @app.post("/sessions/{session_id}/confirm")
    def confirm(session_id: str) -> Any:
        session = get_session(session_id)
        if session is None:
            return _error_response(404, "unknown_session", session_id)
        try:
            events = session.confirm()
        except PhaseError as exc:
            return _error_response(409, "wrong_phase", str(exc))
        except (BackendUnavailable, BackendRejected) as exc:
            return _error_response(502, "backend_failed", str(exc))
        return {"phase": session.phase, "result": events[-1].payload}

    @app.post("/sessions/{session_id}/close")
    def close_session(session_id: str) -> Any:
        session = get_session(session_id)
        if session is None:
            return _error_response(404, "unknown_session", session_id)
        session.close()
        return {"phase": session.phase}

    @app.get("/sessions/{session_id}/journal")
    def journal(session_id: str) -> Any:
        session = get_session(session_id)
        if session is None:
            return _error_response(404, "unknown_session", session_id)
        lines = []
        with open(session.journal_path, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    lines.append(json.loads(line))
        return {"session_id": session_id, "lines": lines}

    @app.websocket("/sessions/{session_id}/events")
    async def events_ws(websocket: WebSocket, session_id: str, from_seq: int = 0) -> None:
        await websocket.accept()
        session = get_session(session_id)
        if session is None:
            await websocket.close(code=1008, reason="unknown session")
            return
        cursor = max(0, from_seq)
        receiver = asyncio.create_task(websocket.receive_text())
        try:
            while True:
                # session.events is append-only; len() then slice is safe
                upto = len(session.events)
                while cursor < upto:
                    await websocket.send_json(_frame(session.events[cursor].to_dict()))
                    cursor += 1
                if session.phase == "closed" and cursor >= len(session.events):
                    await websocket.close(code=1000)
                    return
                waiter = asyncio.ensure_future(asyncio.sleep(_WS_POLL_S))
                done, _ = await asyncio.wait(
                    {receiver, waiter}, return_when=asyncio.FIRST_COMPLETED
                )
                if receiver in done:
                    try:
                        text = receiver.result()
                    except WebSocketDisconnect:
                        waiter.cancel()
                        return
                    try:
                        json.loads(text)
                    except json.JSONDecodeError:
                        # protocol error is connection-scoped only
                        waiter.cancel()
                        await websocket.close(code=1002, reason="malformed frame")
                        return
                    receiver = asyncio.create_task(websocket.receive_text())
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            receiver.cancel()

    return app


def bind_available(host: str, port: int) -> bool:
    """Best-effort probe that the address is free before uvicorn takes it."""
    try:
        with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
            sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            sock.bind((host, port))
        return True
    except OSError:
        return False


def serve(config: ServiceConfig, backend: Backend | None = None) -> None:
    """Run the service until interrupted."""
    import uvicorn

    app = create_app(config, backend=backend)
    uvicorn.run(app, host=config.bind_host, port=config.bind_port, log_level="warning")
