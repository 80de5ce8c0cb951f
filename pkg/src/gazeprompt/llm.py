"""Refactoring backends: an offline scripted mock and a generic HTTP
chat-completion client.

The outbound message is always the prompt text verbatim, a blank line,
then the source in a fenced code block tagged with the language hint.
The first fenced block of the reply is taken as the refactored code; a
reply without one is a soft failure that still surfaces the raw message.
"""
from __future__ import annotations

import os
import re
import time
from dataclasses import dataclass
from typing import Protocol

import httpx

NO_CODE_MARKER = "no code extracted"

_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)\n?```", re.DOTALL)


class BackendUnavailable(RuntimeError):
    """Transport-level failure after all attempts were used up."""

    def __init__(self, message: str, attempts: int):
        self.attempts = attempts
        super().__init__(f"{message} (after {attempts} attempts)")


class BackendRejected(RuntimeError):
    """The endpoint answered but refused the request (bad auth, bad
    payload). Not retried."""


@dataclass(frozen=True)
class RefactorRequest:
    prompt: str
    source_code: str
    language_hint: str = "java"
    request_id: str = ""

    def __post_init__(self) -> None:
        if not self.prompt:
            raise ValueError("prompt must be nonempty")
        if not self.source_code:
            raise ValueError("source_code must be nonempty")


@dataclass(frozen=True)
class RefactorResponse:
    request_id: str
    refactored_code: str
    backend_name: str
    latency_ms: float
    raw_model_message: str
    note: str | None = None

    def __post_init__(self) -> None:
        if self.latency_ms < 0:
            raise ValueError("latency_ms must be >= 0")

    def to_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "refactored_code": self.refactored_code,
            "backend_name": self.backend_name,
            "latency_ms": self.latency_ms,
            "raw_model_message": self.raw_model_message,
            "note": self.note,
        }


class Backend(Protocol):
    name: str

    def complete(self, message: str) -> str:
        """Send one user message, return the model reply text."""
        ...


def build_message(request: RefactorRequest) -> str:
    return f"{request.prompt}\n\n```{request.language_hint}\n{request.source_code}\n```"


def extract_code(reply: str) -> str | None:
    """First fenced code block of a reply, or None."""
    m = _FENCE_RE.search(reply)
    return m.group(1) if m else None


class MockBackend:
    """Offline backend for demos and tests.

    ``script`` maps marker substrings to canned replacement code; the
    longest marker contained in the incoming message wins, so an entry
    keyed on a whole prompt beats entries keyed on single fragments.
    Unmatched messages echo the incoming code block back. Every message
    received is kept in ``requests`` for traffic assertions.
    """

    name = "mock"

    def __init__(self, script: dict[str, str] | None = None):
        self.script = dict(script or {})
        self.requests: list[str] = []

    def complete(self, message: str) -> str:
        self.requests.append(message)
        best: str | None = None
        for marker in self.script:
            if marker in message and (best is None or len(marker) > len(best)):
                best = marker
        if best is not None:
            return f"```\n{self.script[best]}\n```"
        code = extract_code(message)
        if code is None:
            return "```\n\n```"
        return f"```\n{code}\n```"


class HttpChatBackend:
    """Minimal chat-completion client (OpenAI-style wire format).

    The bearer token is read from ``token_env`` at call time. Transport
    errors are retried up to ``retries`` extra attempts; HTTP error
    statuses are not retried.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        token_env: str = "GAZE_PROMPT_TOKEN",
        timeout_s: float = 30.0,
        retries: int = 2,
        transport: httpx.BaseTransport | None = None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.token_env = token_env
        self.timeout_s = timeout_s
        self.retries = retries
        self.name = f"http:{model}"
        self._transport = transport

    def complete(self, message: str) -> str:
        headers = {}
        token = os.environ.get(self.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": message}],
        }
        attempts = 0
        last_exc: Exception | None = None
        with httpx.Client(timeout=self.timeout_s, transport=self._transport) as client:
            while attempts <= self.retries:
                attempts += 1
                try:
                    resp = client.post(self.endpoint, json=body, headers=headers)
                except httpx.TransportError as exc:
                    last_exc = exc
                    continue
                if resp.status_code != 200:
                    raise BackendRejected(
                        f"endpoint returned {resp.status_code}: {resp.text[:200]}"
                    )
                try:
                    return resp.json()["choices"][0]["message"]["content"]
                except (KeyError, IndexError, TypeError, ValueError) as exc:
                    raise BackendRejected(f"malformed completion payload: {exc}") from exc
        raise BackendUnavailable(f"{self.endpoint} unreachable: {last_exc}", attempts)


def refactor(request: RefactorRequest, backend: Backend) -> RefactorResponse:
    """Run one refactoring round trip against a backend."""
    message = build_message(request)
    t0 = time.perf_counter()
    reply = backend.complete(message)
    latency_ms = (time.perf_counter() - t0) * 1000.0
    code = extract_code(reply)
    if code is None:
        return RefactorResponse(
            request_id=request.request_id,
            refactored_code="",
            backend_name=backend.name,
            latency_ms=latency_ms,
            raw_model_message=reply,
            note=NO_CODE_MARKER,
        )
    return RefactorResponse(
        request_id=request.request_id,
        refactored_code=code,
        backend_name=backend.name,
        latency_ms=latency_ms,
        raw_model_message=reply,
        note=None,
    )
