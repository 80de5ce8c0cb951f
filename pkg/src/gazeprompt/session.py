"""Refactoring session state: sample ingestion, trigger, confirm, and a
JSONL journal that can replay the whole session.

Phases move strictly forward: reading -> prompt_ready -> refactoring ->
refactored, with closed reachable from anywhere. The one sanctioned
exception is a failed backend call, which drops refactoring back to
prompt_ready so the developer can retry.

All state mutation goes through one lock per session; events get their
sequence numbers under that lock, so consumers can rely on a gapless,
monotonic sequence.
"""
from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .codemap import EditorGeometry, line_summaries
from .config import ServiceConfig
from .fixations import FixationTracker, detect_fixations
from .gazeio import GazeRecording, GazeSample
from .llm import (
    Backend,
    BackendRejected,
    BackendUnavailable,
    MockBackend,
    RefactorRequest,
    refactor,
)
from .metrics import (
    BaselineUnavailable,
    GazeMetrics,
    InsufficientData,
    compute_metrics,
    pupil_baseline,
)
from .prompts import PromptText, TriggerFlags, prompt_for_session

PHASES = ("reading", "prompt_ready", "refactoring", "refactored", "closed")

EVENT_SAMPLE_BATCH = "sample_batch"
EVENT_METRICS_UPDATE = "metrics_update"
EVENT_GEOMETRY_UPDATE = "geometry_update"
EVENT_TRIGGER_PROMPT = "trigger_prompt"
EVENT_PROMPT_PREVIEW = "prompt_preview"
EVENT_REFACTOR_RESULT = "refactor_result"
EVENT_ERROR = "error"


class SessionError(RuntimeError):
    code = "session_error"


class PhaseError(SessionError):
    code = "wrong_phase"


class StreamError(SessionError):
    code = "nonmonotonic_timestamps"


@dataclass(frozen=True)
class SessionEvent:
    """One entry on a session's event stream."""

    session_id: str
    seq: int
    type: str
    phase: str
    payload: dict

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "seq": self.seq,
            "type": self.type,
            "phase": self.phase,
            "payload": self.payload,
        }


class Session:
    """One developer reading one snippet. Not meant to be constructed
    directly; use :func:`open_session`."""

    def __init__(
        self,
        session_id: str,
        config: ServiceConfig,
        backend: Backend,
        journal_path: Path,
    ):
        self.session_id = session_id
        self.config = config
        self.backend = backend
        self.journal_path = journal_path
        self.phase = "reading"
        self.geometry = config.geometry
        self.snippet = config.read_snippet()
        self.events: list[SessionEvent] = []
        self._samples: list[GazeSample] = []
        # screen dims are pinned at open; later geometry updates only move
        # the viewport, they cannot reinterpret already-ingested samples
        self._screen_w = config.geometry.screen_width_px
        self._screen_h = config.geometry.screen_height_px
        self._tracker = FixationTracker(self._screen_w, self._screen_h, config.fixation)
        self._seq = 0
        self._last_metrics_emit_us: int | None = None
        self._latest_prompt: PromptText | None = None
        self._latest_flags: TriggerFlags | None = None
        self._lock = threading.RLock()
        self._journal_fh = journal_path.open("a", encoding="utf-8")

    # ------------------------------------------------------------ internals

    def _journal(self, obj: dict) -> None:
        self._journal_fh.write(json.dumps(obj) + "\n")
        self._journal_fh.flush()

    def _emit(self, type_: str, payload: dict) -> SessionEvent:
        event = SessionEvent(
            session_id=self.session_id,
            seq=self._seq,
            type=type_,
            phase=self.phase,
            payload=payload,
        )
        self._seq += 1
        self.events.append(event)
        self._journal({"kind": "event", **event.to_dict()})
        return event

    def _error(self, code: str, detail: str) -> SessionEvent:
        return self._emit(EVENT_ERROR, {"code": code, "detail": detail})

    def _recording(self) -> GazeRecording:
        return GazeRecording(
            session_id=self.session_id,
            samples=tuple(self._samples),
            screen_width_px=self._screen_w,
            screen_height_px=self._screen_h,
        )

    def _snapshot(self) -> tuple[GazeMetrics, TriggerFlags, list[dict]]:
        recording = self._recording()
        fixations = self._tracker.fixations()
        try:
            baseline = pupil_baseline(recording)
        except BaselineUnavailable:
            baseline = None
        metrics = compute_metrics(recording, fixations, baseline)
        flags, _ = prompt_for_session(metrics, self.config.thresholds, "realtime")
        lines = [s.to_dict() for s in line_summaries(fixations, self.geometry)]
        return metrics, flags, lines

    def _require_phase(self, expected: str, op: str) -> None:
        if self.phase != expected:
            # a closed journal is sealed (footer already written), so the
            # refusal is only raised, not journaled
            if self.phase != "closed":
                self._error(
                    "wrong_phase", f"{op} requires phase {expected}, session is {self.phase}"
                )
            raise PhaseError(f"{op} requires phase {expected!r}, session is {self.phase!r}")

    # ------------------------------------------------------------ operations

    @property
    def n_samples(self) -> int:
        return len(self._samples)

    def ingest(self, batch: Sequence[GazeSample]) -> list[SessionEvent]:
        """Append a sample batch. Timestamps must continue the stream;
        a batch that rewinds time is rejected whole."""
        with self._lock:
            self._require_phase("reading", "ingest")
            if not batch:
                self._error("empty_batch", "sample batch is empty")
                raise StreamError("sample batch is empty")
            prev = self._samples[-1].timestamp_us if self._samples else -1
            for s in batch:
                if s.timestamp_us < prev:
                    self._error(
                        "nonmonotonic_timestamps",
                        f"timestamp {s.timestamp_us} after {prev}",
                    )
                    raise StreamError(f"timestamp {s.timestamp_us} rewinds past {prev}")
                prev = s.timestamp_us
            first_new = len(self.events)
            self._samples.extend(batch)
            self._tracker.push_many(batch)
            self._emit(
                EVENT_SAMPLE_BATCH,
                {
                    "count": len(batch),
                    "first_us": batch[0].timestamp_us,
                    "last_us": batch[-1].timestamp_us,
                    "samples": [s.to_dict() for s in batch],
                },
            )
            self._maybe_emit_metrics()
            return self.events[first_new:]

    def _maybe_emit_metrics(self) -> None:
        # gated on stream time, not wall time, so replays are reproducible
        if len(self._samples) < 2:
            return
        latest = self._samples[-1].timestamp_us
        period_us = self.config.snapshot_period_ms * 1000.0
        if (
            self._last_metrics_emit_us is not None
            and latest - self._last_metrics_emit_us < period_us
        ):
            return
        metrics, flags, lines = self._snapshot()
        self._last_metrics_emit_us = latest
        self._emit(
            EVENT_METRICS_UPDATE,
            {"metrics": metrics.to_dict(), "flags": flags.to_dict(), "lines": lines},
        )

    def update_geometry(self, geometry: EditorGeometry) -> SessionEvent:
        """Swap the editor geometry (scroll, resize) during reading."""
        with self._lock:
            self._require_phase("reading", "update_geometry")
            self.geometry = geometry
            return self._emit(EVENT_GEOMETRY_UPDATE, {"geometry": geometry.to_dict()})

    def snapshot(self) -> tuple[GazeMetrics | None, TriggerFlags | None, list[dict]]:
        """Current metrics view; None until two samples have arrived."""
        with self._lock:
            if len(self._samples) < 2:
                return None, None, []
            return self._snapshot()

    def trigger(self, mode_override: str | None = None) -> list[SessionEvent]:
        """Freeze the metrics, synthesize the prompt, enter prompt_ready."""
        with self._lock:
            self._require_phase("reading", "trigger")
            if len(self._samples) < 2:
                self._error("insufficient_data", f"{len(self._samples)} samples")
                raise InsufficientData(
                    f"cannot trigger with {len(self._samples)} samples, need at least 2"
                )
            mode = mode_override or self.config.mode
            if mode not in ("realtime", "preset"):
                self._error("bad_mode", f"unknown mode {mode!r}")
                raise SessionError(f"unknown prompt mode {mode!r}")
            first_new = len(self.events)
            recording = self._recording()
            fixations = self._tracker.fixations()
            try:
                baseline = pupil_baseline(recording)
            except BaselineUnavailable:
                baseline = None
            metrics = compute_metrics(recording, fixations, baseline)
            flags, prompt = prompt_for_session(metrics, self.config.thresholds, mode)
            lines = [s.to_dict() for s in line_summaries(fixations, self.geometry)]
            self._emit(EVENT_TRIGGER_PROMPT, {"mode": mode})
            self.phase = "prompt_ready"
            self._latest_prompt = prompt
            self._latest_flags = flags
            self._emit(
                EVENT_PROMPT_PREVIEW,
                {
                    "prompt": prompt.text,
                    "prompt_mode": prompt.mode,
                    "flags": flags.to_dict(),
                    "metrics": metrics.to_dict(),
                    "lines": lines,
                },
            )
            return self.events[first_new:]

    def confirm(self) -> list[SessionEvent]:
        """Send the previewed prompt to the backend."""
        with self._lock:
            self._require_phase("prompt_ready", "confirm")
            assert self._latest_prompt is not None
            self.phase = "refactoring"
            request = RefactorRequest(
                prompt=self._latest_prompt.text,
                source_code=self.snippet,
                language_hint=self.config.language_hint,
                request_id=f"{self.session_id}:{self._seq}",
            )
            first_new = len(self.events)
            try:
                response = refactor(request, self.backend)
            except (BackendUnavailable, BackendRejected) as exc:
                self.phase = "prompt_ready"  # sanctioned retry path
                self._error("backend_failed", str(exc))
                raise
            self.phase = "refactored"
            self._emit(
                EVENT_REFACTOR_RESULT,
                {
                    "request_id": response.request_id,
                    "refactored_code": response.refactored_code,
                    "backend_name": response.backend_name,
                    "latency_ms": response.latency_ms,
                    "note": response.note,
                },
            )
            return self.events[first_new:]

    def close(self) -> None:
        """Terminal. Safe to call more than once."""
        with self._lock:
            if self.phase == "closed":
                return
            self.phase = "closed"
            self._journal({"kind": "closed"})
            self._journal_fh.close()

    @property
    def latest_prompt(self) -> PromptText | None:
        return self._latest_prompt


def open_session(
    config: ServiceConfig,
    backend: Backend | None = None,
    session_id: str | None = None,
    log_dir: str | Path | None = None,
) -> Session:
    """Create a session and its journal file."""
    session_id = session_id or uuid.uuid4().hex[:12]
    backend = backend or MockBackend(config.backend.script)
    directory = Path(log_dir or config.log_dir)
    directory.mkdir(parents=True, exist_ok=True)
    journal_path = directory / f"{session_id}.jsonl"
    session = Session(session_id, config, backend, journal_path)
    session._journal(
        {
            "kind": "header",
            "journal_version": 1,
            "session_id": session_id,
            "created_wall": time.time(),
            "mode": config.mode,
            "language_hint": config.language_hint,
            "snippet_path": config.snippet_path,
            "snapshot_period_ms": config.snapshot_period_ms,
            "thresholds": config.thresholds.to_dict(),
            "fixation": config.fixation.to_dict(),
            "geometry": config.geometry.to_dict(),
        }
    )
    return session


# -------------------------------------------------------------- journals


@dataclass
class JournalReplay:
    """Parsed journal plus enough context to recompute the session."""

    session_id: str
    mode: str
    header: dict
    events: list[dict] = field(default_factory=list)
    samples: list[GazeSample] = field(default_factory=list)
    samples_at_trigger: list[GazeSample] = field(default_factory=list)
    trigger_mode: str | None = None
    journaled_prompt: str | None = None
    journaled_flags: dict | None = None

    def recompute_prompt(self) -> tuple[TriggerFlags, PromptText]:
        """Recompute flags and prompt from the raw samples alone."""
        from .fixations import FixationConfig
        from .prompts import ThresholdConfig

        geometry = EditorGeometry.from_dict(self.header["geometry"])
        recording = GazeRecording(
            session_id=self.session_id,
            samples=tuple(self.samples_at_trigger or self.samples),
            screen_width_px=geometry.screen_width_px,
            screen_height_px=geometry.screen_height_px,
        )
        fixation_cfg = FixationConfig.from_dict(self.header["fixation"])
        thresholds = ThresholdConfig.from_dict(self.header["thresholds"])
        fixations = detect_fixations(recording, fixation_cfg)
        try:
            baseline = pupil_baseline(recording)
        except BaselineUnavailable:
            baseline = None
        metrics = compute_metrics(recording, fixations, baseline)
        return prompt_for_session(metrics, thresholds, self.trigger_mode or self.mode)


def replay_journal(path: str | Path) -> JournalReplay:
    """Parse a session journal back into samples and events."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError(f"journal {path} is empty")
    header = json.loads(lines[0])
    if header.get("kind") != "header":
        raise ValueError(f"journal {path} does not start with a header line")
    out = JournalReplay(
        session_id=header["session_id"], mode=header.get("mode", "realtime"), header=header
    )
    for line in lines[1:]:
        obj = json.loads(line)
        if obj.get("kind") != "event":
            continue
        out.events.append(obj)
        if obj["type"] == EVENT_SAMPLE_BATCH:
            out.samples.extend(
                GazeSample.from_dict(s) for s in obj["payload"]["samples"]
            )
        elif obj["type"] == EVENT_TRIGGER_PROMPT:
            out.trigger_mode = obj["payload"].get("mode")
            out.samples_at_trigger = list(out.samples)
        elif obj["type"] == EVENT_PROMPT_PREVIEW:
            out.journaled_prompt = obj["payload"]["prompt"]
            out.journaled_flags = obj["payload"]["flags"]
    return out


# wall-clock and per-run identity fields, plus the raw sample arrays
# (batch shape stays via count/first_us/last_us; full samples live in the
# journal itself)
_TRANSCRIPT_DROP_KEYS = {"latency_ms", "request_id", "samples"}


def _project_event(seq: int, type_: str, phase: str, payload: dict) -> dict:
    kept = {k: v for k, v in payload.items() if k not in _TRANSCRIPT_DROP_KEYS}
    return {"seq": seq, "type": type_, "phase": phase, "payload": kept}


def journal_transcript(path: str | Path) -> list[dict]:
    """Deterministic projection of a journal: event order, types, phases,
    and content, with wall-clock and identity fields stripped. Two runs
    over the same input must produce identical transcripts."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        obj = json.loads(line)
        if obj.get("kind") != "event":
            continue
        out.append(_project_event(obj["seq"], obj["type"], obj["phase"], obj["payload"]))
    return out


def transcript_of_events(events: Iterable[SessionEvent]) -> list[dict]:
    """Same projection as :func:`journal_transcript`, from live events."""
    return [_project_event(e.seq, e.type, e.phase, e.payload) for e in events]
