"""Service configuration: one JSON file carries the bind address, session
defaults (thresholds, fixation detection, snapshot cadence), editor
geometry, snippet under review, and backend selection.

Relative paths inside a config file resolve against the file's own
directory, so a config can travel with its snippet.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .codemap import EditorGeometry
from .fixations import FixationConfig
from .prompts import ThresholdConfig

CONFIG_ENV_VAR = "GAZE_PROMPT_CONFIG"

DEFAULT_GEOMETRY = EditorGeometry(
    file_path="snippet",
    origin_x_px=100.0,
    origin_y_px=60.0,
    char_width_px=9.0,
    line_height_px=18.0,
    first_visible_line=1,
    visible_line_count=45,
    screen_width_px=1920,
    screen_height_px=1080,
)


class ConfigError(ValueError):
    """Raised when a configuration file cannot be loaded or validated."""


@dataclass(frozen=True)
class BackendSettings:
    kind: str = "mock"  # mock | http
    script: dict[str, str] = field(default_factory=dict)
    endpoint: str = ""
    model: str = ""
    token_env: str = "GAZE_PROMPT_TOKEN"
    timeout_s: float = 30.0
    retries: int = 2

    def __post_init__(self) -> None:
        if self.kind not in ("mock", "http"):
            raise ConfigError(f"backend.kind must be mock or http, got {self.kind!r}")
        if self.kind == "http" and not self.endpoint:
            raise ConfigError("backend.kind http requires backend.endpoint")
        if self.retries < 0:
            raise ConfigError("backend.retries must be >= 0")


@dataclass(frozen=True)
class ServiceConfig:
    bind_host: str = "127.0.0.1"
    bind_port: int = 8930
    mode: str = "realtime"  # realtime | preset
    snippet_path: str | None = None
    language_hint: str = "java"
    snapshot_period_ms: float = 500.0
    log_dir: str = "sessions"
    thresholds: ThresholdConfig = field(default_factory=ThresholdConfig)
    fixation: FixationConfig = field(default_factory=FixationConfig)
    geometry: EditorGeometry = DEFAULT_GEOMETRY
    backend: BackendSettings = field(default_factory=BackendSettings)

    def __post_init__(self) -> None:
        if self.mode not in ("realtime", "preset"):
            raise ConfigError(f"mode must be realtime or preset, got {self.mode!r}")
        if self.snapshot_period_ms <= 0:
            raise ConfigError("snapshot_period_ms must be positive")

    def read_snippet(self) -> str:
        if not self.snippet_path:
            return "// no snippet configured\n"
        return Path(self.snippet_path).read_text(encoding="utf-8")


def _resolve_path(base: Path, value: str) -> str:
    p = Path(value)
    return str(p if p.is_absolute() else base / p)


def load_config(path: str | Path) -> ServiceConfig:
    """Load and validate a JSON service configuration file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    base = path.parent
    try:
        bind = raw.get("bind", "127.0.0.1:8930")
        host, _, port_s = bind.rpartition(":")
        cfg = ServiceConfig(
            bind_host=host or "127.0.0.1",
            bind_port=int(port_s),
            mode=raw.get("mode", "realtime"),
            snippet_path=(
                _resolve_path(base, raw["snippet_path"]) if raw.get("snippet_path") else None
            ),
            language_hint=raw.get("language_hint", "java"),
            snapshot_period_ms=float(raw.get("snapshot_period_ms", 500.0)),
            log_dir=_resolve_path(base, raw.get("log_dir", "sessions")),
            thresholds=ThresholdConfig.from_dict(raw.get("thresholds", {})),
            fixation=FixationConfig.from_dict(raw.get("fixation", {})),
            geometry=(
                EditorGeometry.from_dict(raw["geometry"])
                if raw.get("geometry")
                else DEFAULT_GEOMETRY
            ),
            backend=BackendSettings(
                kind=raw.get("backend", {}).get("kind", "mock"),
                script=dict(raw.get("backend", {}).get("script", {})),
                endpoint=raw.get("backend", {}).get("endpoint", ""),
                model=raw.get("backend", {}).get("model", ""),
                token_env=raw.get("backend", {}).get("token_env", "GAZE_PROMPT_TOKEN"),
                timeout_s=float(raw.get("backend", {}).get("timeout_s", 30.0)),
                retries=int(raw.get("backend", {}).get("retries", 2)),
            ),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"config {path} invalid: {exc}") from exc
    return cfg


def resolve_config(explicit_path: str | None) -> ServiceConfig:
    """Config from an explicit path, the environment, or defaults."""
    path = explicit_path or os.environ.get(CONFIG_ENV_VAR)
    if path:
        return load_config(path)
    return ServiceConfig()


def with_bind(cfg: ServiceConfig, bind: str | None) -> ServiceConfig:
    if not bind:
        return cfg
    host, _, port_s = bind.rpartition(":")
    try:
        return replace(cfg, bind_host=host or "127.0.0.1", bind_port=int(port_s))
    except ValueError as exc:
        raise ConfigError(f"bad bind address {bind!r}: {exc}") from exc
