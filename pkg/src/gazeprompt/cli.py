"""Command line front end.

Subcommands: synth (generate traces), analyze (metrics table), prompt
(flags plus prompt text), replay (stream a recording into a running
service), serve (run the service).

Exit codes: 0 success, 1 data or connection errors, 2 usage errors.
With ``--json``, stdout carries exactly one JSON object and nothing else.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx

from . import __version__
from .config import CONFIG_ENV_VAR, ConfigError, resolve_config, with_bind
from .gazeio import (
    GazeRecording,
    RecordingFormatError,
    expert_profile,
    novice_profile,
    read_recording,
    synth_trace_with_plan,
    write_recording,
)
from .metrics import InsufficientData, metrics_snapshot
from .prompts import prompt_for_session
from .service import bind_available, serve


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gazeprompt",
        description="Gaze-driven prompt synthesis for code refactoring.",
    )
    parser.add_argument("--version", action="version", version=f"gazeprompt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic gaze trace")
    p.add_argument("--profile", choices=("novice", "expert"), default="novice")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--duration-ms", type=float, default=30000.0)
    p.add_argument("--rate", type=float, default=60.0, help="sample rate in Hz")
    p.add_argument("--out", required=True, help="output file (.jsonl or .csv)")
    p.add_argument("--format", choices=("jsonl", "csv"), default=None)
    p.add_argument("--config", default=None, help="service config supplying the editor geometry")
    p.add_argument("--json", action="store_true", dest="as_json")

    p = sub.add_parser("analyze", help="compute session metrics for a recording")
    p.add_argument("recording")
    p.add_argument("--format", choices=("jsonl", "csv"), default=None)
    p.add_argument("--config", default=None, help=f"config file (or ${CONFIG_ENV_VAR})")
    p.add_argument("--json", action="store_true", dest="as_json")

    p = sub.add_parser("prompt", help="evaluate thresholds and print the prompt")
    p.add_argument("recording")
    p.add_argument("--format", choices=("jsonl", "csv"), default=None)
    p.add_argument("--mode", choices=("realtime", "preset"), default="realtime")
    p.add_argument("--config", default=None, help=f"config file (or ${CONFIG_ENV_VAR})")
    p.add_argument("--json", action="store_true", dest="as_json")

    p = sub.add_parser("replay", help="stream a recording into a running service")
    p.add_argument("recording")
    p.add_argument("--format", choices=("jsonl", "csv"), default=None)
    p.add_argument("--target", required=True, help="service address, host:port")
    p.add_argument("--speed", type=float, default=1.0, help="0 streams unthrottled")
    p.add_argument("--batch-size", type=int, default=12)
    p.add_argument("--session-id", default=None)

    p = sub.add_parser("serve", help="run the session service")
    p.add_argument("--bind", default=None, help="host:port (overrides config)")
    p.add_argument("--config", default=None, help=f"config file (or ${CONFIG_ENV_VAR})")

    return parser


def _cmd_synth(args: argparse.Namespace) -> int:
    cfg = resolve_config(args.config)
    profile = (novice_profile if args.profile == "novice" else expert_profile)(args.seed)
    recording, plan = synth_trace_with_plan(
        profile, cfg.geometry, args.duration_ms, sample_rate_hz=args.rate
    )
    write_recording(recording, args.out, fmt=args.format)
    if args.as_json:
        print(
            json.dumps(
                {
                    "path": args.out,
                    "session_id": recording.session_id,
                    "samples": len(recording),
                    "dwells": len(plan),
                }
            )
        )
    else:
        print(f"wrote {len(recording)} samples ({len(plan)} dwells) to {args.out}")
    return 0


def _fmt_opt(value: float | None, digits: int = 3) -> str:
    return "-" if value is None else f"{value:.{digits}f}"


def _cmd_analyze(args: argparse.Namespace) -> int:
    cfg = resolve_config(args.config)
    recording = read_recording(args.recording, fmt=args.format)
    metrics = metrics_snapshot(recording, cfg.fixation)
    flags, _ = prompt_for_session(metrics, cfg.thresholds, "realtime")
    if args.as_json:
        print(json.dumps({"metrics": metrics.to_dict(), "flags": flags.to_dict()}))
        return 0
    rows = [
        ("mean fixation duration (ms)", _fmt_opt(metrics.mean_fixation_duration_ms)),
        ("fixation count per second", _fmt_opt(metrics.fixation_count_per_s)),
        ("mean saccade length (px)", _fmt_opt(metrics.mean_saccade_length_px)),
        ("mean pupil dilation (mm)", _fmt_opt(metrics.mean_pupil_dilation_mm, 4)),
        ("fixations", str(metrics.n_fixations)),
        ("pupil samples", str(metrics.n_pupil_samples)),
        ("baseline pupil (mm)", _fmt_opt(metrics.baseline_pupil_mm, 4)),
        ("session length (ms)", f"{metrics.total_time_ms:.1f}"),
    ]
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        print(f"{name:<{width}}  {value}")
    print()
    for name, on in flags.to_dict().items():
        print(f"{name:<{width}}  {'on' if on else 'off'}")
    return 0


def _cmd_prompt(args: argparse.Namespace) -> int:
    cfg = resolve_config(args.config)
    recording = read_recording(args.recording, fmt=args.format)
    metrics = metrics_snapshot(recording, cfg.fixation)
    flags, prompt = prompt_for_session(metrics, cfg.thresholds, args.mode)
    if args.as_json:
        print(
            json.dumps(
                {"flags": flags.to_dict(), "prompt": prompt.text, "mode": prompt.mode}
            )
        )
        return 0
    flag_text = " ".join(f"{k}={'on' if v else 'off'}" for k, v in flags.to_dict().items())
    print(f"flags: {flag_text}")
    print(prompt.text)
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    recording = read_recording(args.recording, fmt=args.format)
    if args.batch_size < 1:
        print("batch size must be >= 1", file=sys.stderr)
        return 2
    base = f"http://{args.target}"
    with httpx.Client(base_url=base, timeout=10.0) as client:
        client.get("/health").raise_for_status()
        body = {"session_id": args.session_id} if args.session_id else {}
        resp = client.post("/sessions", json=body)
        resp.raise_for_status()
        session_id = resp.json()["session_id"]

        samples = recording.samples
        sent = 0
        import time as _time

        start = _time.perf_counter()
        first_ts = samples[0].timestamp_us if samples else 0
        for i in range(0, len(samples), args.batch_size):
            batch = samples[i : i + args.batch_size]
            if args.speed > 0:
                target = start + (batch[0].timestamp_us - first_ts) / 1e6 / args.speed
                delay = target - _time.perf_counter()
                if delay > 0:
                    _time.sleep(delay)
            resp = client.post(
                f"/sessions/{session_id}/samples",
                json={"samples": [s.to_dict() for s in batch]},
            )
            resp.raise_for_status()
            sent += len(batch)
        phase = client.get(f"/sessions/{session_id}").json()["phase"]
    print(json.dumps({"session_id": session_id, "sent": sent, "phase": phase}))
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    cfg = with_bind(resolve_config(args.config), args.bind)
    if not bind_available(cfg.bind_host, cfg.bind_port):
        print(f"cannot bind {cfg.bind_host}:{cfg.bind_port}: address in use", file=sys.stderr)
        return 1
    serve(cfg)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "synth": _cmd_synth,
        "analyze": _cmd_analyze,
        "prompt": _cmd_prompt,
        "replay": _cmd_replay,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (RecordingFormatError, ConfigError, InsufficientData) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except httpx.HTTPError as exc:
        print(f"service error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
