"""Gaze recording model, on-disk formats, replay, and synthetic traces.

A recording is a header (session id, screen geometry, nominal sample rate)
plus a time-ordered list of binocular samples. Two formats are supported:

* jsonl: one JSON object per line, header first, then samples.
* csv: ``# key=value`` preamble carrying the header, then a fixed column
  order ``timestamp_us,gaze_x,gaze_y,pupil_left_mm,pupil_right_mm,
  valid_left,valid_right``. Empty pupil fields mean "not measured".

Both formats round-trip losslessly.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, replace
from pathlib import Path
from random import Random
from typing import TYPE_CHECKING, Callable, Literal

if TYPE_CHECKING:  # only needed for annotations, avoids an import cycle
    from .codemap import EditorGeometry

CSV_COLUMNS = (
    "timestamp_us",
    "gaze_x",
    "gaze_y",
    "pupil_left_mm",
    "pupil_right_mm",
    "valid_left",
    "valid_right",
)

ProfileKind = Literal["novice", "expert"]


class RecordingFormatError(ValueError):
    """Raised when a recording file cannot be parsed.

    ``line_no`` is 1-based and points at the offending line.
    """

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class ReplayAborted(RuntimeError):
    """Raised when a replay sink rejects a sample mid-stream."""

    def __init__(self, index: int, cause: BaseException):
        self.index = index
        self.cause = cause
        super().__init__(f"sink rejected sample {index}: {cause}")


@dataclass(frozen=True)
class GazeSample:
    """One binocular sample.

    Coordinates are normalized to [0, 1] in screen space. A side with
    ``valid_* = False`` carries no usable pupil measurement; a sample with
    both sides invalid (a blink, or tracking loss) contributes to no
    downstream metric.
    """

    timestamp_us: int
    gaze_x: float
    gaze_y: float
    pupil_left_mm: float | None = None
    pupil_right_mm: float | None = None
    valid_left: bool = True
    valid_right: bool = True

    def __post_init__(self) -> None:
        if self.timestamp_us < 0:
            raise ValueError(f"timestamp_us must be >= 0, got {self.timestamp_us}")
        if not (0.0 <= self.gaze_x <= 1.0 and 0.0 <= self.gaze_y <= 1.0):
            raise ValueError(
                f"gaze coordinates must lie in [0, 1], got ({self.gaze_x}, {self.gaze_y})"
            )
        if self.valid_left and not (self.pupil_left_mm and self.pupil_left_mm > 0):
            raise ValueError("valid_left requires a positive pupil_left_mm")
        if self.valid_right and not (self.pupil_right_mm and self.pupil_right_mm > 0):
            raise ValueError("valid_right requires a positive pupil_right_mm")

    @property
    def usable(self) -> bool:
        """True when at least one eye was tracked."""
        return self.valid_left or self.valid_right

    def pupil_mm(self) -> float | None:
        """Per-sample pupil diameter: mean over the valid eyes, or None."""
        vals = []
        if self.valid_left:
            vals.append(self.pupil_left_mm)
        if self.valid_right:
            vals.append(self.pupil_right_mm)
        if not vals:
            return None
        return sum(vals) / len(vals)

    def to_dict(self) -> dict:
        return {
            "timestamp_us": self.timestamp_us,
            "gaze_x": self.gaze_x,
            "gaze_y": self.gaze_y,
            "pupil_left_mm": self.pupil_left_mm,
            "pupil_right_mm": self.pupil_right_mm,
            "valid_left": self.valid_left,
            "valid_right": self.valid_right,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "GazeSample":
        return cls(
            timestamp_us=int(obj["timestamp_us"]),
            gaze_x=float(obj["gaze_x"]),
            gaze_y=float(obj["gaze_y"]),
            pupil_left_mm=None if obj.get("pupil_left_mm") is None else float(obj["pupil_left_mm"]),
            pupil_right_mm=None
            if obj.get("pupil_right_mm") is None
            else float(obj["pupil_right_mm"]),
            valid_left=bool(obj["valid_left"]),
            valid_right=bool(obj["valid_right"]),
        )


@dataclass(frozen=True)
class GazeRecording:
    """A full capture session: header plus time-ordered samples."""

    session_id: str
    samples: tuple[GazeSample, ...] = ()
    screen_width_px: int = 1920
    screen_height_px: int = 1080
    sample_rate_hz: float = 60.0

    def __post_init__(self) -> None:
        if not self.session_id:
            raise ValueError("session_id must be nonempty")
        if "\n" in self.session_id or "\r" in self.session_id:
            raise ValueError("session_id must not contain line breaks")
        if self.screen_width_px <= 0 or self.screen_height_px <= 0:
            raise ValueError("screen dimensions must be positive")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", tuple(self.samples))
        prev = -1
        for i, s in enumerate(self.samples):
            if s.timestamp_us < prev:
                raise ValueError(
                    f"sample {i}: timestamps must be nondecreasing "
                    f"({s.timestamp_us} after {prev})"
                )
            prev = s.timestamp_us

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_us(self) -> int:
        if len(self.samples) < 2:
            return 0
        return self.samples[-1].timestamp_us - self.samples[0].timestamp_us

    def header_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "screen_width_px": self.screen_width_px,
            "screen_height_px": self.screen_height_px,
            "sample_rate_hz": self.sample_rate_hz,
        }

    def prefix(self, upto_us: int) -> "GazeRecording":
        """Recording restricted to samples with timestamp_us <= upto_us."""
        kept = tuple(s for s in self.samples if s.timestamp_us <= upto_us)
        return replace(self, samples=kept)


# ---------------------------------------------------------------- formats


def write_recording(recording: GazeRecording, path: str | Path, fmt: str | None = None) -> None:
    """Write a recording to ``path`` as jsonl or csv.

    When ``fmt`` is None the extension decides (.csv means csv, anything
    else jsonl).
    """
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "jsonl")
    if fmt == "jsonl":
        _write_jsonl(recording, path)
    elif fmt == "csv":
        _write_csv(recording, path)
    else:
        raise ValueError(f"unknown recording format: {fmt!r}")


def read_recording(path: str | Path, fmt: str | None = None) -> GazeRecording:
    """Read a recording written by :func:`write_recording`."""
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "jsonl")
    if fmt == "jsonl":
        return _read_jsonl(path)
    if fmt == "csv":
        return _read_csv(path)
    raise ValueError(f"unknown recording format: {fmt!r}")


def _write_jsonl(recording: GazeRecording, path: Path) -> None:
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(recording.header_dict()) + "\n")
        for s in recording.samples:
            fh.write(json.dumps(s.to_dict()) + "\n")


def _read_jsonl(path: Path) -> GazeRecording:
    with path.open("r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise RecordingFormatError("empty file, expected a header line", line_no=1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise RecordingFormatError(f"bad header: {exc}", line_no=1) from exc
    for key in ("session_id", "screen_width_px", "screen_height_px", "sample_rate_hz"):
        if key not in header:
            raise RecordingFormatError(f"header missing {key!r}", line_no=1)
    samples = []
    prev_ts = -1
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            sample = GazeSample.from_dict(json.loads(line))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise RecordingFormatError(f"bad sample: {exc}", line_no=i) from exc
        if sample.timestamp_us < prev_ts:
            raise RecordingFormatError(
                f"timestamps must be nondecreasing ({sample.timestamp_us} after {prev_ts})",
                line_no=i,
            )
        prev_ts = sample.timestamp_us
        samples.append(sample)
    return GazeRecording(
        session_id=str(header["session_id"]),
        samples=tuple(samples),
        screen_width_px=int(header["screen_width_px"]),
        screen_height_px=int(header["screen_height_px"]),
        sample_rate_hz=float(header["sample_rate_hz"]),
    )


def _fmt_float(v: float | None) -> str:
    return "" if v is None else repr(v)


def _write_csv(recording: GazeRecording, path: Path) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# session_id={recording.session_id}\n")
        fh.write(f"# screen_width_px={recording.screen_width_px}\n")
        fh.write(f"# screen_height_px={recording.screen_height_px}\n")
        fh.write(f"# sample_rate_hz={recording.sample_rate_hz!r}\n")
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for s in recording.samples:
            fh.write(
                f"{s.timestamp_us},{s.gaze_x!r},{s.gaze_y!r},"
                f"{_fmt_float(s.pupil_left_mm)},{_fmt_float(s.pupil_right_mm)},"
                f"{'true' if s.valid_left else 'false'},"
                f"{'true' if s.valid_right else 'false'}\n"
            )


def _parse_bool(text: str, line_no: int) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise RecordingFormatError(f"expected true/false, got {text!r}", line_no=line_no)


def _read_csv(path: Path) -> GazeRecording:
    with path.open("r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header: dict[str, str] = {}
    idx = 0
    for idx, line in enumerate(lines):
        if not line.startswith("#"):
            break
        # "# key=value"; the value is taken verbatim so ids round-trip
        body = line[1:]
        if body.startswith(" "):
            body = body[1:]
        key, _, value = body.partition("=")
        header[key] = value
    else:
        raise RecordingFormatError("missing column header row", line_no=len(lines) or 1)
    for key in ("session_id", "screen_width_px", "screen_height_px", "sample_rate_hz"):
        if key not in header:
            raise RecordingFormatError(f"preamble missing {key!r}", line_no=1)
    if lines[idx] != ",".join(CSV_COLUMNS):
        raise RecordingFormatError(
            f"expected column header {','.join(CSV_COLUMNS)!r}", line_no=idx + 1
        )
    samples = []
    prev_ts = -1
    for i, line in enumerate(lines[idx + 1 :], start=idx + 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise RecordingFormatError(
                f"expected {len(CSV_COLUMNS)} fields, got {len(parts)}", line_no=i
            )
        try:
            sample = GazeSample(
                timestamp_us=int(parts[0]),
                gaze_x=float(parts[1]),
                gaze_y=float(parts[2]),
                pupil_left_mm=float(parts[3]) if parts[3] else None,
                pupil_right_mm=float(parts[4]) if parts[4] else None,
                valid_left=_parse_bool(parts[5], i),
                valid_right=_parse_bool(parts[6], i),
            )
        except RecordingFormatError:
            raise
        except ValueError as exc:
            raise RecordingFormatError(f"bad sample: {exc}", line_no=i) from exc
        if sample.timestamp_us < prev_ts:
            raise RecordingFormatError(
                f"timestamps must be nondecreasing ({sample.timestamp_us} after {prev_ts})",
                line_no=i,
            )
        prev_ts = sample.timestamp_us
        samples.append(sample)
    return GazeRecording(
        session_id=header["session_id"],
        samples=tuple(samples),
        screen_width_px=int(header["screen_width_px"]),
        screen_height_px=int(header["screen_height_px"]),
        sample_rate_hz=float(header["sample_rate_hz"]),
    )


# ----------------------------------------------------------------- replay


def replay(
    recording: GazeRecording,
    sink: Callable[[GazeSample], None],
    speed: float = 1.0,
) -> int:
    """Feed samples to ``sink`` in order, paced by their timestamps.

    ``speed`` scales playback (2.0 is twice as fast); 0 disables pacing
    entirely. Returns the number of samples delivered. If the sink raises,
    the replay stops and :class:`ReplayAborted` reports the position.
    """
    if speed < 0:
        raise ValueError("speed must be >= 0")
    start_wall = time.perf_counter()
    first_ts = recording.samples[0].timestamp_us if recording.samples else 0
    delivered = 0
    for i, sample in enumerate(recording.samples):
        if speed > 0:
            target = start_wall + (sample.timestamp_us - first_ts) / 1e6 / speed
            delay = target - time.perf_counter()
            if delay > 0:
                time.sleep(delay)
        try:
            sink(sample)
        except Exception as exc:
            raise ReplayAborted(i, exc) from exc
        delivered += 1
    return delivered


# -------------------------------------------------------------- synthesis


@dataclass(frozen=True)
class ScanpathProfile:
    """Reader model for the trace generator.

    ``novice`` walks the code linearly with short hops and long dwells;
    ``expert`` jumps between distant regions with shorter dwells. The
    pupil signal ramps from ``pupil_base_mm`` toward ``pupil_base_mm +
    pupil_load_mm`` over the session.
    """

    kind: ProfileKind
    mean_dwell_ms: float
    dwell_jitter_ms: float
    hop_distance_px: float
    pupil_base_mm: float
    pupil_load_mm: float
    rng_seed: int

    def __post_init__(self) -> None:
        if self.kind not in ("novice", "expert"):
            raise ValueError(f"unknown profile kind: {self.kind!r}")
        if self.mean_dwell_ms <= 0 or self.hop_distance_px <= 0:
            raise ValueError("mean_dwell_ms and hop_distance_px must be positive")
        if self.pupil_base_mm <= 0:
            raise ValueError("pupil_base_mm must be positive")


def novice_profile(seed: int = 42) -> ScanpathProfile:
    return ScanpathProfile(
        kind="novice",
        mean_dwell_ms=280.0,
        dwell_jitter_ms=60.0,
        hop_distance_px=90.0,
        pupil_base_mm=3.1,
        pupil_load_mm=0.5,
        rng_seed=seed,
    )


def expert_profile(seed: int = 42) -> ScanpathProfile:
    return ScanpathProfile(
        kind="expert",
        mean_dwell_ms=180.0,
        dwell_jitter_ms=40.0,
        hop_distance_px=420.0,
        pupil_base_mm=3.1,
        pupil_load_mm=0.04,
        rng_seed=seed,
    )


@dataclass(frozen=True)
class PlannedDwell:
    """Ground truth for one generated dwell cluster.

    ``start_us``/``end_us`` are the timestamps of the first and last
    emitted sample of the cluster, so ``end_us - start_us`` is directly
    comparable with a detected fixation duration.
    """

    start_us: int
    end_us: int
    n_samples: int
    center_x: float  # normalized
    center_y: float

    @property
    def duration_ms(self) -> float:
        return (self.end_us - self.start_us) / 1000.0


# Generator tuning. Dwells are kept comfortably above the default detector
# minimum (100 ms) and cluster noise well under the default dispersion
# ceiling (35 px) so planned dwells and detected fixations line up 1:1.
_DWELL_FLOOR_MS = 130.0
_CLUSTER_NOISE_PX = 2.0
_MIN_HOP_PX = 55.0  # must clear dispersion_max_px plus noise
_BLINK_PROB = 0.06
_EYE_DROP_PROB = 0.02
_PUPIL_NOISE_MM = 0.012


def _plan_dwell_grid(
    rng: Random, n_total: int, step_us: int, profile: ScanpathProfile
) -> list[tuple[int, int]]:
    """Partition sample indices into dwell runs of (start_index, count)."""
    floor_n = 1 + math.ceil(_DWELL_FLOOR_MS * 1000.0 / step_us)
    if n_total < floor_n:
        return [(0, n_total)] if n_total >= 2 else []
    runs: list[tuple[int, int]] = []
    i = 0
    while n_total - i >= floor_n:
        dwell_ms = rng.gauss(profile.mean_dwell_ms, profile.dwell_jitter_ms)
        dwell_ms = max(_DWELL_FLOOR_MS, dwell_ms)
        n = max(floor_n, 1 + round(dwell_ms * 1000.0 / step_us))
        if n_total - (i + n) < floor_n:
            n = n_total - i  # absorb the tail rather than leave a runt dwell
        runs.append((i, n))
        i += n
    return runs


class _Walk:
    """Dwell-center walk over the editor viewport, in pixel space."""

    def __init__(self, rng: Random, profile: ScanpathProfile, geometry: "EditorGeometry"):
        self.rng = rng
        self.profile = profile
        self.left = geometry.origin_x_px + 4.0
        self.right = min(geometry.screen_width_px - 8.0, geometry.origin_x_px + 720.0)
        self.top = geometry.origin_y_px + 0.55 * geometry.line_height_px
        self.bottom = (
            geometry.origin_y_px
            + (geometry.visible_line_count - 0.45) * geometry.line_height_px
        )
        self.bottom = min(self.bottom, geometry.screen_height_px - 8.0)
        self.line_height = geometry.line_height_px
        self.x = self.left + 6.0
        self.y = self.top

    def current(self) -> tuple[float, float]:
        return self.x, self.y

    def advance(self) -> None:
        if self.profile.kind == "novice":
            self._advance_linear()
        else:
            self._advance_jump()

    def _advance_linear(self) -> None:
        hop = max(_MIN_HOP_PX, self.profile.hop_distance_px)
        self.x += hop * self.rng.uniform(0.85, 1.15)
        if self.x > self.right:
            self.x = self.left + self.rng.uniform(0.0, 0.4) * hop
            self.y += self.line_height
            if self.y > self.bottom:
                self.y = self.top  # wrapped: re-read from the top
        self.x = min(self.x, self.right)

    def _advance_jump(self) -> None:
        hop = max(_MIN_HOP_PX, self.profile.hop_distance_px)
        for _ in range(8):
            angle = self.rng.uniform(0.0, 2.0 * math.pi)
            r = hop * self.rng.uniform(0.85, 1.15)
            nx = _reflect(self.x + r * math.cos(angle), self.left, self.right)
            ny = _reflect(self.y + r * math.sin(angle), self.top, self.bottom)
            if math.hypot(nx - self.x, ny - self.y) >= _MIN_HOP_PX:
                self.x, self.y = nx, ny
                return
        # all draws landed too close after reflection; nudge sideways
        self.x = _reflect(self.x + _MIN_HOP_PX + 8.0, self.left, self.right)


def _reflect(v: float, lo: float, hi: float) -> float:
    span = hi - lo
    if span <= 0:
        return lo
    while v < lo or v > hi:
        if v < lo:
            v = 2 * lo - v
        if v > hi:
            v = 2 * hi - v
    return v


def synth_trace_with_plan(
    profile: ScanpathProfile,
    geometry: "EditorGeometry",
    duration_ms: float,
    sample_rate_hz: float = 60.0,
    session_id: str | None = None,
) -> tuple[GazeRecording, list[PlannedDwell]]:
    """Generate a deterministic trace plus its ground-truth dwell plan.

    The same (profile, geometry, duration) always yields an identical
    recording. Planned dwells sit on the sample grid: each records the
    exact first/last sample timestamps of its cluster, which is what a
    dispersion-based detector should recover.
    """
    if duration_ms <= 0:
        raise ValueError("duration_ms must be positive")
    step_us = round(1e6 / sample_rate_hz)
    n_total = int(duration_ms * 1000.0 // step_us) + 1
    total_span_us = (n_total - 1) * step_us if n_total > 1 else 1

    # independent streams so the dwell plan is insensitive to walk tuning
    rng_plan = Random(profile.rng_seed)
    rng_walk = Random(profile.rng_seed ^ 0x9E3779B1)
    rng_noise = Random(profile.rng_seed ^ 0x85EBCA77)

    runs = _plan_dwell_grid(rng_plan, n_total, step_us, profile)
    walk = _Walk(rng_walk, profile, geometry)
    sw = float(geometry.screen_width_px)
    sh = float(geometry.screen_height_px)

    samples: list[GazeSample] = []
    plan: list[PlannedDwell] = []
    for start_i, n in runs:
        cx_px, cy_px = walk.current()
        plan.append(
            PlannedDwell(
                start_us=start_i * step_us,
                end_us=(start_i + n - 1) * step_us,
                n_samples=n,
                center_x=round(cx_px / sw, 6),
                center_y=round(cy_px / sh, 6),
            )
        )
        blink_at = blink_len = -1
        if n >= 9 and rng_noise.random() < _BLINK_PROB:
            blink_len = rng_noise.choice((2, 3))
            blink_at = rng_noise.randint(2, n - 2 - blink_len)
        for k in range(n):
            t_us = (start_i + k) * step_us
            in_blink = blink_at >= 0 and blink_at <= k < blink_at + blink_len
            if in_blink:
                samples.append(
                    GazeSample(
                        timestamp_us=t_us,
                        gaze_x=round(min(max(cx_px / sw, 0.0), 1.0), 6),
                        gaze_y=round(min(max(cy_px / sh, 0.0), 1.0), 6),
                        valid_left=False,
                        valid_right=False,
                    )
                )
                continue
            x_px = cx_px + rng_noise.gauss(0.0, _CLUSTER_NOISE_PX)
            y_px = cy_px + rng_noise.gauss(0.0, _CLUSTER_NOISE_PX)
            x = round(min(max(x_px / sw, 0.0), 1.0), 6)
            y = round(min(max(y_px / sh, 0.0), 1.0), 6)
            load = profile.pupil_load_mm * (t_us / total_span_us)
            pupil = profile.pupil_base_mm + load
            pl = round(pupil + rng_noise.gauss(0.0, _PUPIL_NOISE_MM), 4)
            pr = round(pupil + rng_noise.gauss(0.0, _PUPIL_NOISE_MM), 4)
            valid_left = valid_right = True
            if rng_noise.random() < _EYE_DROP_PROB:
                if rng_noise.random() < 0.5:
                    valid_left = False
                else:
                    valid_right = False
            samples.append(
                GazeSample(
                    timestamp_us=t_us,
                    gaze_x=x,
                    gaze_y=y,
                    pupil_left_mm=pl if valid_left else None,
                    pupil_right_mm=pr if valid_right else None,
                    valid_left=valid_left,
                    valid_right=valid_right,
                )
            )
        walk.advance()

    recording = GazeRecording(
        session_id=session_id or f"synth-{profile.kind}-seed{profile.rng_seed}",
        samples=tuple(samples),
        screen_width_px=geometry.screen_width_px,
        screen_height_px=geometry.screen_height_px,
        sample_rate_hz=sample_rate_hz,
    )
    return recording, plan


def synth_trace(
    profile: ScanpathProfile,
    geometry: "EditorGeometry",
    duration_ms: float,
    sample_rate_hz: float = 60.0,
    session_id: str | None = None,
) -> GazeRecording:
    """Like :func:`synth_trace_with_plan` but discards the plan."""
    recording, _ = synth_trace_with_plan(
        profile, geometry, duration_ms, sample_rate_hz, session_id
    )
    return recording
