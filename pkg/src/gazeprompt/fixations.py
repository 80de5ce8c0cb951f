"""Dispersion-threshold fixation detection (offline and streaming).

A window of consecutive usable samples grows while its pixel-space
dispersion ``(max x - min x) + (max y - min y)`` stays within
``dispersion_max_px``. When the next sample would break that bound, the
window becomes a fixation if it spans at least ``min_duration_ms``;
otherwise the window start slides forward one sample. Greedy and
deterministic, so the streaming tracker can commit fixations as soon as
their breaking sample has been seen and still agree exactly with an
offline pass over the same prefix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

from .gazeio import GazeRecording, GazeSample

ValidityPolicy = Literal["drop_invalid", "interpolate_short_gaps"]


@dataclass(frozen=True)
class FixationConfig:
    dispersion_max_px: float = 35.0
    min_duration_ms: float = 100.0
    validity_policy: ValidityPolicy = "drop_invalid"
    max_gap_ms: float = 75.0  # longest invalid gap bridged by interpolation

    def __post_init__(self) -> None:
        if self.dispersion_max_px <= 0:
            raise ValueError("dispersion_max_px must be positive")
        if self.min_duration_ms <= 0:
            raise ValueError("min_duration_ms must be positive")
        if self.validity_policy not in ("drop_invalid", "interpolate_short_gaps"):
            raise ValueError(f"unknown validity_policy: {self.validity_policy!r}")
        if self.max_gap_ms < 0:
            raise ValueError("max_gap_ms must be >= 0")

    def to_dict(self) -> dict:
        return {
            "dispersion_max_px": self.dispersion_max_px,
            "min_duration_ms": self.min_duration_ms,
            "validity_policy": self.validity_policy,
            "max_gap_ms": self.max_gap_ms,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "FixationConfig":
        return cls(
            dispersion_max_px=float(obj.get("dispersion_max_px", 35.0)),
            min_duration_ms=float(obj.get("min_duration_ms", 100.0)),
            validity_policy=obj.get("validity_policy", "drop_invalid"),
            max_gap_ms=float(obj.get("max_gap_ms", 75.0)),
        )


@dataclass(frozen=True)
class Fixation:
    """One detected fixation. Centroid is in normalized coordinates."""

    start_us: int
    end_us: int
    centroid_x: float
    centroid_y: float
    sample_count: int
    mean_pupil_mm: float | None = None

    def __post_init__(self) -> None:
        if self.end_us <= self.start_us:
            raise ValueError("end_us must be after start_us")
        if self.sample_count < 2:
            raise ValueError("a fixation needs at least 2 member samples")

    @property
    def duration_ms(self) -> float:
        return (self.end_us - self.start_us) / 1000.0

    def to_dict(self) -> dict:
        return {
            "start_us": self.start_us,
            "end_us": self.end_us,
            "centroid_x": self.centroid_x,
            "centroid_y": self.centroid_y,
            "sample_count": self.sample_count,
            "mean_pupil_mm": self.mean_pupil_mm,
        }


@dataclass(frozen=True)
class _Point:
    """A usable (possibly interpolated) gaze point in pixel space."""

    t_us: int
    x_px: float
    y_px: float
    x_norm: float
    y_norm: float
    pupil_mm: float | None


def _point_from_sample(s: GazeSample, sw: float, sh: float) -> _Point:
    return _Point(
        t_us=s.timestamp_us,
        x_px=s.gaze_x * sw,
        y_px=s.gaze_y * sh,
        x_norm=s.gaze_x,
        y_norm=s.gaze_y,
        pupil_mm=s.pupil_mm(),
    )


def _bridge_gap(prev: _Point, nxt: _Point, gap_ts: Sequence[int]) -> list[_Point]:
    """Linearly interpolated points at the timestamps of a bridged gap."""
    span = nxt.t_us - prev.t_us
    out = []
    for t in gap_ts:
        # duplicated timestamps make span 0; park on the earlier point then
        frac = (t - prev.t_us) / span if span > 0 else 0.0
        out.append(
            _Point(
                t_us=t,
                x_px=prev.x_px + frac * (nxt.x_px - prev.x_px),
                y_px=prev.y_px + frac * (nxt.y_px - prev.y_px),
                x_norm=prev.x_norm + frac * (nxt.x_norm - prev.x_norm),
                y_norm=prev.y_norm + frac * (nxt.y_norm - prev.y_norm),
                pupil_mm=None,
            )
        )
    return out


def _usable_points(
    samples: Sequence[GazeSample], config: FixationConfig, sw: float, sh: float
) -> list[_Point]:
    """Validity-filtered point stream the window logic runs on.

    Trailing invalid samples never contribute: a gap can only be bridged
    once a valid sample closes it, so this list is prefix-stable as more
    samples arrive (the streaming tracker depends on that).
    """
    interpolate = config.validity_policy == "interpolate_short_gaps"
    max_gap_us = config.max_gap_ms * 1000.0
    points: list[_Point] = []
    gap_ts: list[int] = []
    for s in samples:
        if not s.usable:
            gap_ts.append(s.timestamp_us)
            continue
        pt = _point_from_sample(s, sw, sh)
        if gap_ts and interpolate and points:
            if pt.t_us - points[-1].t_us <= max_gap_us:
                points.extend(_bridge_gap(points[-1], pt, gap_ts))
        gap_ts.clear()
        points.append(pt)
    return points


def _make_fixation(window: Sequence[_Point]) -> Fixation:
    n = len(window)
    cx = sum(p.x_norm for p in window) / n
    cy = sum(p.y_norm for p in window) / n
    pupils = [p.pupil_mm for p in window if p.pupil_mm is not None]
    return Fixation(
        start_us=window[0].t_us,
        end_us=window[-1].t_us,
        centroid_x=cx,
        centroid_y=cy,
        sample_count=n,
        mean_pupil_mm=sum(pupils) / len(pupils) if pupils else None,
    )


def _grow_window(points: Sequence[_Point], start: int, dispersion_max: float) -> int:
    """Largest j such that points[start..j] stays within the dispersion cap."""
    min_x = max_x = points[start].x_px
    min_y = max_y = points[start].y_px
    j = start
    while j + 1 < len(points):
        p = points[j + 1]
        nmin_x, nmax_x = min(min_x, p.x_px), max(max_x, p.x_px)
        nmin_y, nmax_y = min(min_y, p.y_px), max(max_y, p.y_px)
        if (nmax_x - nmin_x) + (nmax_y - nmin_y) > dispersion_max:
            break
        min_x, max_x, min_y, max_y = nmin_x, nmax_x, nmin_y, nmax_y
        j += 1
    return j


def _scan(points: Sequence[_Point], config: FixationConfig) -> list[Fixation]:
    out: list[Fixation] = []
    min_dur_us = config.min_duration_ms * 1000.0
    i = 0
    while i < len(points):
        j = _grow_window(points, i, config.dispersion_max_px)
        if j > i and points[j].t_us - points[i].t_us >= min_dur_us:
            out.append(_make_fixation(points[i : j + 1]))
            i = j + 1
        else:
            i += 1
    return out


def detect_fixations(recording: GazeRecording, config: FixationConfig | None = None) -> list[Fixation]:
    """Detect fixations over a whole recording. Pure; input untouched."""
    config = config or FixationConfig()
    points = _usable_points(
        recording.samples, config, float(recording.screen_width_px), float(recording.screen_height_px)
    )
    return _scan(points, config)


def fixation_durations_ms(fixations: Sequence[Fixation]) -> list[float]:
    return [f.duration_ms for f in fixations]


class FixationTracker:
    """Streaming detector with the same output as :func:`detect_fixations`.

    Push samples in timestamp order; ``fixations()`` returns what an
    offline pass over everything pushed so far would return. Fixations are
    committed permanently once their breaking sample has been seen, so the
    per-push cost stays proportional to the open window.
    """

    def __init__(self, screen_width_px: int, screen_height_px: int, config: FixationConfig | None = None):
        self._config = config or FixationConfig()
        self._sw = float(screen_width_px)
        self._sh = float(screen_height_px)
        self._points: list[_Point] = []
        self._start = 0  # first point not consumed by a committed fixation
        self._committed: list[Fixation] = []
        self._gap_ts: list[int] = []
        self._interpolate = self._config.validity_policy == "interpolate_short_gaps"

    def push(self, sample: GazeSample) -> None:
        if not sample.usable:
            self._gap_ts.append(sample.timestamp_us)
            return
        pt = _point_from_sample(sample, self._sw, self._sh)
        if self._gap_ts and self._interpolate and self._points:
            if pt.t_us - self._points[-1].t_us <= self._config.max_gap_ms * 1000.0:
                self._points.extend(_bridge_gap(self._points[-1], pt, self._gap_ts))
        self._gap_ts.clear()
        self._points.append(pt)
        self._advance()

    def push_many(self, samples: Sequence[GazeSample]) -> None:
        for s in samples:
            self.push(s)

    def _advance(self) -> None:
        # commit every window whose breaking sample is already in the buffer
        min_dur_us = self._config.min_duration_ms * 1000.0
        while self._start < len(self._points):
            j = _grow_window(self._points, self._start, self._config.dispersion_max_px)
            if j == len(self._points) - 1:
                return  # still open; may grow with future samples
            if j > self._start and self._points[j].t_us - self._points[self._start].t_us >= min_dur_us:
                self._committed.append(_make_fixation(self._points[self._start : j + 1]))
                del self._points[: j + 1]
                self._start = 0
            else:
                self._start += 1

    def fixations(self) -> list[Fixation]:
        """Committed fixations plus a final pass over the open tail."""
        return self._committed + _scan(self._points[self._start :], self._config)

    @property
    def committed_count(self) -> int:
        return len(self._committed)
