"""Session-level gaze metrics: fixation duration, fixation rate, saccade
length, and baseline-corrected pupil dilation.

Definitions:

* mean fixation duration (ms): mean of per-fixation durations.
* fixation count per second: fixation count / session length in seconds,
  where session length runs from the first to the last sample timestamp.
* mean saccade length (px): mean Euclidean step between consecutive valid
  samples, in normalized units scaled by the screen width. Pairs touching
  an invalid sample are skipped and the chain restarts after the gap, so
  a blink never manufactures a phantom saccade across it.
* mean pupil dilation (mm): mean of (sample pupil - baseline) over valid
  pupil samples. Baseline is the mean pupil during the first 60 ms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .fixations import Fixation, FixationConfig, detect_fixations
from .gazeio import GazeRecording

BASELINE_WINDOW_US = 60_000  # samples strictly before this are the baseline
BASELINE_FALLBACK_SAMPLES = 5


class InsufficientData(ValueError):
    """Raised when a computation needs more samples than the session has."""


class BaselineUnavailable(ValueError):
    """Raised when a recording has no valid pupil samples at all."""


@dataclass(frozen=True)
class GazeMetrics:
    """Computed session metrics. Fields are None when undefined:

    fixation fields need at least one fixation, the saccade field needs at
    least one valid sample pair, and the pupil fields need valid pupil
    data plus a baseline.
    """

    mean_fixation_duration_ms: float | None
    fixation_count_per_s: float | None
    mean_saccade_length_px: float | None
    mean_pupil_dilation_mm: float | None
    n_fixations: int
    n_pupil_samples: int
    baseline_pupil_mm: float | None
    total_time_ms: float

    def to_dict(self) -> dict:
        return {
            "mean_fixation_duration_ms": self.mean_fixation_duration_ms,
            "fixation_count_per_s": self.fixation_count_per_s,
            "mean_saccade_length_px": self.mean_saccade_length_px,
            "mean_pupil_dilation_mm": self.mean_pupil_dilation_mm,
            "n_fixations": self.n_fixations,
            "n_pupil_samples": self.n_pupil_samples,
            "baseline_pupil_mm": self.baseline_pupil_mm,
            "total_time_ms": self.total_time_ms,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "GazeMetrics":
        def opt(key: str) -> float | None:
            v = obj.get(key)
            return None if v is None else float(v)

        return cls(
            mean_fixation_duration_ms=opt("mean_fixation_duration_ms"),
            fixation_count_per_s=opt("fixation_count_per_s"),
            mean_saccade_length_px=opt("mean_saccade_length_px"),
            mean_pupil_dilation_mm=opt("mean_pupil_dilation_mm"),
            n_fixations=int(obj["n_fixations"]),
            n_pupil_samples=int(obj["n_pupil_samples"]),
            baseline_pupil_mm=opt("baseline_pupil_mm"),
            total_time_ms=float(obj["total_time_ms"]),
        )


def pupil_baseline(recording: GazeRecording) -> float:
    """Baseline pupil diameter for a session.

    Mean per-sample pupil over the first 60 ms; if that window holds no
    valid pupil sample (a session opening on a blink), the first
    5 valid pupil samples stand in.
    """
    window: list[float] = []
    fallback: list[float] = []
    for s in recording.samples:
        p = s.pupil_mm()
        if p is None:
            continue
        rel = s.timestamp_us - recording.samples[0].timestamp_us
        if rel < BASELINE_WINDOW_US:
            window.append(p)
        if len(fallback) < BASELINE_FALLBACK_SAMPLES:
            fallback.append(p)
        if rel >= BASELINE_WINDOW_US and len(fallback) >= BASELINE_FALLBACK_SAMPLES:
            break
    if window:
        return sum(window) / len(window)
    if fallback:
        return sum(fallback) / len(fallback)
    raise BaselineUnavailable("recording has no valid pupil samples")


def compute_metrics(
    recording: GazeRecording,
    fixations: Sequence[Fixation],
    baseline_pupil_mm: float | None,
) -> GazeMetrics:
    """Compute all four metrics for a recording and its fixations.

    ``baseline_pupil_mm`` may be None when the session has no pupil data;
    the dilation metric is then absent. Requires at least 2 samples.
    """
    samples = recording.samples
    if len(samples) < 2:
        raise InsufficientData(f"need at least 2 samples, got {len(samples)}")
    if baseline_pupil_mm is not None and baseline_pupil_mm <= 0:
        raise ValueError("baseline_pupil_mm must be positive")

    total_time_ms = (samples[-1].timestamp_us - samples[0].timestamp_us) / 1000.0

    n_fix = len(fixations)
    mean_fix_ms = None
    count_per_s = None
    if n_fix >= 1:
        mean_fix_ms = sum(f.duration_ms for f in fixations) / n_fix
        count_per_s = n_fix / (total_time_ms / 1000.0)

    sacc_sum = 0.0
    sacc_n = 0
    for prev, cur in zip(samples, samples[1:]):
        if not (prev.usable and cur.usable):
            continue  # chain restarts after the invalid gap
        sacc_sum += math.hypot(cur.gaze_x - prev.gaze_x, cur.gaze_y - prev.gaze_y)
        sacc_n += 1
    mean_saccade = (sacc_sum / sacc_n) * recording.screen_width_px if sacc_n else None

    dil_sum = 0.0
    n_pupil = 0
    for s in samples:
        p = s.pupil_mm()
        if p is None:
            continue
        n_pupil += 1
        if baseline_pupil_mm is not None:
            dil_sum += p - baseline_pupil_mm
    mean_dilation = (
        dil_sum / n_pupil if (n_pupil and baseline_pupil_mm is not None) else None
    )

    return GazeMetrics(
        mean_fixation_duration_ms=mean_fix_ms,
        fixation_count_per_s=count_per_s,
        mean_saccade_length_px=mean_saccade,
        mean_pupil_dilation_mm=mean_dilation,
        n_fixations=n_fix,
        n_pupil_samples=n_pupil,
        baseline_pupil_mm=baseline_pupil_mm,
        total_time_ms=total_time_ms,
    )


def metrics_snapshot(
    recording: GazeRecording, fixation_config: FixationConfig | None = None
) -> GazeMetrics:
    """Metrics for a recording treated as a standalone session.

    Streaming consumers must produce snapshots identical to this function
    applied to the prefix received so far (fixation detection included).
    """
    fixations = detect_fixations(recording, fixation_config)
    try:
        baseline = pupil_baseline(recording)
    except BaselineUnavailable:
        baseline = None
    return compute_metrics(recording, fixations, baseline)
