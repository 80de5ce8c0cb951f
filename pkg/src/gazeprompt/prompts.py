"""Threshold evaluation and gaze-conditioned prompt synthesis.

Metrics are compared against literature-derived cut points with strict
inequalities; each crossed threshold contributes one fixed descriptive
fragment to the prompt. Fragment order is always duration, count,
saccade, pupil, and every prompt ends with the same command sentence.

Two texts exist for the duration fragment: the live template carries a
comma after "durations", the preset card does not. Both are kept verbatim
rather than normalized, so preset output stays reproducible down to the
byte.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Literal

from .metrics import GazeMetrics

PromptMode = Literal["realtime", "preset"]

COMMAND_SENTENCE = "Improve the code."

PROMPT_PREFIX = "While reading the code, the developer demonstrated "

FRAGMENT_LONG_FIXATIONS = (
    "long fixation durations, indicating sustained attention and deep cognitive "
    "processing, suggesting higher complexity or ambiguity in the code"
)
FRAGMENT_HIGH_COUNT = (
    "high fixation count suggesting low visual efficiency, increased scanning, "
    "suggesting cognitive strain in locating meaningful cues"
)
FRAGMENT_SHORT_SACCADES = (
    "short saccades indicating novice-like behavior and linear reading patterns, "
    "reflecting difficulty in identifying key code elements"
)
FRAGMENT_PUPIL_DILATION = (
    "increased pupil dilation reflecting high cognitive effort and mental workload"
)

# preset card wording: same fragments, minus the first comma of the
# duration fragment
_PRESET_LONG_FIXATIONS = (
    "long fixation durations indicating sustained attention and deep cognitive "
    "processing, suggesting higher complexity or ambiguity in the code"
)

PRESET_PROMPT = (
    PROMPT_PREFIX
    + ", ".join(
        (
            _PRESET_LONG_FIXATIONS,
            FRAGMENT_HIGH_COUNT,
            FRAGMENT_SHORT_SACCADES,
            FRAGMENT_PUPIL_DILATION,
        )
    )
    + ". "
    + COMMAND_SENTENCE
)

FALLBACK_PROMPT = COMMAND_SENTENCE


@dataclass(frozen=True)
class ThresholdConfig:
    """Cut points for flagging each metric, plus the saccade direction.

    ``saccade_trigger_direction`` selects which side of the saccade cut
    point raises the flag; short saccades ("below") indicate the linear,
    word-by-word reading the fragments describe.
    """

    fixation_duration_ms: float = 241.31
    fixation_count_per_s: float = 2.89
    saccade_length_px: float = 132.74
    pupil_dilation_mm: float = 0.1
    saccade_trigger_direction: Literal["below", "above"] = "below"

    def __post_init__(self) -> None:
        if self.saccade_trigger_direction not in ("below", "above"):
            raise ValueError(
                f"saccade_trigger_direction must be below or above, "
                f"got {self.saccade_trigger_direction!r}"
            )

    def to_dict(self) -> dict:
        return {
            "fixation_duration_ms": self.fixation_duration_ms,
            "fixation_count_per_s": self.fixation_count_per_s,
            "saccade_length_px": self.saccade_length_px,
            "pupil_dilation_mm": self.pupil_dilation_mm,
            "saccade_trigger_direction": self.saccade_trigger_direction,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ThresholdConfig":
        return cls(
            fixation_duration_ms=float(obj.get("fixation_duration_ms", 241.31)),
            fixation_count_per_s=float(obj.get("fixation_count_per_s", 2.89)),
            saccade_length_px=float(obj.get("saccade_length_px", 132.74)),
            pupil_dilation_mm=float(obj.get("pupil_dilation_mm", 0.1)),
            saccade_trigger_direction=obj.get("saccade_trigger_direction", "below"),
        )


@dataclass(frozen=True)
class TriggerFlags:
    """Which metrics crossed their thresholds. A flag can only be true
    when its metric was actually present."""

    long_fixation_duration: bool = False
    high_fixation_count: bool = False
    short_saccades: bool = False
    high_pupil_dilation: bool = False

    def __iter__(self) -> Iterator[bool]:
        yield self.long_fixation_duration
        yield self.high_fixation_count
        yield self.short_saccades
        yield self.high_pupil_dilation

    def any(self) -> bool:
        return any(self)

    def to_dict(self) -> dict:
        return {
            "long_fixation_duration": self.long_fixation_duration,
            "high_fixation_count": self.high_fixation_count,
            "short_saccades": self.short_saccades,
            "high_pupil_dilation": self.high_pupil_dilation,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "TriggerFlags":
        return cls(
            long_fixation_duration=bool(obj.get("long_fixation_duration", False)),
            high_fixation_count=bool(obj.get("high_fixation_count", False)),
            short_saccades=bool(obj.get("short_saccades", False)),
            high_pupil_dilation=bool(obj.get("high_pupil_dilation", False)),
        )


@dataclass(frozen=True)
class PromptText:
    """A synthesized prompt. ``mode`` records which path produced it."""

    text: str
    mode: Literal["realtime", "preset", "fallback"]

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("prompt text must be nonempty")
        if not self.text.endswith(COMMAND_SENTENCE):
            raise ValueError(f"prompt text must end with {COMMAND_SENTENCE!r}")


def evaluate_thresholds(
    metrics: GazeMetrics, config: ThresholdConfig | None = None
) -> TriggerFlags:
    """Compare metrics against the cut points. Strict inequalities; an
    absent metric never raises its flag."""
    cfg = config or ThresholdConfig()
    m = metrics
    short_saccades = False
    if m.mean_saccade_length_px is not None:
        if cfg.saccade_trigger_direction == "below":
            short_saccades = m.mean_saccade_length_px < cfg.saccade_length_px
        else:
            short_saccades = m.mean_saccade_length_px > cfg.saccade_length_px
    return TriggerFlags(
        long_fixation_duration=(
            m.mean_fixation_duration_ms is not None
            and m.mean_fixation_duration_ms > cfg.fixation_duration_ms
        ),
        high_fixation_count=(
            m.fixation_count_per_s is not None
            and m.fixation_count_per_s > cfg.fixation_count_per_s
        ),
        short_saccades=short_saccades,
        high_pupil_dilation=(
            m.mean_pupil_dilation_mm is not None
            and m.mean_pupil_dilation_mm > cfg.pupil_dilation_mm
        ),
    )


def synthesize_prompt(flags: TriggerFlags, mode: PromptMode = "realtime") -> PromptText:
    """Build the prompt for a set of flags.

    Realtime mode concatenates the fragments of the raised flags in
    canonical order; no flags at all falls back to the bare command
    sentence. Preset mode ignores the flags and returns the fixed
    all-fragment card.
    """
    if mode == "preset":
        return PromptText(text=PRESET_PROMPT, mode="preset")
    if mode != "realtime":
        raise ValueError(f"unknown prompt mode: {mode!r}")
    fragments = []
    if flags.long_fixation_duration:
        fragments.append(FRAGMENT_LONG_FIXATIONS)
    if flags.high_fixation_count:
        fragments.append(FRAGMENT_HIGH_COUNT)
    if flags.short_saccades:
        fragments.append(FRAGMENT_SHORT_SACCADES)
    if flags.high_pupil_dilation:
        fragments.append(FRAGMENT_PUPIL_DILATION)
    if not fragments:
        return PromptText(text=FALLBACK_PROMPT, mode="fallback")
    return PromptText(
        text=PROMPT_PREFIX + ", ".join(fragments) + ". " + COMMAND_SENTENCE,
        mode="realtime",
    )


def prompt_for_session(
    metrics: GazeMetrics,
    config: ThresholdConfig | None = None,
    mode: PromptMode = "realtime",
) -> tuple[TriggerFlags, PromptText]:
    """Evaluate thresholds and synthesize the prompt in one step. Pure."""
    flags = evaluate_thresholds(metrics, config)
    return flags, synthesize_prompt(flags, mode)
