"""gazeprompt: turn eye-tracking signals from a code reading session into
refactoring prompts for an LLM.

The pipeline: capture or synthesize a gaze trace, detect fixations,
compute session metrics (fixation duration, fixation rate, saccade
length, pupil dilation), compare them against thresholds, and assemble a
natural-language prompt whose fragments describe the crossed thresholds.
A small service streams the whole thing live to a console UI.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .codemap import CodeLocation, EditorGeometry, LineGazeSummary, line_summaries, map_gaze
from .fixations import (
    Fixation,
    FixationConfig,
    FixationTracker,
    detect_fixations,
    fixation_durations_ms,
)
from .gazeio import (
    GazeRecording,
    GazeSample,
    PlannedDwell,
    RecordingFormatError,
    ScanpathProfile,
    expert_profile,
    novice_profile,
    read_recording,
    replay,
    synth_trace,
    synth_trace_with_plan,
    write_recording,
)
from .llm import MockBackend, RefactorRequest, RefactorResponse, refactor
from .metrics import (
    BaselineUnavailable,
    GazeMetrics,
    InsufficientData,
    compute_metrics,
    metrics_snapshot,
    pupil_baseline,
)
from .prompts import (
    PRESET_PROMPT,
    PromptText,
    ThresholdConfig,
    TriggerFlags,
    evaluate_thresholds,
    prompt_for_session,
    synthesize_prompt,
)
from .session import Session, open_session, replay_journal

__all__ = [
    "__version__",
    "CodeLocation",
    "EditorGeometry",
    "LineGazeSummary",
    "line_summaries",
    "map_gaze",
    "Fixation",
    "FixationConfig",
    "FixationTracker",
    "detect_fixations",
    "fixation_durations_ms",
    "GazeRecording",
    "GazeSample",
    "PlannedDwell",
    "RecordingFormatError",
    "ScanpathProfile",
    "expert_profile",
    "novice_profile",
    "read_recording",
    "replay",
    "synth_trace",
    "synth_trace_with_plan",
    "write_recording",
    "MockBackend",
    "RefactorRequest",
    "RefactorResponse",
    "refactor",
    "BaselineUnavailable",
    "GazeMetrics",
    "InsufficientData",
    "compute_metrics",
    "metrics_snapshot",
    "pupil_baseline",
    "PRESET_PROMPT",
    "PromptText",
    "ThresholdConfig",
    "TriggerFlags",
    "evaluate_thresholds",
    "prompt_for_session",
    "synthesize_prompt",
    "Session",
    "open_session",
    "replay_journal",
]
