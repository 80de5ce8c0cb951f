from __future__ import annotations

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gazeprompt.metrics import GazeMetrics
from gazeprompt.prompts import (
    COMMAND_SENTENCE,
    FALLBACK_PROMPT,
    FRAGMENT_HIGH_COUNT,
    FRAGMENT_LONG_FIXATIONS,
    FRAGMENT_PUPIL_DILATION,
    FRAGMENT_SHORT_SACCADES,
    PRESET_PROMPT,
    PROMPT_PREFIX,
    PromptText,
    ThresholdConfig,
    TriggerFlags,
    evaluate_thresholds,
    prompt_for_session,
    synthesize_prompt,
)


def metrics_with(
    duration=None, count=None, saccade=None, dilation=None
) -> GazeMetrics:
    return GazeMetrics(
        mean_fixation_duration_ms=duration,
        fixation_count_per_s=count,
        mean_saccade_length_px=saccade,
        mean_pupil_dilation_mm=dilation,
        n_fixations=0 if duration is None else 10,
        n_pupil_samples=0 if dilation is None else 100,
        baseline_pupil_mm=None if dilation is None else 3.0,
        total_time_ms=10_000.0,
    )


# -------------------------------------------------- threshold boundaries


def test_thresholds_are_strict():
    cfg = ThresholdConfig()
    at = metrics_with(duration=241.31, count=2.89, saccade=132.74, dilation=0.1)
    assert evaluate_thresholds(at, cfg) == TriggerFlags()

    over = metrics_with(
        duration=241.31 + 1e-6, count=2.89 + 1e-6, saccade=132.74 - 1e-6, dilation=0.1 + 1e-6
    )
    assert evaluate_thresholds(over, cfg) == TriggerFlags(True, True, True, True)

    under = metrics_with(
        duration=241.31 - 1e-6, count=2.89 - 1e-6, saccade=132.74 + 1e-6, dilation=0.1 - 1e-6
    )
    assert evaluate_thresholds(under, cfg) == TriggerFlags()


def test_absent_metrics_never_flag():
    assert evaluate_thresholds(metrics_with()) == TriggerFlags()
    # present-but-extreme on one axis flags only that axis
    flags = evaluate_thresholds(metrics_with(duration=1e6))
    assert flags == TriggerFlags(long_fixation_duration=True)


def test_saccade_direction_above():
    cfg = ThresholdConfig(saccade_trigger_direction="above")
    m = metrics_with(saccade=500.0)
    assert evaluate_thresholds(m, cfg).short_saccades is True
    assert evaluate_thresholds(metrics_with(saccade=50.0), cfg).short_saccades is False


def test_direction_validation():
    with pytest.raises(ValueError):
        ThresholdConfig(saccade_trigger_direction="sideways")  # type: ignore[arg-type]


def test_custom_cut_points():
    cfg = ThresholdConfig(fixation_duration_ms=100.0, pupil_dilation_mm=0.5)
    flags = evaluate_thresholds(metrics_with(duration=150.0, dilation=0.3), cfg)
    assert flags.long_fixation_duration is True
    assert flags.high_pupil_dilation is False


def test_threshold_config_round_trip():
    cfg = ThresholdConfig(saccade_length_px=99.5, saccade_trigger_direction="above")
    assert ThresholdConfig.from_dict(cfg.to_dict()) == cfg
    assert TriggerFlags.from_dict(TriggerFlags(True, False, True, False).to_dict()) == TriggerFlags(
        True, False, True, False
    )


@given(
    duration=st.one_of(st.none(), st.floats(0, 2000, allow_nan=False)),
    count=st.one_of(st.none(), st.floats(0, 20, allow_nan=False)),
    saccade=st.one_of(st.none(), st.floats(0, 2000, allow_nan=False)),
    dilation=st.one_of(st.none(), st.floats(-2, 2, allow_nan=False)),
)
def test_flags_match_direct_comparison(duration, count, saccade, dilation):
    flags = evaluate_thresholds(metrics_with(duration, count, saccade, dilation))
    assert flags.long_fixation_duration == (duration is not None and duration > 241.31)
    assert flags.high_fixation_count == (count is not None and count > 2.89)
    assert flags.short_saccades == (saccade is not None and saccade < 132.74)
    assert flags.high_pupil_dilation == (dilation is not None and dilation > 0.1)


# -------------------------------------------------- synthesis


FRAGMENTS_IN_ORDER = (
    FRAGMENT_LONG_FIXATIONS,
    FRAGMENT_HIGH_COUNT,
    FRAGMENT_SHORT_SACCADES,
    FRAGMENT_PUPIL_DILATION,
)


@pytest.mark.parametrize(
    "bits", list(itertools.product([False, True], repeat=4)), ids=lambda b: "".join("ft"[x] for x in b)
)
def test_all_sixteen_flag_combinations(bits):
    flags = TriggerFlags(*bits)
    prompt = synthesize_prompt(flags, "realtime")
    if not any(bits):
        assert prompt.text == COMMAND_SENTENCE
        assert prompt.mode == "fallback"
        return
    chosen = [frag for bit, frag in zip(bits, FRAGMENTS_IN_ORDER) if bit]
    expected = PROMPT_PREFIX + ", ".join(chosen) + ". " + COMMAND_SENTENCE
    assert prompt.text == expected
    assert prompt.mode == "realtime"


def test_every_prompt_ends_with_command_sentence():
    for bits in itertools.product([False, True], repeat=4):
        for mode in ("realtime", "preset"):
            prompt = synthesize_prompt(TriggerFlags(*bits), mode)
            assert prompt.text.endswith(COMMAND_SENTENCE)


def test_preset_ignores_flags():
    texts = {
        synthesize_prompt(TriggerFlags(*bits), "preset").text
        for bits in itertools.product([False, True], repeat=4)
    }
    assert texts == {PRESET_PROMPT}


def test_fragment_order_is_canonical():
    prompt = synthesize_prompt(TriggerFlags(True, True, True, True)).text
    positions = [prompt.index(frag.split(",")[0]) for frag in FRAGMENTS_IN_ORDER]
    assert positions == sorted(positions)


def test_more_flags_never_shorten_the_prompt():
    # adding any one flag to any combination makes the text longer
    for bits in itertools.product([False, True], repeat=4):
        base = synthesize_prompt(TriggerFlags(*bits)).text
        for i in range(4):
            if bits[i]:
                continue
            raised = list(bits)
            raised[i] = True
            grown = synthesize_prompt(TriggerFlags(*raised)).text
            assert len(grown) > len(base)


def test_unknown_mode_rejected():
    with pytest.raises(ValueError):
        synthesize_prompt(TriggerFlags(), "chatty")  # type: ignore[arg-type]


def test_prompt_text_validation():
    with pytest.raises(ValueError):
        PromptText(text="", mode="realtime")
    with pytest.raises(ValueError):
        PromptText(text="Do something else.", mode="realtime")


def test_fallback_is_bare_command():
    assert FALLBACK_PROMPT == COMMAND_SENTENCE == "Improve the code."


# -------------------------------------------------- golden texts


def test_duration_and_pupil_prompt_matches_golden(golden_dir):
    flags = TriggerFlags(long_fixation_duration=True, high_pupil_dilation=True)
    prompt = synthesize_prompt(flags, "realtime")
    golden = (golden_dir / "prompt_two_flag.txt").read_text()
    assert prompt.text + "\n" == golden


def test_preset_prompt_matches_golden(golden_dir):
    golden = (golden_dir / "prompt_preset.txt").read_text()
    assert PRESET_PROMPT + "\n" == golden


def test_realtime_duration_fragment_has_comma_preset_does_not():
    assert FRAGMENT_LONG_FIXATIONS.startswith("long fixation durations,")
    assert "long fixation durations indicating" in PRESET_PROMPT


# -------------------------------------------------- one-step helper


def test_prompt_for_session_combines_both_steps():
    m = metrics_with(duration=300.0, saccade=80.0)
    flags, prompt = prompt_for_session(m)
    assert flags == TriggerFlags(long_fixation_duration=True, short_saccades=True)
    assert FRAGMENT_LONG_FIXATIONS in prompt.text
    assert FRAGMENT_SHORT_SACCADES in prompt.text
    assert FRAGMENT_HIGH_COUNT not in prompt.text
