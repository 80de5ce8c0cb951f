from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gazeprompt.fixations import FixationConfig, FixationTracker, detect_fixations
from gazeprompt.gazeio import (
    GazeRecording,
    GazeSample,
    expert_profile,
    novice_profile,
    synth_trace_with_plan,
)
from gazeprompt.metrics import (
    BASELINE_FALLBACK_SAMPLES,
    BASELINE_WINDOW_US,
    BaselineUnavailable,
    InsufficientData,
    compute_metrics,
    metrics_snapshot,
    pupil_baseline,
)

from oracles import brute_baseline, brute_metrics, close_enough

STEP = 16_667


def sample_at(t_us, x, y, valid=True, pupil=3.0, pupil_right=None):
    return GazeSample(
        timestamp_us=t_us,
        gaze_x=x,
        gaze_y=y,
        pupil_left_mm=pupil if valid else None,
        pupil_right_mm=(pupil_right if pupil_right is not None else pupil) if valid else None,
        valid_left=valid,
        valid_right=valid,
    )


def recording_of(samples, width=1920, height=1080):
    return GazeRecording(
        session_id="metrics-test",
        samples=tuple(samples),
        screen_width_px=width,
        screen_height_px=height,
    )


# -------------------------------------------------- direct probes


def test_horizontal_sweep_saccade_length():
    # alternate between x=0.25 and x=0.75 on a 1920 px screen: every hop is 960 px
    samples = [sample_at(i * STEP, 0.25 if i % 2 == 0 else 0.75, 0.5) for i in range(20)]
    rec = recording_of(samples)
    m = compute_metrics(rec, detect_fixations(rec), baseline_pupil_mm=3.0)
    assert m.mean_saccade_length_px == pytest.approx(960.0, abs=1e-9)


def test_fixation_count_rate():
    # two 400 ms dwells over exactly one second of recording
    samples = []
    t = 0
    for _ in range(25):
        samples.append(sample_at(t, 0.2, 0.2))
        t += STEP
    for _ in range(10):
        samples.append(sample_at(t, 0.8, 0.8, valid=False))
        t += STEP
    for _ in range(25):
        samples.append(sample_at(t, 0.7, 0.7))
        t += STEP
    rec = recording_of(samples)
    fixations = detect_fixations(rec)
    assert len(fixations) == 2
    m = compute_metrics(rec, fixations, baseline_pupil_mm=3.0)
    total_s = (samples[-1].timestamp_us - samples[0].timestamp_us) / 1e6
    assert m.fixation_count_per_s == pytest.approx(2.0 / total_s)


def test_constant_pupil_has_zero_dilation():
    samples = [sample_at(i * STEP, 0.5, 0.5, pupil=3.2) for i in range(30)]
    rec = recording_of(samples)
    m = compute_metrics(rec, detect_fixations(rec), baseline_pupil_mm=3.2)
    assert m.mean_pupil_dilation_mm == pytest.approx(0.0, abs=1e-12)


def test_mean_fixation_duration():
    samples = [sample_at(i * STEP, 0.5, 0.5) for i in range(13)]  # 200 ms dwell
    rec = recording_of(samples)
    fixations = detect_fixations(rec)
    m = compute_metrics(rec, fixations, baseline_pupil_mm=3.0)
    assert m.mean_fixation_duration_ms == pytest.approx(fixations[0].duration_ms)


def test_no_fixations_leaves_fixation_metrics_none():
    rng = random.Random(3)
    samples = [sample_at(i * STEP, rng.random(), 0.5) for i in range(8)]
    rec = recording_of(samples)
    m = compute_metrics(rec, [], baseline_pupil_mm=3.0)
    assert m.mean_fixation_duration_ms is None
    assert m.fixation_count_per_s is None
    assert m.n_fixations == 0


def test_saccade_chain_restarts_after_invalid_gap():
    # valid valid INVALID valid valid: only the two intact pairs count
    xs = [0.1, 0.2, 0.9, 0.4, 0.5]
    samples = [
        sample_at(i * STEP, x, 0.5, valid=(i != 2)) for i, x in enumerate(xs)
    ]
    rec = recording_of(samples)
    m = compute_metrics(rec, [], baseline_pupil_mm=3.0)
    expected = ((0.2 - 0.1) * 1920 + (0.5 - 0.4) * 1920) / 2
    assert m.mean_saccade_length_px == pytest.approx(expected, abs=1e-9)


def test_saccade_none_when_no_usable_pair():
    samples = [sample_at(i * STEP, 0.5, 0.5, valid=(i % 2 == 0)) for i in range(6)]
    rec = recording_of(samples)
    m = compute_metrics(rec, [], baseline_pupil_mm=3.0)
    assert m.mean_saccade_length_px is None


def test_pupil_uses_mean_of_valid_eyes():
    samples = [sample_at(i * STEP, 0.5, 0.5, pupil=3.0, pupil_right=3.4) for i in range(10)]
    rec = recording_of(samples)
    m = compute_metrics(rec, [], baseline_pupil_mm=3.0)
    assert m.mean_pupil_dilation_mm == pytest.approx(0.2, abs=1e-12)


def test_dilation_none_without_baseline():
    samples = [sample_at(i * STEP, 0.5, 0.5) for i in range(10)]
    rec = recording_of(samples)
    m = compute_metrics(rec, [], baseline_pupil_mm=None)
    assert m.mean_pupil_dilation_mm is None


def test_insufficient_data_below_two_samples():
    with pytest.raises(InsufficientData):
        compute_metrics(recording_of([sample_at(0, 0.5, 0.5)]), [], baseline_pupil_mm=None)
    with pytest.raises(InsufficientData):
        compute_metrics(recording_of([]), [], baseline_pupil_mm=None)


# -------------------------------------------------- baseline


def test_baseline_window_is_strictly_before_60ms():
    # samples at 0, 30000, 59999, 60000 us: the last one sits outside the window
    pupils = [3.0, 3.2, 3.4, 9.9]
    ts = [0, 30_000, 59_999, 60_000]
    samples = [sample_at(t, 0.5, 0.5, pupil=p) for t, p in zip(ts, pupils)]
    base = pupil_baseline(recording_of(samples))
    assert base == pytest.approx((3.0 + 3.2 + 3.4) / 3)


def test_baseline_window_is_relative_to_first_sample():
    offset = 5_000_000
    samples = [sample_at(offset + i * STEP, 0.5, 0.5, pupil=3.0 + i) for i in range(10)]
    base = pupil_baseline(recording_of(samples))
    window = [3.0 + i for i in range(10) if i * STEP < BASELINE_WINDOW_US]
    assert base == pytest.approx(sum(window) / len(window))


def test_baseline_fallback_first_five_valid():
    # nothing valid inside the window; first five valid pupils win
    samples = [sample_at(i * STEP, 0.5, 0.5, valid=False) for i in range(4)]
    t = 4 * STEP
    pupils = [2.8, 3.0, 3.2, 3.4, 3.6, 8.0]
    for p in pupils:
        samples.append(sample_at(t, 0.5, 0.5, pupil=p))
        t += STEP
    base = pupil_baseline(recording_of(samples))
    assert base == pytest.approx(sum(pupils[:BASELINE_FALLBACK_SAMPLES]) / 5)


def test_baseline_unavailable_without_pupil_data():
    samples = [sample_at(i * STEP, 0.5, 0.5, valid=False) for i in range(10)]
    with pytest.raises(BaselineUnavailable):
        pupil_baseline(recording_of(samples))
    with pytest.raises(BaselineUnavailable):
        pupil_baseline(recording_of([]))


def test_metrics_snapshot_survives_missing_baseline():
    samples = [sample_at(i * STEP, 0.5, 0.5, valid=(i > 3)) for i in range(8)]
    # validity starts late but pupils exist, so fallback applies
    m = metrics_snapshot(recording_of(samples), FixationConfig())
    assert m.mean_pupil_dilation_mm is not None


# -------------------------------------------------- oracle equivalence


def test_matches_brute_force_on_synthetic_traces(geometry):
    for seed in range(10):
        profile = novice_profile(seed) if seed % 2 == 0 else expert_profile(seed)
        rec, _ = synth_trace_with_plan(profile, geometry, 8000)
        cfg = FixationConfig()
        fixations = detect_fixations(rec, cfg)
        base = pupil_baseline(rec)
        m = compute_metrics(rec, fixations, baseline_pupil_mm=base)
        ref = brute_metrics(
            rec.samples, fixations, brute_baseline(rec.samples), rec.screen_width_px
        )
        for key in (
            "mean_fixation_duration_ms",
            "fixation_count_per_s",
            "mean_saccade_length_px",
            "mean_pupil_dilation_mm",
        ):
            assert close_enough(getattr(m, key), ref[key]), (seed, key)


def test_translation_leaves_saccade_lengths_alone(geometry):
    rec, _ = synth_trace_with_plan(novice_profile(9), geometry, 5000)
    shifted = GazeRecording(
        session_id=rec.session_id,
        samples=tuple(
            GazeSample(
                timestamp_us=s.timestamp_us,
                gaze_x=min(0.999999, s.gaze_x * 0.5 + 0.25),
                gaze_y=s.gaze_y,
                pupil_left_mm=s.pupil_left_mm,
                pupil_right_mm=s.pupil_right_mm,
                valid_left=s.valid_left,
                valid_right=s.valid_right,
            )
            for s in rec.samples
        ),
        screen_width_px=rec.screen_width_px,
        screen_height_px=rec.screen_height_px,
    )
    m0 = compute_metrics(rec, [], baseline_pupil_mm=3.0)
    m1 = compute_metrics(shifted, [], baseline_pupil_mm=3.0)
    # horizontal compression halves x travel; y travel unchanged
    assert m1.mean_saccade_length_px < m0.mean_saccade_length_px


@settings(deadline=None, max_examples=40)
@given(delta=st.floats(-0.5, 0.5))
def test_dilation_is_linear_in_pupil_offset(delta):
    samples = [sample_at(i * STEP, 0.5, 0.5, pupil=3.0 + (i % 3) * 0.1) for i in range(12)]
    rec = recording_of(samples)
    shifted = recording_of(
        [
            sample_at(i * STEP, 0.5, 0.5, pupil=3.0 + (i % 3) * 0.1 + delta)
            for i in range(12)
        ]
    )
    m0 = compute_metrics(rec, [], baseline_pupil_mm=3.0)
    m1 = compute_metrics(shifted, [], baseline_pupil_mm=3.0)
    assert m1.mean_pupil_dilation_mm == pytest.approx(
        m0.mean_pupil_dilation_mm + delta, abs=1e-9
    )


def test_streaming_prefixes_agree_with_offline(geometry):
    rec, _ = synth_trace_with_plan(novice_profile(17), geometry, 6000)
    cfg = FixationConfig()
    tracker = FixationTracker(rec.screen_width_px, rec.screen_height_px, cfg)
    pushed = 0
    for cut in (60, 180, 333, len(rec.samples)):
        prefix = rec.prefix(rec.samples[cut - 1].timestamp_us)
        tracker.push_many(prefix.samples[pushed:])
        pushed = len(prefix.samples)
        live = compute_metrics(prefix, tracker.fixations(), baseline_pupil_mm=3.0)
        offline = compute_metrics(
            prefix, detect_fixations(prefix, cfg), baseline_pupil_mm=3.0
        )
        assert live == offline


def test_serialization_round_trip(geometry):
    rec, _ = synth_trace_with_plan(novice_profile(2), geometry, 4000)
    m = metrics_snapshot(rec, FixationConfig())
    from gazeprompt.metrics import GazeMetrics

    assert GazeMetrics.from_dict(m.to_dict()) == m
    assert not math.isnan(m.total_time_ms)
