from __future__ import annotations

import json
import socket

import pytest

from gazeprompt.cli import main
from gazeprompt.gazeio import read_recording


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "gazeprompt" in capsys.readouterr().out


def test_missing_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_unknown_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--out", "x.jsonl", "--wat"])
    assert exc.value.code == 2


# -------------------------------------------------- synth


def test_synth_writes_deterministic_trace(tmp_path, capsys):
    out1 = tmp_path / "a.jsonl"
    out2 = tmp_path / "b.jsonl"
    code, stdout, _ = run(
        capsys, "synth", "--seed", "7", "--duration-ms", "2000", "--out", str(out1)
    )
    assert code == 0
    assert "wrote" in stdout
    code, _, _ = run(
        capsys, "synth", "--seed", "7", "--duration-ms", "2000", "--out", str(out2)
    )
    assert code == 0
    assert out1.read_text() == out2.read_text()
    rec = read_recording(out1)
    assert rec.session_id == "synth-novice-seed7"


def test_synth_json_output_is_single_object(tmp_path, capsys):
    out = tmp_path / "a.jsonl"
    code, stdout, _ = run(
        capsys, "synth", "--duration-ms", "1000", "--out", str(out), "--json"
    )
    assert code == 0
    obj = json.loads(stdout)  # json.loads on the whole stream: one object only
    assert obj["samples"] == len(read_recording(out))
    assert obj["path"] == str(out)
    assert obj["dwells"] >= 1


def test_synth_csv_format(tmp_path, capsys):
    out = tmp_path / "a.csv"
    code, _, _ = run(capsys, "synth", "--duration-ms", "1000", "--out", str(out))
    assert code == 0
    assert out.read_text().startswith("#")
    assert len(read_recording(out)) == 60


# -------------------------------------------------- analyze / prompt


@pytest.fixture
def trace_file(tmp_path):
    out = tmp_path / "trace.jsonl"
    assert main(["synth", "--seed", "42", "--duration-ms", "8000", "--out", str(out)]) == 0
    return out


def test_analyze_table(trace_file, capsys):
    code, stdout, _ = run(capsys, "analyze", str(trace_file))
    assert code == 0
    assert "mean fixation duration (ms)" in stdout
    assert "short_saccades" in stdout


def test_analyze_json(trace_file, capsys):
    code, stdout, _ = run(capsys, "analyze", str(trace_file), "--json")
    assert code == 0
    obj = json.loads(stdout)
    assert obj["metrics"]["n_fixations"] > 0
    assert set(obj["flags"]) == {
        "long_fixation_duration",
        "high_fixation_count",
        "short_saccades",
        "high_pupil_dilation",
    }


def test_analyze_is_deterministic(trace_file, capsys):
    _, first, _ = run(capsys, "analyze", str(trace_file), "--json")
    _, second, _ = run(capsys, "analyze", str(trace_file), "--json")
    assert first == second


def test_prompt_realtime(trace_file, capsys):
    code, stdout, _ = run(capsys, "prompt", str(trace_file))
    assert code == 0
    assert stdout.startswith("flags: ")
    assert stdout.rstrip().endswith("Improve the code.")


def test_prompt_preset_json(trace_file, capsys):
    from gazeprompt.prompts import PRESET_PROMPT

    code, stdout, _ = run(capsys, "prompt", str(trace_file), "--mode", "preset", "--json")
    assert code == 0
    obj = json.loads(stdout)
    assert obj["prompt"] == PRESET_PROMPT
    assert obj["mode"] == "preset"


def test_missing_recording_is_data_error(capsys, tmp_path):
    code, stdout, stderr = run(capsys, "analyze", str(tmp_path / "nope.jsonl"))
    assert code == 1
    assert stdout == ""
    assert "error" in stderr


def test_malformed_recording_is_data_error(capsys, tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"kind": "header", "session_id": "x"}\nnot json\n', encoding="utf-8")
    code, _, stderr = run(capsys, "analyze", str(bad))
    assert code == 1
    assert "error" in stderr


def test_too_short_recording_is_data_error(capsys, tmp_path, trace_file):
    rec = read_recording(trace_file)
    short = rec.prefix(rec.samples[0].timestamp_us)
    from gazeprompt.gazeio import write_recording

    path = tmp_path / "one.jsonl"
    write_recording(short, path)
    code, _, stderr = run(capsys, "analyze", str(path))
    assert code == 1
    assert "error" in stderr


def test_config_via_environment(trace_file, tmp_path, capsys, monkeypatch):
    config = tmp_path / "svc.json"
    config.write_text(
        json.dumps({"thresholds": {"fixation_duration_ms": 1.0}}), encoding="utf-8"
    )
    monkeypatch.setenv("GAZE_PROMPT_CONFIG", str(config))
    _, stdout, _ = run(capsys, "analyze", str(trace_file), "--json")
    assert json.loads(stdout)["flags"]["long_fixation_duration"] is True
    monkeypatch.setenv("GAZE_PROMPT_CONFIG", str(tmp_path / "missing.json"))
    code, _, stderr = run(capsys, "analyze", str(trace_file))
    assert code == 1
    assert "error" in stderr


def test_explicit_config_beats_environment(trace_file, tmp_path, capsys, monkeypatch):
    lenient = tmp_path / "lenient.json"
    lenient.write_text(json.dumps({"thresholds": {"pupil_dilation_mm": 99.0}}))
    monkeypatch.setenv("GAZE_PROMPT_CONFIG", str(tmp_path / "broken.json"))
    code, stdout, _ = run(
        capsys, "analyze", str(trace_file), "--config", str(lenient), "--json"
    )
    assert code == 0
    assert json.loads(stdout)["flags"]["high_pupil_dilation"] is False


# -------------------------------------------------- replay / serve


def test_replay_dead_target_is_connection_error(trace_file, capsys):
    code, _, stderr = run(
        capsys, "replay", str(trace_file), "--target", "127.0.0.1:9", "--speed", "0"
    )
    assert code == 1
    assert "service error" in stderr


def test_replay_bad_batch_size_is_usage_error(trace_file, capsys):
    code, _, stderr = run(
        capsys, "replay", str(trace_file), "--target", "127.0.0.1:9", "--batch-size", "0"
    )
    assert code == 2
    assert "batch size" in stderr


def test_serve_refuses_taken_port(capsys, tmp_path):
    sock = socket.socket()
    try:
        sock.bind(("127.0.0.1", 0))
        sock.listen(1)
        port = sock.getsockname()[1]
        code, _, stderr = run(capsys, "serve", "--bind", f"127.0.0.1:{port}")
        assert code == 1
        assert "address in use" in stderr
    finally:
        sock.close()
