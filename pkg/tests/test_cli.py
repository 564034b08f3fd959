"""CLI contract: exit codes, analyze outputs, calibrate, fixture regeneration."""

from __future__ import annotations

import csv
import json
import os
import socket
import subprocess
import sys
import time
import urllib.request

import pytest
from click.testing import CliRunner

from eegate.analytics import merge_profiles, profiles_from_records, SectionProfile
from eegate.cli import cli
from eegate.config import load_config_file, save_config_file, GatewayConfig, SourceSpec
from eegate.fixtures import write_all
from eegate.session import (
    Segment,
    SessionRecord,
    SynthScenario,
    read_session_file,
    save_scenario,
    write_session_file,
)

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def run_cli(*args, **kwargs):
    return subprocess.run(
        [sys.executable, "-m", "eegate.cli", *args],
        capture_output=True,
        text=True,
        timeout=60,
        **kwargs,
    )


# --- exit codes -------------------------------------------------------------------

def test_usage_error_exits_1():
    result = run_cli("analyze")
    assert result.returncode == 1
    assert "error" in result.stderr.lower()


def test_unknown_source_kind_exits_1():
    result = run_cli("calibrate", "--source", "telepathy:foo")
    assert result.returncode == 2 or result.returncode == 1


def test_run_on_busy_port_exits_2(tmp_path):
    scenario = tmp_path / "s.json"
    save_scenario(str(scenario), SynthScenario(seed=1, segments=(Segment(1000, 50, 0),)))
    with socket.socket() as blocker:
        blocker.bind(("127.0.0.1", 0))
        blocker.listen(1)
        port = blocker.getsockname()[1]
        result = run_cli(
            "run", "--source", f"synth:{scenario}", "--port", str(port)
        )
    assert result.returncode == 2
    assert "bind" in result.stderr


def test_run_with_missing_source_file_fails(tmp_path):
    result = run_cli("run", "--source", f"replay:{tmp_path}/nope.session")
    assert result.returncode == 2
    assert "not found" in result.stderr


# --- analyze ----------------------------------------------------------------------

def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_analyze_fixture_peaks_mid_page(tmp_path):
    out_profile = tmp_path / "profile.json"
    out_csv = tmp_path / "profile.csv"
    runner = CliRunner()
    result = runner.invoke(
        cli,
        [
            "analyze",
            os.path.join(FIXTURES, "fig6_page_scan.session"),
            "--out-profile",
            str(out_profile),
            "--out-csv",
            str(out_csv),
        ],
    )
    assert result.exit_code == 0, result.output
    header, rows = read_csv(out_csv)
    assert header == ["page_id", "scroll_pct_bucket", "mean", "count", "max"]
    means = {int(r[1]): float(r[2]) for r in rows if r[2]}
    peak_bucket = max(means, key=means.get)
    assert 7 <= peak_bucket <= 12  # attention concentrates mid-page
    profile_obj = json.loads(out_profile.read_text())
    assert profile_obj["profiles"][0]["page_id"] == "wiki-home"


def test_analyze_two_sessions_equals_merge_of_individuals(tmp_path):
    base, _ = read_session_file(os.path.join(FIXTURES, "fig6_page_scan.session"))
    half1 = [r for r in base if r.t_ms < 30_000]  # two "users" covering different spans
    half2 = [r for r in base if r.t_ms >= 30_000]
    s1, s2 = tmp_path / "a.session", tmp_path / "b.session"
    write_session_file(str(s1), half1)
    write_session_file(str(s2), half2)

    runner = CliRunner()
    out_profile = tmp_path / "merged.json"
    result = runner.invoke(
        cli,
        ["analyze", str(s1), str(s2), "--out-profile", str(out_profile),
         "--out-csv", str(tmp_path / "merged.csv")],
    )
    assert result.exit_code == 0, result.output
    merged_obj = json.loads(out_profile.read_text())["profiles"][0]

    p1, _ = profiles_from_records(half1, 20)
    p2, _ = profiles_from_records(half2, 20)
    expected = merge_profiles([p1[0], p2[0]])
    got = SectionProfile.from_json_obj(merged_obj)
    assert got.page_id == expected.page_id
    for g, e in zip(got.buckets, expected.buckets):
        assert g.count == e.count and g.max == e.max
        if e.mean is None:
            assert g.mean is None
        else:
            assert g.mean == pytest.approx(e.mean, abs=1e-9)


def test_analyze_empty_session_warns_and_writes_header_only(tmp_path):
    empty = tmp_path / "empty.session"
    empty.write_text("")
    out_csv = tmp_path / "p.csv"
    runner = CliRunner()
    result = runner.invoke(
        cli,
        ["analyze", str(empty), "--out-profile", str(tmp_path / "p.json"),
         "--out-csv", str(out_csv)],
    )
    assert result.exit_code == 0
    header, rows = read_csv(out_csv)
    assert rows == []  # no joinable samples, no CSV rows


def test_analyze_deterministic_across_runs(tmp_path):
    runner = CliRunner()
    outs = []
    for i in range(2):
        out_csv = tmp_path / f"run{i}.csv"
        result = runner.invoke(
            cli,
            ["analyze", os.path.join(FIXTURES, "fig6_page_scan.session"),
             "--out-profile", str(tmp_path / f"run{i}.json"), "--out-csv", str(out_csv)],
        )
        assert result.exit_code == 0
        outs.append(out_csv.read_bytes())
    assert outs[0] == outs[1]


# --- calibrate ---------------------------------------------------------------------

def test_calibrate_constant_synth_source(tmp_path):
    scenario = tmp_path / "constant.json"
    save_scenario(
        str(scenario), SynthScenario(seed=5, segments=(Segment(25_000, 50, 0),))
    )
    runner = CliRunner()
    result = runner.invoke(cli, ["calibrate", "--source", f"synth:{scenario}", "--duration-s", "20"])
    assert result.exit_code == 0
    assert "threshold: 50" in result.output


def test_calibrate_empty_source_defaults_to_30(tmp_path):
    session = tmp_path / "empty.session"
    session.write_text("")
    runner = CliRunner()
    result = runner.invoke(cli, ["calibrate", "--source", f"replay:{session}"])
    assert result.exit_code == 0
    assert "threshold: 30" in result.output


def test_calibrate_writes_threshold_into_config(tmp_path):
    scenario = tmp_path / "c.json"
    save_scenario(str(scenario), SynthScenario(seed=5, segments=(Segment(25_000, 64, 0),)))
    config_path = tmp_path / "gateway.json"
    save_config_file(str(config_path), GatewayConfig(source=SourceSpec.parse(f"synth:{scenario}")))
    runner = CliRunner()
    result = runner.invoke(
        cli, ["calibrate", "--source", f"synth:{scenario}", "--config", str(config_path)]
    )
    assert result.exit_code == 0, result.output
    assert load_config_file(str(config_path)).events_config.attention_threshold == 64


def test_calibrate_respects_duration_window(tmp_path):
    # first 10 s at 80, then 30 s at 20: a 10 s window sees only the 80s
    scenario = tmp_path / "two.json"
    save_scenario(
        str(scenario),
        SynthScenario(seed=5, segments=(Segment(10_000, 80, 0), Segment(30_000, 20, 0))),
    )
    runner = CliRunner()
    result = runner.invoke(cli, ["calibrate", "--source", f"synth:{scenario}", "--duration-s", "9"])
    assert result.exit_code == 0
    assert "threshold: 80" in result.output


# --- fixtures ----------------------------------------------------------------------

def test_committed_fixtures_are_fresh_and_deterministic(tmp_path):
    regen = tmp_path / "fixtures"
    written = write_all(str(regen))
    assert written
    for path in written:
        rel = os.path.relpath(path, regen)
        committed = os.path.join(FIXTURES, rel)
        with open(path, "rb") as a, open(committed, "rb") as b:
            assert a.read() == b.read(), f"fixture drift: {rel}"


# --- run (end to end) -----------------------------------------------------------------

def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_run_records_synth_session_end_to_end(tmp_path):
    scenario = tmp_path / "reading.json"
    save_scenario(
        str(scenario), SynthScenario(seed=11, segments=(Segment(10_000, 55, 5),))
    )
    record = tmp_path / "out.session"
    port = free_port()
    proc = subprocess.Popen(
        [
            sys.executable, "-m", "eegate.cli", "run",
            "--source", f"synth:{scenario}@1000",
            "--record", str(record),
            "--port", str(port),
            "--virtual-clock",
        ],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        text=True,
    )
    try:
        deadline = time.monotonic() + 20
        ended = False
        while time.monotonic() < deadline:
            try:
                with urllib.request.urlopen(
                    f"http://127.0.0.1:{port}/api/health", timeout=1
                ) as resp:
                    health = json.load(resp)
                if health["sourceEnded"]:
                    ended = True
                    break
            except OSError:
                pass
            time.sleep(0.2)
        assert ended, "gateway never finished the synth replay"
    finally:
        proc.terminate()
        proc.wait(timeout=10)

    records, diags = read_session_file(str(record))
    assert diags == []
    attention = [r for r in records if r.kind == "attention"]
    assert len(attention) == 10  # 10 s of 1 Hz samples
    times = [r.t_ms for r in attention]
    assert times == sorted(times)
