import json

import pytest

from fomcsim.backtest import (BacktestConfig, ConfigError, bundled_path, emit_report, predictions_from_report,
                              render_markdown, report_json, run_backtest)
from fomcsim.evaluation import compute_metrics
from fomcsim.gateway import RecordingBackend, ScriptedBackend
from fomcsim.scripting import MeetingPlan, build_fixture, consensus_runs, write_fixture

DATA = bundled_path("fomc_2023_2024")
FIXTURE = bundled_path("fixtures", "cod_2023_2024.json")
PERSONAS = bundled_path("personas.json")


def config(**kw):
    base = dict(data_root=DATA, strategy="cod", fixture=FIXTURE, personas=PERSONAS, seed=3)
    base.update(kw)
    return BacktestConfig(**base)


def test_config_invariants():
    with pytest.raises(ConfigError, match="fixture"):
        BacktestConfig(data_root=DATA, backend="scripted")
    with pytest.raises(ConfigError):
        config(strategy="magic")
    with pytest.raises(ConfigError):
        config(runs_per_meeting=0)
    with pytest.raises(ConfigError, match="precede"):
        run_backtest(config(strategy="icl", warmup_meetings=("2023-03-22",)))


def test_config_file_resolves_relative_paths(tmp_path):
    cfg = BacktestConfig.from_file(bundled_path("configs", "cod_2023_2024.json"))
    assert cfg.fixture == bundled_path("configs") / "../fixtures/cod_2023_2024.json"
    assert cfg.fixture.exists()
    bad = tmp_path / "c.json"
    bad.write_text(json.dumps({"data_root": ".", "strategy": "cod", "bogus": 1, "fixture": "x"}))
    with pytest.raises(ConfigError, match="bogus"):
        BacktestConfig.from_file(bad)


def test_report_shape_and_completeness():
    report = run_backtest(config(meetings=("2023-02-01", "2024-09-18")))
    assert [r.meeting_id for r in report.rows] == ["2023-02-01", "2024-09-18"]
    for row in report.rows:
        assert len(row.decisions) == 5
    assert report.metrics.total_accuracy == 0.5
    data = json.loads(report_json(report))
    assert data["report_schema_version"] == 1
    assert data["reference"]["note"] == "published values, not recomputed"


def test_single_run_stability_is_one():
    report = run_backtest(config(runs_per_meeting=1, meetings=("2023-02-01", "2023-06-14")))
    assert report.metrics.voting_stability == 1.0


def test_emit_is_byte_stable(tmp_path):
    report = run_backtest(config(meetings=("2023-02-01",)))
    emit_report(report, tmp_path / "a")
    emit_report(report, tmp_path / "b")
    for name in ("report.json", "report.md", "runs/2023-02-01/cod/run0.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    md = (tmp_path / "a" / "report.md").read_text()
    assert "| Meeting Date | Actual | Predicted |" in md and "| 2023-02-01 | 0.25% | 0.25% |" in md


def _plans_with_failures(tmp_path):
    plans = [MeetingPlan("2023-02-01", {25: 1.0}, (0, 25, 50), consensus_runs("neutral", 3), actual=25),
             MeetingPlan("2023-03-22", {25: 1.0}, (0, 25, 50), consensus_runs("neutral", 3), actual=25)]
    entries = build_fixture(plans, style="plain")
    # one failed run at the first meeting, two at the second (unevaluable)
    drop = {("2023-02-01", 1), ("2023-03-22", 0), ("2023-03-22", 2)}
    entries = [e for e in entries if not (e["stage"] == "statement" and (e["meeting_id"], e["run_index"]) in drop)]
    path = tmp_path / "fixture.json"
    write_fixture(path, entries)
    return path


def test_failed_runs_listed_and_excluded(tmp_path, caplog):
    fixture = _plans_with_failures(tmp_path)
    report = run_backtest(config(strategy="baseline", fixture=fixture, runs_per_meeting=3,
                                 meetings=("2023-02-01", "2023-03-22")))
    failed = {(f["meeting_id"], f["run_index"]) for f in report.failed_runs}
    assert failed == {("2023-02-01", 1), ("2023-03-22", 0), ("2023-03-22", 2)}
    row1, row2 = report.rows
    assert row1.evaluable and row1.decisions == (25, None, 25)
    assert not row2.evaluable and row2.headline is None
    assert report.metrics.n_meetings == 1
    # every (meeting, run) pair is either successful or failed, exactly once
    ok = {(r.meeting_id, j) for r in report.rows for j, d in enumerate(r.decisions) if d is not None}
    assert ok.isdisjoint(failed) and len(ok | failed) == 6
    md = render_markdown(report)
    assert "## Failed runs" in md and "unevaluable" in md
    assert "unevaluable" in caplog.text


def test_score_self_consistency():
    report = run_backtest(config(meetings=("2023-02-01", "2023-06-14", "2024-09-18")))
    rebuilt = compute_metrics(predictions_from_report(json.loads(report_json(report))))
    assert rebuilt == report.metrics


def test_icl_backtest_uses_frozen_memory(tmp_path):
    cfg = config(strategy="icl", fixture=bundled_path("fixtures", "plain_2023_2024.json"),
                 meetings=("2023-02-01",), runs_per_meeting=2)
    rec = RecordingBackend(ScriptedBackend.from_file(cfg.fixture))
    report = run_backtest(cfg, backend=rec)
    assert report.memory is not None and report.memory.frozen and len(report.memory) == 9
    analysis = [r.prompt_text for r, _ in rec.calls
                if r.tag.stage == "member_analysis" and r.tag.meeting_id == "2023-02-01"]
    assert len(analysis) == 6 and all("Lessons from your past" in t for t in analysis)
    emit_report(report, tmp_path)
    assert (tmp_path / "memory.json").exists()
