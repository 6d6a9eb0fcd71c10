import json
import subprocess
import sys

from fomcsim.backtest import bundled_path
from fomcsim.cli import main
from fomcsim.evaluation import MetricsInput, dump_predictions


def test_ingest_ok(capsys):
    assert main(["ingest", "--data-root", str(bundled_path("fomc_2023_2024"))]) == 0
    out = capsys.readouterr().out
    assert "16 meetings" in out and "hikes 25.00%" in out


def test_ingest_bad_tree(tmp_path, capsys):
    (tmp_path / "calendar.csv").write_text("meeting_id,actual_delta_bps\n2023-02-01,30\n")
    assert main(["ingest", "--data-root", str(tmp_path)]) == 1
    assert "calendar.csv:2" in capsys.readouterr().err


def test_cluster_three_points(tmp_path, capsys):
    members = tmp_path / "members.csv"
    members.write_text(
        "name,hawkishness,regional_affiliation,gender,political_party,focus_labor,focus_inflation,"
        "focus_banking,focus_global,tenure_years\n"
        "A,1,Board,F,Democratic,1,0,0,0,2\n"
        "B,3,Dallas,M,Unaffiliated,0,1,0,0,6\n"
        "C,5,New York,F,Unaffiliated,0,0,1,0,14\n")
    out = tmp_path / "personas.json"
    assert main(["cluster", "--members", str(members), "--out", str(out), "--k", "3"]) == 0
    assert "inertia 0" in capsys.readouterr().out
    assert len(json.loads(out.read_text())["personas"]) == 3


def test_cluster_needs_three(tmp_path):
    assert main(["cluster", "--members", str(bundled_path("members.csv")), "--out", str(tmp_path / "p.json"),
                 "--k", "4"]) == 1


def test_score_prints_total_accuracy(tmp_path, capsys):
    actuals = [25] * 16
    heads = [25] * 15 + [0]
    bundle = MetricsInput(votes=[[[h, h, h]] for h in heads], decisions=[[h] for h in heads], actuals=actuals)
    path = tmp_path / "pred.json"
    path.write_text(json.dumps(dump_predictions(bundle)))
    assert main(["score", "--predictions", str(path)]) == 0
    assert "total_accuracy 0.9375" in capsys.readouterr().out


def test_backtest_missing_fixture(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"data_root": str(bundled_path("fomc_2018")), "strategy": "cod",
                               "backend": "scripted"}))
    assert main(["backtest", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "fixture" in capsys.readouterr().err


def test_backtest_and_score_report(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["backtest", "--config", str(bundled_path("configs", "cod_2018.json")), "--out", str(out)]) == 0
    assert "total_accuracy 1" in capsys.readouterr().out
    assert main(["score", "--predictions", str(out / "report.json"), "--json"]) == 0
    scored = json.loads(capsys.readouterr().out)
    assert scored == json.loads((out / "report.json").read_text())["metrics"]


def test_simulate_single_meeting(tmp_path, capsys):
    code = main(["simulate", "--meeting", "2023-02-01", "--strategy", "cod", "--runs", "2", "--seed", "1",
                 "--fixture", str(bundled_path("fixtures", "cod_2023_2024.json")), "--out", str(tmp_path)])
    assert code == 0
    assert "run 1: decision +25" in capsys.readouterr().out
    assert (tmp_path / "2023-02-01" / "cod" / "run1.json").exists()


def test_simulate_runtime_failure(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text("[]")
    assert main(["simulate", "--meeting", "2023-02-01", "--fixture", str(empty)]) == 2


def test_unknown_flag_exit_one():
    proc = subprocess.run([sys.executable, "-m", "fomcsim.cli", "score", "--bogus"], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "usage:" in proc.stderr
