"""Tests for the kstab-verify command line."""

import json

from typer.testing import CliRunner

from cli import app, main

runner = CliRunner()


def test_run_all_with_filter(tmp_path):
    json_path = tmp_path / "report.json"
    md_path = tmp_path / "report.md"
    result = runner.invoke(app, ["run-all", "--filter", "thresholds", "--json", str(json_path), "--md", str(md_path)])
    assert result.exit_code == 0, result.output
    assert "6/6 cases pass" in result.output
    assert json.loads(json_path.read_text(encoding="utf-8"))["summary"]["total"] == 6
    assert md_path.exists()


def test_single_case():
    result = runner.invoke(app, ["case", "sx-E"])
    assert result.exit_code == 0, result.output
    assert "161/540" in result.output


def test_dump_chambers():
    result = runner.invoke(app, ["case", "prop-l12-total", "--dump-chambers"])
    assert result.exit_code == 0, result.output
    assert "pseff limit 5/2" in result.output


def test_curve_classification():
    result = runner.invoke(app, ["curve", "--lambda", "2"])
    assert result.exit_code == 0, result.output
    assert "SmoothFourBranch" in result.output
    result = runner.invoke(app, ["curve", "--lambda=-1"])
    assert "SingularCurve" in result.output


def test_failing_scenario_exit_code(tmp_path):
    from config import DEFAULT_SCENARIO

    raw = json.loads(DEFAULT_SCENARIO.read_text(encoding="utf-8"))
    for case in raw["expected"]:
        if case["id"] == "nef-E":
            case["value"] = "1/2"
    path = tmp_path / "wrong.json"
    path.write_text(json.dumps(raw), encoding="utf-8")
    result = runner.invoke(app, ["scenario", str(path), "run-all", "--filter", "thresholds"])
    assert result.exit_code == 1
    assert "nef-E" in result.output


def test_usage_errors(tmp_path):
    assert main(["curve", "--lambda", "0.5"]) == 3
    assert main(["case", "no-such-case"]) == 3
    assert main(["no-such-command"]) == 3
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    assert main(["run-all", "--scenario", str(broken)]) == 3
    assert main(["run-all", "--scenario", str(tmp_path / "missing.json")]) == 3
    assert main(["scenario", str(broken), "explode"]) == 3


def test_main_returns_zero_on_success():
    assert main(["curve", "--lambda", "5/7"]) == 0


def test_save_uses_the_output_directory(tmp_path, monkeypatch):
    from config import settings

    monkeypatch.setattr(settings, "output_dir", tmp_path / "out")
    result = runner.invoke(app, ["run-all", "--filter", "thresholds", "--save"])
    assert result.exit_code == 0, result.output
    assert json.loads((tmp_path / "out" / "report.json").read_text(encoding="utf-8"))["summary"]["pass"] == 6
    assert (tmp_path / "out" / "report.md").exists()
