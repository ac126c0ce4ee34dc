import json

import pytest

from ltlab import cli, runner


def write_config(tmp_path, scenarios, name="config.json"):
    path = tmp_path / name
    path.write_text(
        json.dumps({"schema_version": 1, "suite": "unit", "scenarios": scenarios})
    )
    return path


CLOSED_FORMS = {
    "name": "closed-forms",
    "audits": ["classical-constants", "product-identity", "lifting-identity"],
}


def test_validate_config_field_messages():
    with pytest.raises(runner.ConfigError, match="config: expected"):
        runner.validate_config([])
    with pytest.raises(runner.ConfigError, match="schema_version"):
        runner.validate_config({"schema_version": 99, "scenarios": []})
    with pytest.raises(runner.ConfigError, match="scenarios: expected a list"):
        runner.validate_config({"schema_version": 1, "scenarios": "x"})

    def check(scenarios, message):
        with pytest.raises(runner.ConfigError, match=message):
            runner.validate_config({"schema_version": 1, "scenarios": scenarios})

    check([{"audits": ["cauchy-kernel"]}], r"scenarios\[0\].name")
    check(
        [
            {"name": "a", "audits": ["cauchy-kernel"]},
            {"name": "a", "audits": ["cauchy-kernel"]},
        ],
        r"scenarios\[1\].name: duplicate",
    )
    check([{"name": "a", "audits": []}], "nonempty list")
    check([{"name": "a", "audits": ["bogus-tag"]}], "unknown audit tag 'bogus-tag'")
    check(
        [{"name": "a", "audits": ["sharp-half"]}],
        "'sharp-half' needs a potential",
    )
    check(
        [
            {
                "name": "a",
                "audits": ["sharp-half"],
                "potential": {"family": "random-smooth", "parameters": {"matrix_dim": 2}},
            }
        ],
        "needs an explicit seed",
    )
    check(
        [
            {
                "name": "a",
                "audits": ["cauchy-kernel"],
                "grid": {"step": 0.1},
            }
        ],
        "grid: unknown key 'step'",
    )
    check(
        [
            {
                "name": "a",
                "audits": ["cauchy-kernel"],
                "tolerances": {"cauchy-kernel": 0.0},
            }
        ],
        "positive number",
    )


def test_run_config_writes_outputs(tmp_path):
    cfg = write_config(tmp_path, [CLOSED_FORMS])
    out = tmp_path / "out"
    manifest = runner.run_config(cfg, out_dir=out)
    assert manifest["global_pass"] is True
    assert manifest["suite"] == "unit"
    assert len(manifest["scenarios"]) == 1
    assert manifest["scenarios"][0]["error"] is None
    assert len(manifest["scenarios"][0]["reports"]) > 0

    stored = json.loads((out / "manifest.json").read_text())
    assert stored == manifest
    csv_text = (out / "summary.csv").read_text()
    header = csv_text.splitlines()[0]
    assert header == "scenario,audit_tag,paper_ref,gamma,d,lhs,rhs,ratio,tolerance,pass"


def test_failing_scenario_is_isolated(tmp_path):
    bad = {
        "name": "bad-sweep",
        "audits": ["sharp-half-sweep"],
        "options": {"integral": 2.0, "widths": [0.3]},
    }
    cfg = write_config(tmp_path, [bad, CLOSED_FORMS])
    manifest = runner.run_config(cfg)
    assert manifest["global_pass"] is False
    first, second = manifest["scenarios"]
    assert first["name"] == "bad-sweep"
    assert first["error"].startswith("ValueError:")
    assert second["error"] is None
    assert len(second["reports"]) > 0


def test_manifest_is_deterministic(tmp_path):
    cfg = write_config(tmp_path, [CLOSED_FORMS])
    one = runner.run_config(cfg)
    two = runner.run_config(cfg)
    parallel = runner.run_config(cfg, jobs=2)
    frozen = runner.render_manifest(runner.strip_timing(one))
    assert runner.render_manifest(runner.strip_timing(two)) == frozen
    assert runner.render_manifest(runner.strip_timing(parallel)) == frozen


def test_strip_timing_is_recursive():
    nested = {"a": [{"wall_time_s": 1.0, "x": 2}], "wall_time_s": 3.0}
    assert runner.strip_timing(nested) == {"a": [{"x": 2}]}


def test_report_formats(tmp_path):
    cfg = write_config(tmp_path, [CLOSED_FORMS])
    manifest = runner.run_config(cfg)
    md = runner.render_report(manifest, "md")
    assert "# Audit summary: unit" in md
    assert "## Semiclassical constants" in md
    assert "| closed-forms |" in md
    back = json.loads(runner.render_report(manifest, "json"))
    assert back == manifest
    csv_text = runner.render_report(manifest, "csv")
    assert csv_text.splitlines()[0].split(",") == runner.CSV_COLUMNS
    with pytest.raises(ValueError, match="format"):
        runner.render_report(manifest, "xml")


def test_markdown_marks_inconclusive_rows():
    manifest = {
        "suite": "unit",
        "tool_version": "0",
        "config_digest": "d",
        "global_pass": True,
        "scenarios": [
            {
                "name": "s",
                "error": None,
                "reports": [
                    {
                        "audit_tag": "lifting-2d",
                        "citation": "identity:dimension-lifting",
                        "gamma": 1.0,
                        "d": 2,
                        "lhs": 1.0,
                        "rhs": 2.0,
                        "ratio": 0.5,
                        "tolerance": 1e-9,
                        "passed": False,
                        "inconclusive": True,
                    }
                ],
            }
        ],
    }
    md = runner.manifest_to_markdown(manifest)
    assert "inconclusive" in md
    csv_text = runner.manifest_to_csv(manifest)
    assert csv_text.strip().splitlines()[1].endswith("inconclusive")


def test_cli_run_and_report(tmp_path, capsys):
    cfg = write_config(tmp_path, [CLOSED_FORMS])
    out = tmp_path / "cli-out"
    code = cli.main(["run", "--config", str(cfg), "--out", str(out)])
    captured = capsys.readouterr()
    assert code == 0
    assert "global pass = True" in captured.out

    code = cli.main(["report", "--manifest", str(out / "manifest.json"), "--format", "csv"])
    captured = capsys.readouterr()
    assert code == 0
    assert captured.out.startswith("scenario,audit_tag")

    code = cli.main(["report", "--manifest", str(tmp_path / "missing.json"), "--format", "md"])
    assert code == 2

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert cli.main(["report", "--manifest", str(broken), "--format", "md"]) == 2

    payload = tmp_path / "noscenarios.json"
    payload.write_text("{}")
    assert cli.main(["report", "--manifest", str(payload), "--format", "md"]) == 2


def test_cli_failing_suite_returns_one(tmp_path, capsys):
    bad = {
        "name": "bad-sweep",
        "audits": ["sharp-half-sweep"],
        "options": {"integral": 2.0, "widths": [0.3]},
    }
    cfg = write_config(tmp_path, [bad])
    code = cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    captured = capsys.readouterr()
    assert code == 1
    assert "scenario error: bad-sweep" in captured.err


def test_cli_config_error_returns_two(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"schema_version": 99, "scenarios": []}))
    code = cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    captured = capsys.readouterr()
    assert code == 2
    assert "config error" in captured.err