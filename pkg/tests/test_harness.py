import json
import shutil
import subprocess
import sys

import numpy as np
import pytest
import yaml

from sslab.harness import cli, config, report, runner, scenarios
from sslab.harness.tolerances import SCALED_RULES, TOLERANCES, tolerance

MODULES = {"vnalg", "galilei", "cocycle", "qdyn", "extdyn", "maxwell"}

# cheap parameters so every scenario can run inside the unit suite
QUICK = {
    "galilei-group-laws": {"samples": 200},
    "bargmann-cocycle": {"samples": 500},
    "bargmann-witness": {"samples": 200},
    "central-extension": {"samples": 200},
    "mass-obstruction": {"samples": 200},
    "qdyn-composition-phase": {"N": 128, "refine_N": 256},
    "qdyn-mass-sectors": {"N": 128},
    "qdyn-extended-representation": {"N": 128, "N_lam": 32},
    "extdyn-symmetry": {"T": 1.0},
    "extdyn-action-cost": {"T": 1.0},
    "maxwell-constraints": {"radius": 5, "steps": 100},
    "maxwell-charge-operator": {"N": 128},
}


def write_config(path, name, **extra):
    doc = {"scenario": name, "seed": 3, "parameters": QUICK.get(name, {})}
    doc.update(extra)
    path.write_text(yaml.safe_dump(doc))
    return path


class TestConfig:
    def test_defaults_filled(self):
        cfg = config.build({"scenario": "bargmann-witness", "seed": 1})
        assert cfg.parameters == scenarios.get("bargmann-witness").defaults
        assert cfg.csv and cfg.figures

    def test_integer_promoted_to_float(self):
        cfg = config.build({"scenario": "bargmann-witness", "seed": 1, "parameters": {"M": 2}})
        assert cfg.parameters["M"] == 2.0 and isinstance(cfg.parameters["M"], float)

    @pytest.mark.parametrize("raw", [
        [],
        {"seed": 1},
        {"scenario": "nope", "seed": 1},
        {"scenario": "bargmann-witness", "seed": 1, "colour": "red"},
        {"scenario": "bargmann-witness", "seed": 1, "parameters": {"mass": 1.0}},
        {"scenario": "bargmann-witness", "seed": 1, "parameters": {"samples": 1.5}},
        {"scenario": "bargmann-witness", "seed": 1, "parameters": {"M": "heavy"}},
        {"scenario": "bargmann-witness"},
        {"scenario": "bargmann-witness", "seed": -1},
        {"scenario": "bargmann-witness", "seed": True},
        {"scenario": "bargmann-witness", "seed": 1, "tolerances": {"witness.nope": 1.0}},
        {"scenario": "bargmann-witness", "seed": 1, "tolerances": {"witness.gap": -1.0}},
        {"scenario": "bargmann-witness", "seed": 1, "output": {"folder": "x"}},
        {"scenario": "vn-blocks-2-3", "seed": 1, "parameters": {"sizes": 3}},
    ])
    def test_rejected(self, raw):
        with pytest.raises(config.ConfigError):
            config.build(raw)

    def test_seed_optional_for_deterministic_scenario(self):
        assert config.build({"scenario": "vn-dirac-jauch"}).seed is None

    def test_seed_override(self):
        assert config.build({"scenario": "bargmann-witness"}, seed_override=9).seed == 9

    def test_output_priority(self, monkeypatch):
        raw = {"scenario": "vn-dirac-jauch", "output": {"dir": "from-config"}}
        assert str(config.build(raw).out_dir) == "from-config"
        monkeypatch.setenv(config.OUT_ENV, "from-env")
        assert str(config.build(raw).out_dir) == "from-env"
        assert str(config.build(raw, out_override="from-flag").out_dir) == "from-flag"

    def test_yaml_errors(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("scenario: [unclosed\n")
        with pytest.raises(config.ConfigError):
            config.load(bad)
        with pytest.raises(config.ConfigError):
            config.load(tmp_path / "missing.yaml")

    @pytest.mark.parametrize("name", list(scenarios.SCENARIOS))
    def test_example_configs_load(self, name):
        cfg = config.build(yaml.safe_load(config.example_config(name)))
        assert cfg.scenario == name

    def test_shipped_configs_match_examples(self):
        from pathlib import Path
        root = Path(__file__).resolve().parents[1] / "configs"
        shipped = sorted(p.stem for p in root.glob("*.yaml"))
        assert shipped == sorted(scenarios.SCENARIOS)
        for p in root.glob("*.yaml"):
            config.load(p)


class TestTolerances:
    def test_override(self):
        assert tolerance("qdyn.phase") == TOLERANCES["qdyn.phase"]
        assert tolerance("qdyn.phase", {"qdyn.phase": 0.5}) == 0.5

    def test_unknown_id_is_zero(self):
        assert tolerance("nothing.here") == 0.0


class TestEvaluate:
    @pytest.mark.parametrize("rule,measured,expected,tol,passed", [
        ("abs", 1.0005, 1.0, 1e-3, True),
        ("abs", 1.002, 1.0, 1e-3, False),
        ("phase", 2 * np.pi + 0.1, 0.1, 1e-9, True),
        ("phase", np.pi, -np.pi, 1e-9, True),
        ("eq", [2, 3], [2, 3], 0.0, True),
        ("eq", 2, 3, 0.0, False),
        ("ge", 0.5, 0.1, 0.0, True),
        ("ge", 0.05, 0.1, 0.0, False),
        ("floor", 3e-15, 1e-15, 1e-12, True),
        ("floor", 1e-9, 1e-10, 1e-12, False),
        ("abs", float("nan"), 0.0, 1.0, False),
    ])
    def test_rules(self, rule, measured, expected, tol, passed):
        assert report.evaluate("x", "a", measured, expected, rule, tol).passed is passed

    def test_skip_is_recorded(self):
        rec = report.evaluate("x", "a", None, None, "skip", 0.0, note="needs a GPU")
        assert rec.passed is None and rec.note == "needs a GPU"

    def test_scale_applies_to_tolerance_rules_only(self):
        assert report.evaluate("x", "a", 1.5, 1.0, "abs", 1.0, scale=0.1).passed is False
        assert report.evaluate("x", "a", 0.2, 0.1, "ge", 0.0, scale=0.1).passed is True
        assert set(SCALED_RULES) == {"abs", "phase", "floor"}

    def test_unknown_rule(self):
        with pytest.raises(ValueError):
            report.evaluate("x", "a", 1, 1, "approx", 0.0)


def sample_records():
    return [report.evaluate("a.one", "anchor one", 0.1 + 0.2, 0.3, "abs", 1e-12),
            report.evaluate("a.two", "anchor two", [1, 2], [1, 2], "eq", 0.0),
            report.evaluate("a.three", "anchor three", True, True, "eq", 0.0, note="flag"),
            report.evaluate("a.four", "anchor four", 1.0, 1.0, "abs", 0.0)]


class TestReport:
    def test_round_trip(self, tmp_path):
        recs = sample_records()
        path = report.emit_report(recs, tmp_path / "r.jsonl", header={"seed": 1})
        header, back = report.read_report(path)
        assert header == {"seed": 1}
        assert [r.to_dict() for r in back] == [r.to_dict() for r in recs]

    def test_float_keeps_type_and_precision(self):
        line = report.encode_line({"x": 1.0, "y": 0.1 + 0.2, "n": 2})
        obj = json.loads(line)
        assert isinstance(obj["x"], float) and obj["y"] == 0.1 + 0.2 and isinstance(obj["n"], int)
        assert "0.30000000000000004" in line

    def test_key_order_is_fixed(self, tmp_path):
        path = report.emit_report(sample_records(), tmp_path / "r.jsonl")
        lines = path.read_text().splitlines()
        keys = list(json.loads(lines[1]).keys())
        assert keys == ["kind", *report.RECORD_KEYS]

    def test_empty_records_rejected(self, tmp_path):
        with pytest.raises(report.ReportError):
            report.emit_report([], tmp_path / "r.jsonl")
        assert not (tmp_path / "r.jsonl").exists()

    def test_csv_single_header(self, tmp_path):
        path = report.emit_report(sample_records(), tmp_path / "r.csv", format="csv")
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(report.CSV_KEYS)
        assert sum(line.startswith("check_id") for line in lines) == 1
        assert len(lines) == 1 + len(sample_records())

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            report.emit_report(sample_records(), tmp_path / "r", format="xml")

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(OSError):
            report.emit_report(sample_records(), tmp_path / "no" / "such" / "r.jsonl")


class TestCatalog:
    def test_size_and_coverage(self):
        cat = scenarios.list_scenarios()
        assert len(cat) >= 10
        assert {s.module for s in cat} == MODULES

    def test_every_entry_has_anchor(self):
        for s in scenarios.list_scenarios():
            assert s.anchor.strip() and s.description.strip()

    def test_stable_order(self, capsys):
        cli.main(["list"])
        first = capsys.readouterr().out
        cli.main(["list"])
        assert capsys.readouterr().out == first
        names = [line.split()[0] for line in first.splitlines() if not line.startswith(" ")]
        assert names == list(scenarios.SCENARIOS)


@pytest.mark.parametrize("name", list(scenarios.SCENARIOS))
def test_every_scenario_passes_at_quick_settings(name):
    cfg = config.build({"scenario": name, "seed": 3, "parameters": QUICK.get(name, {})})
    records, outcome, _ = runner.execute(cfg)
    failed = [(r.check_id, r.measured, r.expected) for r in records if r.passed is False]
    assert not failed
    assert all(r.check_id in TOLERANCES or r.rule in ("eq", "ge") for r in records)


class TestRun:
    def test_witness(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "w.yaml", "bargmann-witness")
        code = cli.main(["run", str(cfg), "--out", str(tmp_path / "out")])
        assert code == runner.EXIT_OK
        art = json.loads((tmp_path / "out" / "witness.json").read_text())
        assert art["gap"] == 1.0
        _, recs = report.read_report(tmp_path / "out" / runner.REPORT_NAME)
        gap = next(r for r in recs if r.check_id == "witness.gap")
        assert gap.measured == 1.0 and gap.passed
        assert "PASS witness.gap" in capsys.readouterr().out

    def test_blocks_report_two_sectors(self, tmp_path):
        cfg = write_config(tmp_path / "b.yaml", "vn-blocks-2-3")
        assert cli.main(["run", str(cfg), "--out", str(tmp_path / "out")]) == runner.EXIT_OK
        _, recs = report.read_report(tmp_path / "out" / runner.REPORT_NAME)
        rec = {r.check_id: r for r in recs}
        assert rec["vn.sector_count"].measured == 2
        assert rec["vn.multiplicities"].measured == [2, 3]

    def test_malformed_config_writes_nothing(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("scenario: bargmann-witness\nseed: 1\nbogus: 2\n")
        out = tmp_path / "out"
        assert cli.main(["run", str(bad), "--out", str(out)]) == runner.EXIT_CONFIG
        assert not out.exists()

    def test_failure_exit_code(self, tmp_path):
        cfg = write_config(tmp_path / "c.yaml", "bargmann-cocycle")
        out = tmp_path / "out"
        assert cli.main(["run", str(cfg), "--out", str(out), "--tolerance-scale", "1e-12"]) == runner.EXIT_FAIL
        _, recs = report.read_report(out / runner.REPORT_NAME)
        assert any(r.passed is False for r in recs)

    def test_tolerance_override_can_fail(self, tmp_path):
        cfg = write_config(tmp_path / "c.yaml", "maxwell-charge-operator",
                           tolerances={"charge.commutator": 0.0})
        assert cli.main(["run", str(cfg), "--out", str(tmp_path / "o")]) == runner.EXIT_FAIL

    def test_runtime_error_exit_code(self, tmp_path, monkeypatch):
        def boom(p, seed):
            raise RuntimeError("solver exploded")
        sc = scenarios.SCENARIOS["bargmann-witness"]
        monkeypatch.setitem(scenarios.SCENARIOS, "bargmann-witness",
                            scenarios.Scenario(sc.name, sc.module, sc.description, sc.anchor,
                                               sc.defaults, boom))
        cfg = write_config(tmp_path / "w.yaml", "bargmann-witness")
        assert cli.main(["run", str(cfg), "--out", str(tmp_path / "o")]) == runner.EXIT_RUNTIME

    def test_bad_scale(self, tmp_path):
        cfg = write_config(tmp_path / "w.yaml", "bargmann-witness")
        assert cli.main(["run", str(cfg), "--tolerance-scale", "0"]) == runner.EXIT_CONFIG

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(tmp_path / "e.yaml", "extdyn-symmetry")
        for d in ("a", "b"):
            assert cli.main(["run", str(cfg), "--out", str(tmp_path / d)]) == runner.EXIT_OK
        for name in (runner.REPORT_NAME, "checks.csv", "symmetry_scaling.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_seed_changes_report(self, tmp_path):
        cfg = write_config(tmp_path / "g.yaml", "galilei-group-laws")
        cli.main(["run", str(cfg), "--out", str(tmp_path / "a"), "--seed", "1"])
        cli.main(["run", str(cfg), "--out", str(tmp_path / "b"), "--seed", "2"])
        ha, _ = report.read_report(tmp_path / "a" / runner.REPORT_NAME)
        hb, _ = report.read_report(tmp_path / "b" / runner.REPORT_NAME)
        assert (ha["seed"], hb["seed"]) == (1, 2)

    def test_figures_and_series(self, tmp_path):
        cfg = write_config(tmp_path / "m.yaml", "maxwell-constraints")
        out = tmp_path / "out"
        assert cli.main(["run", str(cfg), "--out", str(out)]) == runner.EXIT_OK
        for name in ("maxwell_history", "lambda_rate"):
            assert (out / f"{name}.csv").exists()
            assert (out / f"{name}.png").read_bytes()[:4] == b"\x89PNG"
        timings = json.loads((out / runner.TIMINGS_NAME).read_text())
        assert "total_seconds" in timings

    def test_figures_disabled(self, tmp_path):
        cfg = write_config(tmp_path / "e.yaml", "extdyn-symmetry",
                           output={"csv": False, "figures": False})
        out = tmp_path / "out"
        cli.main(["run", str(cfg), "--out", str(out)])
        assert not list(out.glob("*.png")) and not (out / "symmetry_scaling.csv").exists()

    def test_parallel_runs_isolated(self, tmp_path):
        a = write_config(tmp_path / "a.yaml", "bargmann-witness")
        b = write_config(tmp_path / "b.yaml", "vn-blocks-2-3")
        out = tmp_path / "out"
        assert cli.main(["run", str(a), str(b), "--out", str(out), "--jobs", "2"]) == runner.EXIT_OK
        assert (out / "bargmann-witness" / runner.REPORT_NAME).exists()
        assert (out / "vn-blocks-2-3" / runner.REPORT_NAME).exists()


class TestDescribe:
    def test_known(self, capsys):
        assert cli.main(["describe", "maxwell-constraints"]) == runner.EXIT_OK
        out = capsys.readouterr().out
        assert "anchor:" in out and "maxwell.gauss_drift" in out and "scenario: maxwell-constraints" in out

    def test_unknown(self, capsys):
        assert cli.main(["describe", "nope"]) == runner.EXIT_CONFIG
        assert "unknown scenario" in capsys.readouterr().err

    def test_bad_arguments(self, capsys):
        assert cli.main(["frobnicate"]) == runner.EXIT_CONFIG
        assert cli.main(["run"]) == runner.EXIT_CONFIG


@pytest.mark.skipif(shutil.which("sslab") is None, reason="console script not installed")
def test_console_script(tmp_path):
    out = subprocess.run(["sslab", "list"], capture_output=True, text=True, check=True).stdout
    assert "bargmann-witness" in out


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "sslab.harness.cli", "list"],
                         capture_output=True, text=True, check=True).stdout
    assert "maxwell-center-demo" in out
