"""Tests for the scenario runner and CLI: config handling, report files,
determinism, and parallel/serial equivalence."""
from __future__ import annotations

import json

import pytest

from quasidiff.cli import main, reference_config_path
from quasidiff.scenarios import ConfigError, Scenario, load_config, \
    run_scenario, run_scenarios


def write_config(path, scenarios):
    path.write_text(json.dumps({"scenarios": scenarios}))


SMALL_SUITE = [
    {"name": "cert", "kind": "CertificateVerify", "seed": 1,
     "params": {"points_per_delta": 50}},
    {"name": "cones", "kind": "ConeDuality", "seed": 2,
     "params": {"pairs": 40}},
    {"name": "probe", "kind": "OpenMappingProbe", "seed": 3,
     "params": {"map": "fold_sum", "x_bar": [0.0, 0.0], "y_bar": [0.0],
                "lambda_generators": [[[1.0, -1.0]], [[1.0, 1.0]]],
                "a": 0.1, "beta": 2.0, "target_grid": 5,
                "domain_samples": 4000}},
]


class TestConfig:
    def test_duplicate_names_rejected(self, tmp_path):
        cfg = tmp_path / "c.json"
        write_config(cfg, [SMALL_SUITE[0], SMALL_SUITE[0]])
        with pytest.raises(ConfigError):
            load_config(cfg)

    def test_bad_json_rejected(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text("{nope")
        with pytest.raises(ConfigError):
            load_config(cfg)

    def test_unknown_kind_raises_config_error(self):
        with pytest.raises(ConfigError):
            run_scenario(Scenario("x", "NoSuchKind"))

    def test_unknown_catalog_key_named(self):
        with pytest.raises(ConfigError) as err:
            run_scenario(Scenario("x", "CertificateVerify",
                                  {"certificate": "mystery"}))
        assert "mystery" in str(err.value)


class TestRunScenarios:
    def test_small_suite_passes(self, tmp_path):
        cfg = tmp_path / "c.json"
        write_config(cfg, SMALL_SUITE)
        status = run_scenarios(cfg, tmp_path / "out")
        assert status == 0
        summary = (tmp_path / "out" / "summary.csv").read_text()
        assert summary.count("PASS") == 3
        for sc in SMALL_SUITE:
            report = json.loads(
                (tmp_path / "out" / f"{sc['name']}.json").read_text())
            assert report["verdict"] == "PASS"

    def test_failing_scenario_nonzero_exit(self, tmp_path):
        cfg = tmp_path / "c.json"
        write_config(cfg, [{
            "name": "bad", "kind": "CertificateVerify", "seed": 1,
            "params": {"lambda_generators": [[[-0.5]], [[1.0]]],
                       "points_per_delta": 50}}])
        status = run_scenarios(cfg, tmp_path / "out")
        assert status == 1
        report = json.loads((tmp_path / "out" / "bad.json").read_text())
        assert report["verdict"] == "FAIL"
        assert report["report"]["worst_violations"]

    def test_runtime_error_captured_as_failed(self, tmp_path):
        cfg = tmp_path / "c.json"
        write_config(cfg, [
            {"name": "boom", "kind": "ClarkeEstimate", "seed": 1,
             "params": {"map": "abs1d", "x_bar": [0.0], "radius": 1e-12,
                        "samples": 10,
                        "expected_generators": [[[1.0]]]}},
            SMALL_SUITE[1]])
        status = run_scenarios(cfg, tmp_path / "out")
        assert status == 1  # FAILED scenario, but the run completed
        report = json.loads((tmp_path / "out" / "boom.json").read_text())
        assert report["verdict"] == "FAILED"
        assert "error" in report["report"]

    def test_empty_scenario_list(self, tmp_path):
        cfg = tmp_path / "c.json"
        write_config(cfg, [])
        assert run_scenarios(cfg, tmp_path / "out") == 0
        assert (tmp_path / "out" / "summary.csv").read_text().strip() \
            == "scenario,kind,verdict,metric_name,metric_value"

    def test_filter_and_seed_override(self, tmp_path):
        cfg = tmp_path / "c.json"
        write_config(cfg, SMALL_SUITE)
        run_scenarios(cfg, tmp_path / "out", name_filter="cones",
                      seed_override=9)
        files = sorted(p.name for p in (tmp_path / "out").glob("*.json"))
        assert files == ["cones.json"]


class TestDeterminism:
    def test_summary_byte_identical_across_runs(self, tmp_path):
        cfg = tmp_path / "c.json"
        write_config(cfg, SMALL_SUITE)
        run_scenarios(cfg, tmp_path / "a")
        run_scenarios(cfg, tmp_path / "b")
        assert (tmp_path / "a" / "summary.csv").read_bytes() \
            == (tmp_path / "b" / "summary.csv").read_bytes()

    def test_parallel_matches_serial(self, tmp_path):
        cfg = tmp_path / "c.json"
        write_config(cfg, SMALL_SUITE)
        run_scenarios(cfg, tmp_path / "a", parallel=False)
        run_scenarios(cfg, tmp_path / "b", parallel=True)
        assert (tmp_path / "a" / "summary.csv").read_bytes() \
            == (tmp_path / "b" / "summary.csv").read_bytes()
        for name in ("cert", "cones", "probe"):
            assert (tmp_path / "a" / f"{name}.json").read_bytes() \
                == (tmp_path / "b" / f"{name}.json").read_bytes()


class TestEntryPoint:
    def test_main_runs_config(self, tmp_path):
        cfg = tmp_path / "c.json"
        write_config(cfg, [SMALL_SUITE[1]])
        assert main(["run", str(cfg), "--out", str(tmp_path / "out")]) == 0

    def test_main_config_error_exit_2(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text("{nope")
        assert main(["run", str(cfg), "--out", str(tmp_path / "out")]) == 2

    def test_reference_config_exists(self):
        cfg = reference_config_path()
        scenarios = load_config(cfg)
        kinds = {s.kind for s in scenarios}
        assert kinds == {"CertificateVerify", "ConeDuality", "ClarkeEstimate",
                         "BracketConvergence", "OpenMappingProbe",
                         "SeparationFixture"}
