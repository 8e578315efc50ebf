"""
Tests for the experiment runner, report files and CLI.
"""

import json
from pathlib import Path

import pytest
import yaml

from psido_lab.cli import EXIT_ASSERTION, EXIT_CONFIG, EXIT_PASS, EXIT_RUNTIME, main
from psido_lab.runner import config_hash, emit_report, format_cell, run_experiment
from psido_lab.schema.schema import ExperimentConfig, RunManifest, RunStatus


def make_config(output_dir: Path, **updates) -> ExperimentConfig:
    """A small identity compactness config."""
    data = {
        "kind": "compactness",
        "seed": 0,
        "symbol": {"family": "constant", "value": 1.0},
        "grid": {"dimension": 1, "points_per_dim": 32, "half_length": 10.0},
        "spectrum": {"k_list": [8]},
        "assertions": {"min_tail_ratio": 0.999},
        "output_dir": str(output_dir),
    }
    data.update(updates)
    return ExperimentConfig.model_validate(data)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Remove environment variables that change config defaults."""
    for name in ("PSIDO_OUTPUT_DIR", "PSIDO_JOBS", "PSIDO_VERBOSE"):
        monkeypatch.delenv(name, raising=False)


class TestConfigHash:
    """Tests for the config hash."""

    def test_ignores_output_dir_and_jobs(self, tmp_path):
        """Test that where and how fast a run goes does not change the hash."""
        a = make_config(tmp_path / "a")
        b = make_config(tmp_path / "b", jobs=4)
        assert config_hash(a) == config_hash(b)

    def test_distinct_configs_distinct_hashes(self, tmp_path):
        """Test that the seed and the grid change the hash."""
        hashes = {
            config_hash(make_config(tmp_path)),
            config_hash(make_config(tmp_path, seed=1)),
            config_hash(
                make_config(tmp_path, grid={"dimension": 1, "points_per_dim": 16, "half_length": 10.0})
            ),
        }
        assert len(hashes) == 3


class TestReport:
    """Tests for report emission."""

    def test_format_cell(self):
        """Test float, bool and missing cell rendering."""
        assert format_cell(0.1) == "0.10000000000000001"
        assert format_cell(True) == "true"
        assert format_cell(None) == ""
        assert format_cell(float("inf")) == "inf"
        assert format_cell(3) == "3"

    def test_empty_table_has_header(self, tmp_path):
        """Test that a table without rows is written with its header and noted."""
        manifest = RunManifest(kind="compactness", artifact_version="0", config_hash="0" * 64)
        written = emit_report({}, manifest, tmp_path, {"main": ["k", "singular_value"]}, "prefix")
        assert (tmp_path / "prefix.csv").read_text() == "k,singular_value\n"
        assert manifest.row_counts == {"main": 0}
        assert "table main has zero rows" in manifest.notes
        assert written[-1] == tmp_path / "prefix.manifest.json"

    def test_extra_tables_get_suffixes(self, tmp_path):
        """Test the file name of non-main tables."""
        manifest = RunManifest(kind="t1-trace", artifact_version="0", config_hash="0" * 64)
        tables = {"main": [{"a": 1}], "cmo_proxy": [{"b": 2.5}]}
        emit_report(tables, manifest, tmp_path, {"main": ["a"], "cmo_proxy": ["b"]}, "p")
        assert (tmp_path / "p-cmo_proxy.csv").read_text() == "b\n2.5\n"


class TestRunExperiment:
    """Tests for run_experiment."""

    def test_passing_run(self, tmp_path):
        """Test a passing run and the files it writes."""
        config = make_config(tmp_path)
        manifest = run_experiment(config)
        assert manifest.status is RunStatus.PASS
        assert manifest.exit_code == 0
        prefix = f"compactness-{config_hash(config)[:12]}"
        assert (tmp_path / f"{prefix}.csv").exists()
        assert (tmp_path / f"{prefix}.events.jsonl").exists()
        data = json.loads((tmp_path / f"{prefix}.manifest.json").read_text())
        assert data["row_counts"] == {"main": 32}
        assert data["verdicts"][0]["name"] == "min_tail_ratio"

    def test_failing_assertion(self, tmp_path):
        """Test that a violated assertion gives status FAIL."""
        manifest = run_experiment(make_config(tmp_path, assertions={"max_tail_ratio": 0.5}))
        assert manifest.status is RunStatus.FAIL
        assert manifest.exit_code == 1

    def test_rerun_is_byte_identical(self, tmp_path):
        """Test that two runs of one config write identical CSV files."""
        first = make_config(tmp_path / "first")
        second = make_config(tmp_path / "second", jobs=2)
        run_experiment(first)
        run_experiment(second)
        name = f"compactness-{config_hash(first)[:12]}.csv"
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()

    def test_runtime_error_is_captured(self, tmp_path):
        """Test that an exception during the run gives status ERROR and still writes a report."""
        config = make_config(
            tmp_path,
            kind="transpose-check",
            symbol={
                "family": "expression",
                "expression": "x*exp(-xi**2)",
                "max_analytic_order": 0,
                "allow_finite_differences": False,
            },
            assertions={},
        )
        manifest = run_experiment(config)
        assert manifest.status is RunStatus.ERROR
        assert manifest.exit_code == 3
        assert manifest.error.startswith("OrderExceededError")
        assert manifest.row_counts == {"main": 0}

    def test_t1_trace_run(self, tmp_path):
        """Test the symbol-level T(1) experiment end to end."""
        config = make_config(
            tmp_path, kind="t1-trace", assertions={"max_abs_diff": 1e-12}, spectrum={}
        )
        manifest = run_experiment(config)
        assert manifest.status is RunStatus.PASS
        assert manifest.row_counts["main"] == 32
        assert manifest.row_counts["cmo_proxy"] == 5


class TestCli:
    """Tests for the psido command."""

    @pytest.fixture
    def config_path(self, tmp_path):
        """A passing compactness config on disk."""
        data = {
            "kind": "compactness",
            "seed": 0,
            "symbol": {"family": "constant"},
            "grid": {"points_per_dim": 32, "half_length": 10.0},
            "spectrum": {"k_list": [8]},
            "assertions": {"min_tail_ratio": 0.999},
        }
        path = tmp_path / "compactness.yaml"
        path.write_text(yaml.safe_dump(data))
        return path

    def test_pass(self, config_path, tmp_path):
        """Test exit code 0 for a passing run."""
        code = main(["compactness", "--config", str(config_path), "--out", str(tmp_path / "out")])
        assert code == EXIT_PASS
        assert list((tmp_path / "out").glob("compactness-*.manifest.json"))

    def test_assertion_failure(self, config_path, tmp_path):
        """Test exit code 1 when an assertion fails."""
        data = yaml.safe_load(config_path.read_text())
        data["assertions"] = {"max_tail_ratio": 0.5}
        config_path.write_text(yaml.safe_dump(data))
        assert main(["--config", str(config_path), "--out", str(tmp_path)]) == EXIT_ASSERTION

    def test_config_error(self, config_path, tmp_path):
        """Test exit code 2 for an invalid config."""
        data = yaml.safe_load(config_path.read_text())
        data["grid"]["points_per_dim"] = 31
        config_path.write_text(yaml.safe_dump(data))
        assert main(["--config", str(config_path), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_missing_config(self):
        """Test exit code 2 without --config."""
        assert main(["compactness"]) == EXIT_CONFIG

    def test_runtime_error(self, config_path, tmp_path):
        """Test exit code 3 when the run raises."""
        data = yaml.safe_load(config_path.read_text())
        data.update(
            kind="transpose-check",
            symbol={
                "family": "expression",
                "expression": "x*exp(-xi**2)",
                "max_analytic_order": 0,
                "allow_finite_differences": False,
            },
            assertions={},
        )
        config_path.write_text(yaml.safe_dump(data))
        assert main(["--config", str(config_path), "--out", str(tmp_path)]) == EXIT_RUNTIME

    def test_seed_override(self, config_path, tmp_path):
        """Test that --seed changes the run hash."""
        out = tmp_path / "out"
        main(["--config", str(config_path), "--out", str(out)])
        main(["--config", str(config_path), "--out", str(out), "--seed", "7"])
        assert len(list(out.glob("*.manifest.json"))) == 2

    def test_list_and_init(self, tmp_path):
        """Test the informational flags."""
        assert main(["--list"]) == EXIT_PASS
        path = tmp_path / "example.yaml"
        assert main(["--init-config", str(path)]) == EXIT_PASS
        assert yaml.safe_load(path.read_text())["kind"] == "transpose-check"
