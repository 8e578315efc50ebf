"""
Tests for configuration loading and validation.
"""

from pathlib import Path

import pytest
import yaml

from psido_lab.config import ConfigManager, load_config, parse_config
from psido_lab.errors import ConfigError
from psido_lab.schema.schema import ExperimentKind


def write_config(directory: Path, data: dict, name: str = "experiment.yaml") -> Path:
    """Write a config mapping as YAML."""
    path = directory / name
    path.write_text(yaml.safe_dump(data, sort_keys=False))
    return path


@pytest.fixture
def base_config():
    """A small valid t1-trace config."""
    return {
        "kind": "t1-trace",
        "seed": 0,
        "symbol": {"family": "constant", "value": 1.0},
        "grid": {"dimension": 1, "points_per_dim": 32, "half_length": 10.0},
        "assertions": {"max_abs_diff": 1e-12},
    }


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Remove environment variables that change config defaults."""
    for name in ("PSIDO_OUTPUT_DIR", "PSIDO_JOBS", "PSIDO_VERBOSE"):
        monkeypatch.delenv(name, raising=False)


class TestConfigManager:
    """Tests for ConfigManager."""

    def test_load_valid_config(self, tmp_path, base_config):
        """Test loading and validating a correct file."""
        manager = ConfigManager(write_config(tmp_path, base_config))
        assert manager.validate() == []
        assert manager.config.kind is ExperimentKind.T1_TRACE
        assert manager.config.grid.points_per_dim == 32

    def test_missing_file(self, tmp_path):
        """Test that a missing file is reported, not raised."""
        manager = ConfigManager(tmp_path / "nope.yaml")
        errors = manager.validate()
        assert len(errors) == 1
        assert "file not found" in errors[0]

    def test_non_mapping_file(self, tmp_path):
        """Test that a YAML list is rejected."""
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        errors = ConfigManager(path).validate()
        assert any("must contain a mapping" in e for e in errors)

    def test_unknown_field(self, tmp_path, base_config):
        """Test that misspelled keys are schema errors."""
        base_config["grdi"] = {}
        errors = ConfigManager(write_config(tmp_path, base_config)).validate()
        assert any(e.startswith("grdi:") for e in errors)

    def test_all_errors_listed(self, tmp_path, base_config):
        """Test that several problems are reported together."""
        base_config["grid"]["points_per_dim"] = 33
        base_config["assertions"]["no_such_check"] = 1.0
        del base_config["seed"]
        errors = ConfigManager(write_config(tmp_path, base_config)).validate()
        assert any(e.startswith("grid.points_per_dim") for e in errors)
        assert any(e.startswith("assertions.no_such_check") for e in errors)
        assert any(e.startswith("seed:") for e in errors)

    def test_unknown_assertion_lists_supported(self, tmp_path, base_config):
        """Test that the message names the supported assertions."""
        base_config["assertions"] = {"max_tail_ratio": 0.1}
        errors = ConfigManager(write_config(tmp_path, base_config)).validate()
        assert len(errors) == 1
        assert "max_abs_diff" in errors[0]

    def test_size_cap(self, tmp_path, base_config):
        """Test that matrix experiments respect the dense size cap."""
        base_config["kind"] = "compactness"
        base_config["assertions"] = {}
        base_config["grid"]["size_cap"] = 16
        errors = ConfigManager(write_config(tmp_path, base_config)).validate()
        assert any("exceeds the dense matrix cap" in e for e in errors)

    def test_bad_symbol(self, tmp_path, base_config):
        """Test that symbols that cannot be built are reported."""
        base_config["symbol"] = {"family": "elementary", "psi": {"profile": "window"}}
        errors = ConfigManager(write_config(tmp_path, base_config)).validate()
        assert any(e.startswith("symbol:") for e in errors)

    def test_kind_from_command_line(self, tmp_path, base_config):
        """Test that the kind may come from the command line."""
        del base_config["kind"]
        manager = ConfigManager(write_config(tmp_path, base_config), {"kind": "t1-trace"})
        assert manager.validate() == []
        assert manager.config.kind is ExperimentKind.T1_TRACE

    def test_conflicting_kind(self, tmp_path, base_config):
        """Test that a command-line kind must agree with the file."""
        manager = ConfigManager(write_config(tmp_path, base_config), {"kind": "compactness"})
        assert any("declares 't1-trace'" in e for e in manager.validate())

    def test_save_example_config(self, tmp_path):
        """Test that the example config parses."""
        path = tmp_path / "example.yaml"
        ConfigManager.save_example_config(path)
        config = parse_config(path)
        assert config.kind is ExperimentKind.TRANSPOSE_CHECK


class TestOverrides:
    """Tests for environment and command-line overrides."""

    def test_env_output_dir(self, tmp_path, base_config, monkeypatch):
        """Test that PSIDO_OUTPUT_DIR fills an unset output directory."""
        monkeypatch.setenv("PSIDO_OUTPUT_DIR", str(tmp_path / "env-out"))
        config = parse_config(write_config(tmp_path, base_config))
        assert config.output_dir == str(tmp_path / "env-out")

    def test_env_jobs(self, tmp_path, base_config, monkeypatch):
        """Test that PSIDO_JOBS sets the thread count."""
        monkeypatch.setenv("PSIDO_JOBS", "3")
        assert parse_config(write_config(tmp_path, base_config)).jobs == 3

    def test_env_jobs_must_be_integer(self, tmp_path, base_config, monkeypatch):
        """Test that a non-integer PSIDO_JOBS is a config error."""
        monkeypatch.setenv("PSIDO_JOBS", "many")
        with pytest.raises(ConfigError) as exc_info:
            parse_config(write_config(tmp_path, base_config))
        assert any("PSIDO_JOBS" in e for e in exc_info.value.errors)

    def test_command_line_wins(self, tmp_path, base_config, monkeypatch):
        """Test that command-line values override the file and the environment."""
        monkeypatch.setenv("PSIDO_JOBS", "3")
        path = write_config(tmp_path, base_config)
        config = parse_config(path, {"seed": 42, "jobs": 2, "output_dir": str(tmp_path / "cli")})
        assert config.seed == 42
        assert config.jobs == 2
        assert config.output_dir == str(tmp_path / "cli")

    def test_default_output_dir(self, tmp_path, base_config):
        """Test the ./results default."""
        config = parse_config(write_config(tmp_path, base_config))
        assert config.output_dir == "results"

    def test_load_config_without_validation(self, tmp_path, base_config):
        """Test that load_config returns the parsed model."""
        base_config["grid"]["points_per_dim"] = 33
        config = load_config(str(write_config(tmp_path, base_config)))
        assert config is not None
        assert config.grid.points_per_dim == 33
