"""
Configuration management for psido-lab.

Loads experiment configs from YAML files, applies environment and command-line
overrides, and validates the result. Every problem is collected so a bad config
reports all of its errors at once.
"""

import os
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv
from pydantic import ValidationError

from psido_lab.errors import ConfigError
from psido_lab.experiments.registry import ExperimentRegistry, default_registry
from psido_lab.factory import build_function, build_symbol
from psido_lab.schema.schema import ExperimentConfig

load_dotenv()

DEFAULT_OUTPUT_DIR = "./results"


def env_verbose() -> bool:
    """PSIDO_VERBOSE=true enables debug output."""
    return os.getenv("PSIDO_VERBOSE", "").lower() in ("1", "true", "yes")


class ConfigManager:
    """
    Configuration manager for psido-lab experiments.

    Loads an experiment config from a YAML file, fills defaults from environment
    variables and applies command-line overrides.
    """

    # Searched when no config path is given
    DEFAULT_SEARCH_PATHS = [
        "./psido.yaml",
        "~/.psido-lab/config.yaml",
        "~/.config/psido-lab/config.yaml",
    ]

    def __init__(
        self,
        config_path: str | Path | None = None,
        overrides: dict[str, Any] | None = None,
        registry: ExperimentRegistry | None = None,
    ):
        """
        Initialize the configuration manager.

        Args:
            config_path: Path to the experiment YAML file
            overrides: Command-line values (kind, output_dir, seed, jobs); None entries are ignored
            registry: Experiment registry used for kind-specific validation
        """
        self.config_path = config_path
        self.overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
        self.registry = registry or default_registry()
        self.errors: list[str] = []
        self.config = self._load_config()

    def _load_config(self) -> ExperimentConfig | None:
        """
        Load, override and parse the config.

        Returns:
            ExperimentConfig, or None when loading or schema validation failed
        """
        config_data: dict[str, Any] = {}

        if self.config_path:
            config_data = self._load_from_file(self.config_path)
        else:
            for path in self.DEFAULT_SEARCH_PATHS:
                expanded = Path(path).expanduser()
                if expanded.exists():
                    config_data = self._load_from_file(expanded)
                    break
            else:
                self.errors.append("config: no config file given and none found in the search paths")

        if self.errors:
            return None

        config_data = self._override_with_env(config_data)
        config_data = self._apply_overrides(config_data)
        return self._build_config(config_data)

    def _load_from_file(self, path: str | Path) -> dict[str, Any]:
        """
        Load a YAML mapping.

        Args:
            path: Path to configuration file

        Returns:
            Configuration dictionary (empty on error; the error is recorded)
        """
        path = Path(path).expanduser()

        if not path.exists():
            self.errors.append(f"config: file not found: {path}")
            return {}

        try:
            with open(path) as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            self.errors.append(f"config: cannot parse {path}: {e}")
            return {}

        if data is None:
            return {}
        if not isinstance(data, dict):
            self.errors.append(f"config: {path} must contain a mapping, got {type(data).__name__}")
            return {}
        return data

    def _override_with_env(self, config_data: dict[str, Any]) -> dict[str, Any]:
        """
        Fill unset values from environment variables.

        Environment variables:
        - PSIDO_OUTPUT_DIR: Default output directory
        - PSIDO_JOBS: Default number of worker threads

        Args:
            config_data: Raw configuration data

        Returns:
            Updated configuration data
        """
        if "output_dir" not in config_data and os.getenv("PSIDO_OUTPUT_DIR"):
            config_data["output_dir"] = os.getenv("PSIDO_OUTPUT_DIR")

        jobs = os.getenv("PSIDO_JOBS")
        if "jobs" not in config_data and jobs:
            try:
                config_data["jobs"] = int(jobs)
            except ValueError:
                self.errors.append(f"PSIDO_JOBS: expected an integer, got '{jobs}'")

        return config_data

    def _apply_overrides(self, config_data: dict[str, Any]) -> dict[str, Any]:
        """Apply command-line values; a CLI kind must match the file's kind."""
        kind = self.overrides.get("kind")
        if kind is not None:
            declared = config_data.get("kind")
            if declared is not None and declared != kind:
                self.errors.append(
                    f"kind: command line requests '{kind}' but the config declares '{declared}'"
                )
            config_data["kind"] = kind

        for key in ("output_dir", "seed", "jobs"):
            if key in self.overrides:
                config_data[key] = self.overrides[key]
        return config_data

    def _build_config(self, data: dict[str, Any]) -> ExperimentConfig | None:
        """
        Build the ExperimentConfig, recording pydantic errors as `location: message`.
        """
        try:
            return ExperimentConfig.model_validate(data)
        except ValidationError as e:
            for error in e.errors():
                location = ".".join(str(part) for part in error["loc"]) or "config"
                self.errors.append(f"{location}: {error['msg']}")
            return None

    def validate(self) -> list[str]:
        """
        Validate the configuration.

        Returns:
            List of validation errors (empty if valid)
        """
        errors = list(self.errors)
        config = self.config
        if config is None:
            return errors

        if config.kind is None:
            errors.append("kind: required (set it in the config or pass it on the command line)")
        if config.seed is None:
            errors.append("seed: required (set it in the config or pass --seed)")

        grid = config.grid
        if grid.dimension not in (1, 2):
            errors.append(f"grid.dimension: must be 1 or 2, got {grid.dimension}")
        if grid.points_per_dim < 2 or grid.points_per_dim % 2:
            errors.append(f"grid.points_per_dim: must be even and >= 2, got {grid.points_per_dim}")

        experiment = self.registry.get(config.kind.value) if config.kind else None
        if config.kind is not None and experiment is None:
            errors.append(f"kind: no experiment registered for '{config.kind.value}'")

        size = grid.points_per_dim**grid.dimension
        if experiment is not None and experiment.uses_matrices and size > grid.size_cap:
            errors.append(
                f"grid: n^d = {size} exceeds the dense matrix cap {grid.size_cap} for {experiment.name}"
            )

        if grid.dimension in (1, 2):
            errors.extend(self._symbol_errors(config))

        if experiment is not None:
            supported = experiment.supported_assertions
            for name in config.assertions:
                if name not in supported:
                    errors.append(
                        f"assertions.{name}: unknown assertion for {experiment.name}; "
                        f"supported: {', '.join(sorted(supported))}"
                    )
            if grid.dimension in (1, 2):
                errors.extend(experiment.validate(config))

        return errors

    def _symbol_errors(self, config: ExperimentConfig) -> list[str]:
        """Try to build the symbol, the control symbol and the multiplier."""
        d = config.grid.dimension
        errors = []
        builders: list[tuple[str, Any]] = [("symbol", lambda: build_symbol(config.symbol, d))]
        if config.kind is not None and config.kind.value == "commutator":
            commutator = config.commutator
            builders.append(
                ("commutator.multiplier", lambda: build_function(commutator.multiplier, d))
            )
            if commutator.control is not None:
                control = commutator.control
                builders.append(("commutator.control", lambda: build_symbol(control, d)))
            if commutator.order_reduction is not None:
                window = commutator.order_reduction.window
                builders.append(
                    ("commutator.order_reduction.window", lambda: build_function(window, d))
                )

        for label, build in builders:
            try:
                build()
            except Exception as e:
                errors.append(f"{label}: {e}")
        return errors

    def resolve_output_dir(self) -> Path:
        """Output directory from the config, PSIDO_OUTPUT_DIR or ./results."""
        if self.config is not None and self.config.output_dir:
            return Path(self.config.output_dir).expanduser()
        return Path(os.getenv("PSIDO_OUTPUT_DIR") or DEFAULT_OUTPUT_DIR).expanduser()

    @staticmethod
    def save_example_config(path: str | Path):
        """
        Save an example configuration file.

        Args:
            path: Path to save the example config
        """
        path = Path(path)

        example_config = {
            "kind": "transpose-check",
            "description": "Transpose expansion of x·exp(-ξ²)",
            "seed": 0,
            "symbol": {
                "family": "expression",
                "expression": "x*exp(-xi**2)",
                "order": 0,
            },
            "grid": {
                "dimension": 1,
                "points_per_dim": 256,
                "half_length": 50.26548245743669,
            },
            "expansion": {"order": 3},
            "assertions": {
                "non_increasing": True,
                "final_fraction": 0.5,
            },
            "export_matrices": False,
            "jobs": 1,
        }

        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            yaml.dump(example_config, f, default_flow_style=False, sort_keys=False, allow_unicode=True)


def parse_config(
    path: str | Path,
    overrides: dict[str, Any] | None = None,
    registry: ExperimentRegistry | None = None,
) -> ExperimentConfig:
    """
    Parse and validate an experiment config.

    Args:
        path: YAML file
        overrides: Command-line values (kind, output_dir, seed, jobs)
        registry: Experiment registry (default: every built-in kind)

    Returns:
        A validated ExperimentConfig with output_dir resolved

    Raises:
        ConfigError: Carrying every validation error
    """
    manager = ConfigManager(path, overrides, registry)
    errors = manager.validate()
    if errors or manager.config is None:
        raise ConfigError(errors or ["config: could not be loaded"])
    return manager.config.model_copy(update={"output_dir": str(manager.resolve_output_dir())})


def load_config(config_path: str | None = None) -> ExperimentConfig | None:
    """
    Convenience function to load a config without semantic validation.

    Args:
        config_path: Optional path to configuration file

    Returns:
        ExperimentConfig or None if it could not be parsed
    """
    manager = ConfigManager(config_path)
    return manager.config
