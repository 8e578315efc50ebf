"""
Tests that the shipped experiment configs pass their own assertions.
"""

from pathlib import Path

import pytest

from psido_lab.config import parse_config
from psido_lab.runner import run_experiment
from psido_lab.schema.schema import RunStatus

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Remove environment variables that change config defaults."""
    for name in ("PSIDO_OUTPUT_DIR", "PSIDO_JOBS", "PSIDO_VERBOSE"):
        monkeypatch.delenv(name, raising=False)


def run_shipped(name: str, output_dir: Path):
    config = parse_config(CONFIG_DIR / name, {"output_dir": str(output_dir)})
    return run_experiment(config)


class TestShippedConfigs:
    """Tests for the configs under configs/."""

    @pytest.mark.parametrize("name", sorted(p.name for p in CONFIG_DIR.glob("*.yaml")))
    def test_passes(self, name, tmp_path):
        """Test that the config runs and every declared assertion holds."""
        manifest = run_shipped(name, tmp_path)
        failed = [v.name for v in manifest.verdicts if not v.passed]
        assert manifest.status is RunStatus.PASS, (manifest.error, failed, manifest.summary)
        assert manifest.verdicts

    def test_elementary_weak_compactness_decays_on_every_arm(self, tmp_path):
        """Test that the order-0 elementary symbol passes the trend criterion arm by arm."""
        manifest = run_shipped("weak-compactness-elementary.yaml", tmp_path)
        assert manifest.summary["arm_trends"] == {
            "translation": True,
            "dilation": True,
            "concentration": True,
        }

    def test_identity_statistic_is_constant(self, tmp_path):
        """Test the identity spread against the tightened 1e-10 threshold."""
        manifest = run_shipped("weak-compactness-identity.yaml", tmp_path)
        (verdict,) = [v for v in manifest.verdicts if v.name == "constant_across_schedule"]
        assert verdict.threshold == 1e-10
        assert verdict.passed

    def test_commutator_beats_the_control_tail(self, tmp_path):
        """Test that the vanishing commutator tail is at most half the control tail."""
        manifest = run_shipped("commutator.yaml", tmp_path)
        assert manifest.summary["control_ratio"] <= 0.5
        assert manifest.summary["two_path_difference"] <= 1e-12
        assert manifest.summary["constant_multiplier_ratio"] <= 1e-12
