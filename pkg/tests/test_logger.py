"""
Tests for the run event logger.
"""

import json

import pytest

from psido_lab.logger import RunLogger
from psido_lab.schema.schema import AssertionVerdict


class TestRunLogger:
    """Tests for RunLogger."""

    @pytest.fixture
    def events_path(self, tmp_path):
        """Path of the events file."""
        return tmp_path / "run" / "events.jsonl"

    @pytest.fixture
    def run_logger(self, events_path):
        """A run logger writing to a file."""
        return RunLogger(events_path, run_id="test-run")

    def read_events(self, path):
        return [json.loads(line) for line in path.read_text().splitlines()]

    def test_events_written_as_json_lines(self, run_logger, events_path):
        """Test that every event is one JSON line with the common fields."""
        run_logger.log_run_start("compactness", "ab" * 32, 0)
        run_logger.log_stage("svd", top=1.0)
        run_logger.log_run_end("PASS", 0.5)

        events = self.read_events(events_path)
        assert [e["type"] for e in events] == ["run_start", "stage", "run_end"]
        assert all(e["run_id"] == "test-run" for e in events)
        assert all("timestamp" in e for e in events)
        assert events[1]["data"] == {"stage": "svd", "top": 1.0}

    def test_verdict_and_error(self, run_logger, events_path):
        """Test the verdict and error payloads."""
        run_logger.log_verdict(
            AssertionVerdict(name="max_tail_ratio", passed=False, observed=0.9, threshold=0.5)
        )
        run_logger.log_error("boom", ValueError("boom"))

        verdict, error = self.read_events(events_path)
        assert verdict["data"]["name"] == "max_tail_ratio"
        assert verdict["data"]["passed"] is False
        assert error["data"] == {"error": "boom", "exception_type": "ValueError"}

    def test_file_truncated_on_init(self, events_path):
        """Test that a new logger starts an empty events file."""
        RunLogger(events_path).log_warning("first")
        RunLogger(events_path)
        assert events_path.read_text() == ""

    def test_in_memory(self):
        """Test that events are kept without a file."""
        run_logger = RunLogger()
        run_logger.log_warning("ill-conditioned")
        assert run_logger.events_path is None
        assert run_logger.events[0]["data"] == {"message": "ill-conditioned"}

    def test_summary(self, run_logger):
        """Test the per-type event summary."""
        assert run_logger.get_events_summary() == "No events logged"

        run_logger.log_stage("a")
        run_logger.log_stage("b")
        run_logger.log_warning("w")
        summary = run_logger.get_events_summary()
        assert "Run ID: test-run" in summary
        assert "Total events: 3" in summary
        assert "  - stage: 2" in summary
        assert "  - warning: 1" in summary
