"""
Logging system for psido-lab.

Configures console logging and records structured run events as JSON lines.
"""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any

from psido_lab.schema.schema import AssertionVerdict

# Configure root logger with a console handler
root_logger = logging.getLogger()
root_logger.setLevel(logging.DEBUG)

# Console handler - only INFO and above
console_handler = logging.StreamHandler()
console_handler.setLevel(logging.INFO)
console_formatter = logging.Formatter(
    "%(asctime)s - %(name)s - %(levelname)s - %(message)s", datefmt="%Y-%m-%d %H:%M:%S"
)
console_handler.setFormatter(console_formatter)

root_logger.addHandler(console_handler)

logger = logging.getLogger(__name__)


def set_verbose(verbose: bool) -> None:
    """Lower the console level to DEBUG (or restore INFO)."""
    console_handler.setLevel(logging.DEBUG if verbose else logging.INFO)


class RunLogger:
    """
    Event recorder for one experiment run.

    Every event carries `type`, `timestamp`, `run_id` and `data`. Events are kept
    in memory and, when an events path is set, appended to a JSONL file.
    """

    def __init__(
        self,
        events_path: str | Path | None = None,
        run_id: str | None = None,
        verbose: bool = False,
    ):
        """
        Initialize the run logger.

        Args:
            events_path: JSONL file to append events to (None keeps events in memory)
            run_id: Identifier stamped on every event (default: current time)
            verbose: Whether to enable debug output on the console
        """
        self.events_path = Path(events_path) if events_path else None
        self.run_id = run_id or datetime.now().strftime("%Y%m%d_%H%M%S")
        self.events: list[dict[str, Any]] = []

        if self.events_path is not None:
            self.events_path.parent.mkdir(parents=True, exist_ok=True)
            self.events_path.write_text("")

        if verbose:
            set_verbose(True)

    def _record(self, event_type: str, data: dict[str, Any]) -> dict[str, Any]:
        event = {
            "type": event_type,
            "timestamp": datetime.now().isoformat(),
            "run_id": self.run_id,
            "data": data,
        }
        self.events.append(event)
        if self.events_path is not None:
            self._write_event(event)
        return event

    def log_run_start(self, kind: str, config_hash: str, seed: int | None):
        """Log the start of a run."""
        self._record("run_start", {"kind": kind, "config_hash": config_hash, "seed": seed})
        logger.info(f"Starting {kind} run {config_hash[:12]} (seed={seed})")

    def log_stage(self, name: str, **details: Any):
        """
        Log a completed computation stage.

        Args:
            name: Stage name
            **details: JSON-serializable details
        """
        self._record("stage", {"stage": name, **details})
        logger.debug(f"Stage {name}: {details}")

    def log_verdict(self, verdict: AssertionVerdict):
        """Log an assertion verdict."""
        self._record("verdict", verdict.model_dump())
        status = "✓" if verdict.passed else "✗"
        logger.info(f"Assertion {status} {verdict.name}: observed={verdict.observed}")

    def log_warning(self, message: str):
        """Log a numerical warning."""
        self._record("warning", {"message": message})
        logger.warning(message)

    def log_error(self, error: str, exception: Exception | None = None):
        """
        Log an error.

        Args:
            error: Error message
            exception: Optional exception object
        """
        self._record(
            "error",
            {"error": error, "exception_type": type(exception).__name__ if exception else None},
        )
        logger.error(f"Error: {error}")

    def log_run_end(self, status: str, duration_seconds: float):
        """Log the end of a run."""
        self._record("run_end", {"status": status, "duration_seconds": duration_seconds})
        logger.info(f"Run finished with status {status} in {duration_seconds:.2f}s")

    def _write_event(self, event: dict[str, Any]):
        """Append an event to the events file."""
        try:
            with open(self.events_path, "a") as f:  # type: ignore[arg-type]
                f.write(json.dumps(event, default=str) + "\n")
        except Exception as e:
            logger.error(f"Error writing event log: {e}")

    def get_events_summary(self) -> str:
        """
        Get a summary of logged events.

        Returns:
            Summary string
        """
        if not self.events:
            return "No events logged"

        summary = [f"Run ID: {self.run_id}\n"]
        summary.append(f"Total events: {len(self.events)}\n")

        type_counts: dict[str, int] = {}
        for event in self.events:
            event_type = event.get("type", "unknown")
            type_counts[event_type] = type_counts.get(event_type, 0) + 1

        summary.append("Event types:")
        for event_type, count in sorted(type_counts.items()):
            summary.append(f"  - {event_type}: {count}")

        return "\n".join(summary)
