"""
Experiment runner.

Builds the grid and symbol for a validated config, runs the experiment, and writes
the CSV tables, the events log and the run manifest.
"""

import csv
import hashlib
import json
import logging
import math
import time
from datetime import datetime
from pathlib import Path
from typing import Any

from psido_lab import __version__
from psido_lab.discretization import Grid
from psido_lab.errors import ReportWriteError
from psido_lab.experiments.base import MAIN_TABLE, ExperimentContext, summary_value
from psido_lab.experiments.registry import ExperimentRegistry, default_registry
from psido_lab.factory import build_symbol
from psido_lab.logger import RunLogger
from psido_lab.schema.schema import ExperimentConfig, ExperimentResult, RunManifest, RunStatus

logger = logging.getLogger(__name__)

# Excluded from the config hash: they change where and how fast, not what
HASH_EXCLUDED_FIELDS = {"output_dir", "jobs"}


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON of the config without output_dir and jobs."""
    projection = config.model_dump(mode="json", exclude=HASH_EXCLUDED_FIELDS)
    canonical = json.dumps(projection, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def format_cell(value: Any) -> str:
    """Render one CSV cell: floats with 17 significant digits, booleans as true/false."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def table_path(output_dir: Path, prefix: str, table: str) -> Path:
    """`<prefix>.csv` for the main table, `<prefix>-<table>.csv` otherwise."""
    if table == MAIN_TABLE:
        return output_dir / f"{prefix}.csv"
    return output_dir / f"{prefix}-{table}.csv"


def write_csv(path: Path, columns: list[str], rows: list[dict[str, Any]]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({column: format_cell(row.get(column)) for column in columns})


def emit_report(
    tables: dict[str, list[dict[str, Any]]],
    manifest: RunManifest,
    output_dir: str | Path,
    columns: dict[str, list[str]],
    prefix: str,
) -> list[Path]:
    """
    Write every table as CSV and the manifest as JSON.

    Tables without rows are written with their header only and noted in the manifest.

    Args:
        tables: Rows per table name
        manifest: Run manifest; output_files, row_counts and notes are filled in
        output_dir: Destination directory (created if missing)
        columns: Column order per table
        prefix: File stem `<kind>-<hash12>`

    Returns:
        Paths of the written files, manifest last

    Raises:
        ReportWriteError: If a file cannot be written
    """
    out = Path(output_dir)
    written: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for table, table_columns in columns.items():
            rows = tables.get(table, [])
            path = table_path(out, prefix, table)
            write_csv(path, table_columns, rows)
            manifest.row_counts[table] = len(rows)
            if not rows:
                manifest.notes.append(f"table {table} has zero rows")
            written.append(path)

        manifest_path = out / f"{prefix}.manifest.json"
        manifest.output_files = [str(p) for p in written] + manifest.output_files
        manifest.output_files.append(str(manifest_path))
        manifest_path.write_text(manifest.model_dump_json(indent=2))
        written.append(manifest_path)
    except OSError as e:
        raise ReportWriteError(str(out), str(e)) from e

    logger.info(f"Wrote {len(written)} files to {out}")
    return written


def run_experiment(
    config: ExperimentConfig,
    registry: ExperimentRegistry | None = None,
    verbose: bool = False,
) -> RunManifest:
    """
    Run one validated experiment and write its report.

    Assertion failures give status FAIL; any exception during the run is captured
    as status ERROR with the partial tables still written.

    Args:
        config: Validated config (kind and seed set)
        registry: Experiment registry (default: every built-in kind)
        verbose: Enable debug output on the console

    Returns:
        The run manifest

    Raises:
        ReportWriteError: If the report itself cannot be written
    """
    registry = registry or default_registry()
    if config.kind is None:
        raise ValueError("config.kind must be set before running")
    experiment = registry.require(config.kind.value)

    digest = config_hash(config)
    prefix = f"{config.kind.value}-{digest[:12]}"
    output_dir = Path(config.output_dir or "./results").expanduser()
    run_logger = RunLogger(output_dir / f"{prefix}.events.jsonl", run_id=prefix, verbose=verbose)

    manifest = RunManifest(
        kind=config.kind.value,
        artifact_version=__version__,
        config_hash=digest,
        seed=config.seed,
        config=config.model_dump(mode="json", exclude=HASH_EXCLUDED_FIELDS),
    )
    run_logger.log_run_start(config.kind.value, digest, config.seed)
    start = time.monotonic()

    context: ExperimentContext | None = None
    result = ExperimentResult()
    try:
        grid = Grid.from_spec(config.grid)
        symbol = build_symbol(config.symbol, grid.dimension)
        context = ExperimentContext(config, grid, symbol, run_logger, output_dir, prefix)
        run_logger.log_stage("build", grid=repr(grid), symbol=symbol.name)
        result = experiment.run(context)
        failed = [v.name for v in result.verdicts if not v.passed]
        manifest.status = RunStatus.FAIL if failed else RunStatus.PASS
        if failed:
            logger.warning(f"Assertions failed: {', '.join(failed)}")
    except Exception as e:
        manifest.status = RunStatus.ERROR
        manifest.error = f"{type(e).__name__}: {e}"
        run_logger.log_error(manifest.error, e)

    duration = time.monotonic() - start
    manifest.verdicts = result.verdicts
    manifest.summary = {k: summary_value(v) for k, v in result.summary.items()}
    manifest.notes = list(result.notes)
    manifest.finished_at = datetime.now().isoformat()
    manifest.duration_seconds = duration
    manifest.output_files = [str(run_logger.events_path)]
    if context is not None:
        manifest.output_files.extend(str(p) for p in context.exported)

    run_logger.log_run_end(manifest.status.value, duration)
    emit_report(result.tables, manifest, output_dir, experiment.columns_for(config), prefix)
    return manifest
