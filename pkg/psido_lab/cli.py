"""
Command-line interface for psido-lab.

    psido <kind> --config <path> [--out <dir>] [--seed <u64>] [--jobs <k>]

Exit codes: 0 every assertion passed, 1 an assertion failed, 2 config error,
3 runtime error.
"""

import argparse
import logging
import sys
from pathlib import Path

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from psido_lab import __version__
from psido_lab.config import ConfigManager, env_verbose, parse_config
from psido_lab.errors import ConfigError, PsidoError
from psido_lab.experiments.registry import default_registry
from psido_lab.logger import set_verbose
from psido_lab.runner import run_experiment
from psido_lab.schema.schema import ExperimentKind, RunManifest, RunStatus

console = Console()
logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

STATUS_STYLE = {RunStatus.PASS: "green", RunStatus.FAIL: "yellow", RunStatus.ERROR: "red"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psido", description="psido-lab - pseudodifferential operator experiments"
    )
    parser.add_argument(
        "kind",
        nargs="?",
        choices=[k.value for k in ExperimentKind],
        help="Experiment kind (defaults to the kind in the config)",
    )
    parser.add_argument("--config", "-c", help="Path to the experiment YAML file")
    parser.add_argument("--out", help="Output directory (default: PSIDO_OUTPUT_DIR or ./results)")
    parser.add_argument("--seed", type=int, help="Seed for all sampling (u64)")
    parser.add_argument("--jobs", type=int, help="Worker threads")
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging")
    parser.add_argument("--init-config", metavar="PATH", help="Write an example config and exit")
    parser.add_argument("--list", action="store_true", help="List experiment kinds and exit")
    parser.add_argument("--version", action="version", version=f"psido-lab {__version__}")
    return parser


def print_kinds():
    """Print every experiment kind with its assertions."""
    registry = default_registry()
    table = Table(title="Experiment kinds")
    table.add_column("Kind", style="cyan")
    table.add_column("Description")
    table.add_column("Assertions")
    for info in registry.list_experiments():
        experiment = registry.require(info["name"])
        table.add_row(info["name"], info["description"], ", ".join(experiment.supported_assertions))
    console.print(table)


def print_manifest(manifest: RunManifest):
    """Print verdicts and written files."""
    style = STATUS_STYLE[manifest.status]
    header = (
        f"[bold]{manifest.kind}[/bold]  hash {manifest.config_hash[:12]}  seed {manifest.seed}\n"
        f"Status: [{style}]{manifest.status.value}[/{style}]  "
        f"({manifest.duration_seconds:.2f}s)"
    )
    if manifest.error:
        header += f"\n[red]{manifest.error}[/red]"
    console.print(Panel(header, border_style=style))

    if manifest.verdicts:
        table = Table(title="Assertions")
        table.add_column("Name", style="cyan")
        table.add_column("Result")
        table.add_column("Observed", justify="right")
        table.add_column("Threshold", justify="right")
        for verdict in manifest.verdicts:
            result = "[green]pass[/green]" if verdict.passed else "[red]fail[/red]"
            observed = "" if verdict.observed is None else f"{verdict.observed:.6g}"
            table.add_row(verdict.name, result, observed, str(verdict.threshold))
        console.print(table)

    for note in manifest.notes:
        console.print(f"[yellow]note:[/yellow] {note}")
    for path in manifest.output_files:
        console.print(f"[dim]{path}[/dim]")


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the CLI."""
    args = build_parser().parse_args(argv)

    if args.init_config:
        path = Path(args.init_config)
        ConfigManager.save_example_config(path)
        console.print(f"Example configuration saved to: {path}")
        return EXIT_PASS

    if args.list:
        print_kinds()
        return EXIT_PASS

    verbose = args.verbose or env_verbose()
    if verbose:
        set_verbose(True)

    if not args.config:
        console.print("[red]Configuration error: --config is required[/red]")
        return EXIT_CONFIG

    overrides = {"kind": args.kind, "output_dir": args.out, "seed": args.seed, "jobs": args.jobs}
    try:
        config = parse_config(args.config, overrides)
    except ConfigError as e:
        for error in e.errors:
            console.print(f"[red]Configuration error: {error}[/red]")
        return EXIT_CONFIG

    try:
        manifest = run_experiment(config, verbose=verbose)
    except PsidoError as e:
        console.print(f"[red]Error: {e}[/red]")
        return EXIT_RUNTIME

    print_manifest(manifest)
    return manifest.exit_code


if __name__ == "__main__":
    sys.exit(main())
