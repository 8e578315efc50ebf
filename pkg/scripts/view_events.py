#!/usr/bin/env python3
"""
Run Event Viewer for psido-lab.

View and summarize the events logs written next to each experiment report.
"""

import argparse
import json
import sys
from pathlib import Path

from rich.console import Console

DEFAULT_RESULTS_DIR = "results"

console = Console(markup=False, highlight=False)


def view_events_file(events_file: str | Path, show_full: bool = False):
    """
    View an events file.

    Args:
        events_file: Path to a `<kind>-<hash12>.events.jsonl` file
        show_full: Show full stage details (not truncated)
    """
    events_path = Path(events_file)

    if not events_path.exists():
        console.print(f"Error: Events file not found: {events_file}")
        sys.exit(1)

    console.print(f"Reading events from: {events_path}\n")

    with open(events_path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            try:
                event = json.loads(line)
                print_event(event, show_full)
                console.rule()
            except json.JSONDecodeError as e:
                console.print(f"Error parsing line: {e}")
                console.print(f"Raw line: {line[:100]}...")


def print_event(event: dict, show_full: bool = False):
    """Print a single event."""
    event_type = event.get("type", "unknown")
    timestamp = event.get("timestamp", "")
    data = event.get("data", {})

    if event_type == "run_start":
        console.print(f"▶ [{data.get('kind')}] {timestamp}")
        console.print(f"   Config hash: {data.get('config_hash')}")
        console.print(f"   Seed: {data.get('seed')}")

    elif event_type == "stage":
        details = {k: v for k, v in data.items() if k != "stage"}
        console.print(f"· Stage {data.get('stage')} {timestamp}")
        if details:
            text = json.dumps(details, ensure_ascii=False, default=str)
            if not show_full and len(text) > 200:
                text = text[:200] + " ... (truncated)"
            console.print(f"   {text}")

    elif event_type == "verdict":
        mark = "✅" if data.get("passed") else "❌"
        console.print(
            f"{mark} {data.get('name')}: "
            f"observed={data.get('observed')} threshold={data.get('threshold')}"
        )
        if data.get("detail") and show_full:
            console.print(f"   {data.get('detail')}")

    elif event_type == "warning":
        console.print(f"⚠ {data.get('message')}")

    elif event_type == "error":
        console.print(f"❌ [Error] {timestamp}")
        console.print(f"   Error: {data.get('error')}")
        if data.get("exception_type"):
            console.print(f"   Type: {data.get('exception_type')}")

    elif event_type == "run_end":
        duration = data.get("duration_seconds")
        duration_str = f" ({duration:.2f}s)" if duration is not None else ""
        console.print(f"■ Status {data.get('status')}{duration_str}")


def list_runs(results_dir: str | Path = DEFAULT_RESULTS_DIR):
    """List the runs with an events log in a results directory."""
    results_path = Path(results_dir)

    if not results_path.exists():
        console.print(f"No results directory found at {results_path}")
        return

    events_files = sorted(results_path.glob("*.events.jsonl"))

    if not events_files:
        console.print("No runs found")
        return

    console.print(f"Runs in {results_path}:\n")

    for events_file in events_files:
        status = "?"
        stages = 0
        try:
            with open(events_file, "r", encoding="utf-8") as f:
                for line in f:
                    if not line.strip():
                        continue
                    event = json.loads(line)
                    if event.get("type") == "stage":
                        stages += 1
                    elif event.get("type") == "run_end":
                        status = event.get("data", {}).get("status", "?")
        except (OSError, json.JSONDecodeError):
            status = "unreadable"

        run_id = events_file.name.removesuffix(".events.jsonl")
        console.print(f"  📁 {run_id}")
        console.print(f"     Status: {status}")
        console.print(f"     Stages: {stages}")
        console.print(f"     Path: {events_file}")
        console.print()


def main():
    parser = argparse.ArgumentParser(
        description="View run events from psido-lab",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # List runs in ./results
  python scripts/view_events.py --list

  # View one run by file or by prefix
  python scripts/view_events.py results/compactness-0123456789ab.events.jsonl
  python scripts/view_events.py compactness-0123456789ab --full
        """,
    )

    parser.add_argument("events_file", nargs="?", help="Path to an events file or a run prefix")
    parser.add_argument("--list", "-l", action="store_true", help="List runs with an events log")
    parser.add_argument(
        "--results", "-r", default=DEFAULT_RESULTS_DIR, help="Results directory for --list and prefixes"
    )
    parser.add_argument("--full", "-f", action="store_true", help="Show full details")

    args = parser.parse_args()

    if args.events_file and not args.list:
        events_path = Path(args.events_file)
        if not events_path.suffix:
            events_path = Path(args.results) / f"{args.events_file}.events.jsonl"
        view_events_file(events_path, args.full)
    else:
        list_runs(args.results)


if __name__ == "__main__":
    main()
