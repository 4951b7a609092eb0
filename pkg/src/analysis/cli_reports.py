"""
CLI commands for inspecting written run reports.
"""

import sys
from pathlib import Path

import click
from rich.console import Console

from ..logging.logger import RunConsole
from .report_generator import ReportWriter, load_report
from .verdicts import evaluate_verdicts

console = Console()


def _load(path: str):
    try:
        return load_report(path)
    except (OSError, ValueError) as e:
        console.print(f"[red]Failed to read report: {e}[/red]")
        sys.exit(2)


@click.group()
def reports():
    """Inspect reports of finished runs."""
    pass


@reports.command()
@click.argument("path", type=click.Path(exists=True))
def show(path: str):
    """Display a report.json (or the run directory holding it)."""
    RunConsole(console).show_report(_load(path))


@reports.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("--out", type=click.Path(file_okay=False), help="Directory for summary.html (default: next to the report)")
def html(path: str, out: str):
    """Render the HTML summary of a report."""
    report = _load(path)
    source = Path(path)
    target = Path(out) if out else (source if source.is_dir() else source.parent)
    target.mkdir(parents=True, exist_ok=True)
    written = ReportWriter(target).write_html(report)
    console.print(f"[green]Summary written: {written}[/green]")


@reports.command()
@click.argument("path", type=click.Path(exists=True))
def verdicts(path: str):
    """Re-evaluate the verdicts of a report; exits with the verdict status."""
    summary = evaluate_verdicts(_load(path))
    RunConsole(console).show_verdicts(summary.to_dict())
    sys.exit(summary.exit_code)
