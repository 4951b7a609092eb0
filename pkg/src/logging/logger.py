"""
Structured logging setup and the rich console view of a run.
"""

import logging
import sys
from typing import Any, Dict, Optional

import structlog
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

LOG_LEVELS = ("debug", "info", "warning", "error")


def configure_logging(level: str = "warning", json_output: bool = False) -> None:
    """Route structlog events to stderr; stdout stays free for command output."""
    numeric = getattr(logging, level.upper(), logging.WARNING)
    renderer = structlog.processors.JSONRenderer() if json_output else structlog.dev.ConsoleRenderer(colors=False)
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


def _num(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, (int, float)):
        return f"{value:.4g}"
    return str(value)


def _ok(flag: bool) -> str:
    return "[green]pass[/green]" if flag else "[red]FAIL[/red]"


class RunConsole:
    """Renders report documents as rich tables."""

    def __init__(self, console: Optional[Console] = None):
        self.console = console or Console()

    def show_report(self, report: Dict[str, Any]) -> None:
        tool = report.get("tool", {})
        self.console.print(Panel(
            f"Mode: {report.get('mode')}\n"
            f"Stages: {', '.join(report.get('stages', []))}\n"
            f"Scales ordered: {_num(report.get('scales_ordered'))}\n"
            f"Exit code: {report.get('exit_code')}",
            title=f"{tool.get('name', 'run')} {tool.get('version', '')}".strip(),
        ))
        if report.get("conditions"):
            self.show_conditions(report)
        if report.get("iteration"):
            self.show_iteration(report["iteration"])
        for stage, reason in (report.get("skipped") or {}).items():
            self.console.print(f"[yellow]{stage} skipped: {reason}[/yellow]")
        if report.get("measure"):
            self.show_measure(report["measure"])
        if report.get("verdicts"):
            self.show_verdicts(report["verdicts"])

    def show_conditions(self, report: Dict[str, Any]) -> None:
        required = set(report.get("required_conditions", []))
        table = Table(title="Non-degeneracy conditions")
        table.add_column("Condition", style="cyan")
        table.add_column("Required")
        table.add_column("Result")
        table.add_column("Margin", justify="right")
        table.add_column("Threshold", justify="right")
        for cid, entry in report["conditions"].items():
            table.add_row(cid, _num(cid in required), _ok(entry["pass"]),
                          _num(entry["margin"]), _num(entry["threshold"]))
        for name, entry in (report.get("identities") or {}).items():
            table.add_row(f"{name} identity", "yes", _ok(entry["pass"]),
                          _num(entry["computed"]), _num(entry["expected"]))
        if report.get("eigen"):
            eigen = report["eigen"]
            table.add_row("eigen bound", "no", _ok(eigen["pass"]), _num(eigen["lambda_min"]), _num(eigen["bound"]))
        self.console.print(table)

    def show_iteration(self, iteration: Dict[str, Any]) -> None:
        table = Table(title=f"KAM iteration (stop: {iteration.get('stop_reason')})")
        table.add_column("nu", justify="right", style="cyan")
        table.add_column("error", justify="right")
        table.add_column("new error", justify="right")
        table.add_column("target", justify="right")
        table.add_column("ratio", justify="right")
        table.add_column("min divisor", justify="right")
        table.add_column("accepted")
        for step in iteration.get("steps", []):
            table.add_row(str(step["nu"]), _num(step["old_error"]), _num(step["new_error"]),
                          _num(step["target_error"]), _num(step["contraction_ratio"]),
                          _num(step["divisor_min"]), _ok(step["accepted"]))
        self.console.print(table)
        halt = iteration.get("halt")
        if halt:
            self.console.print(f"[red]Halted at step {halt['nu']} ({halt['kind']}): {halt['message']}[/red]")
        convergence = iteration.get("convergence")
        if convergence:
            self.console.print(f"Deviation sum {_num(convergence['partial_sums'][-1])}, "
                               f"product bound {_num(convergence['product_bound'])}, "
                               f"Cauchy: {_num(convergence['cauchy'])}")

    def show_measure(self, measure: Dict[str, Any]) -> None:
        if "error" in measure:
            self.console.print(f"[red]Measure estimate failed: {measure['error']}[/red]")
            return
        table = Table(title="Resonant set measure")
        table.add_column("gamma", justify="right", style="cyan")
        table.add_column("estimate", justify="right")
        table.add_column("stderr", justify="right")
        table.add_column("hits", justify="right")
        for point in measure["points"]:
            table.add_row(_num(point["gamma"]), _num(point["estimate"]), _num(point["stderr"]), str(point["hits"]))
        self.console.print(table)
        lo, hi = measure["ci"]
        self.console.print(f"beta = {_num(measure['beta'])} +/- {_num(measure['stderr'])} "
                           f"(95% CI {_num(lo)} .. {_num(hi)}), N = {measure['N']}")
        for note in measure.get("notes", []):
            self.console.print(f"[yellow]{note}[/yellow]")

    def show_verdicts(self, verdicts: Dict[str, Any]) -> None:
        table = Table(title="Verdicts")
        table.add_column("Verdict", style="cyan")
        table.add_column("Kind")
        table.add_column("Result")
        for name, ok in verdicts.get("mandatory", {}).items():
            table.add_row(name, "mandatory", _ok(ok))
        for name, ok in verdicts.get("informational", {}).items():
            table.add_row(name, "informational", _ok(ok))
        self.console.print(table)

    def show_config_errors(self, messages) -> None:
        self.console.print(Panel("\n".join(messages), title="Configuration errors", style="red"))

    def show_history(self, runs, info: Optional[Dict[str, Any]] = None) -> None:
        if info is not None:
            counts = info["tables"]
            self.console.print(f"Archive {info['database_path']}: {counts['runs']} run(s), "
                               f"{counts['run_steps']} step(s), {counts['run_conditions']} condition(s)")
        if not runs:
            self.console.print("[yellow]No archived runs found[/yellow]")
            return
        table = Table(title="Archived runs")
        table.add_column("ID", justify="right", style="cyan")
        table.add_column("Mode", style="green")
        table.add_column("Exit", justify="right")
        table.add_column("Steps", justify="right")
        table.add_column("beta", justify="right")
        table.add_column("Output", style="dim")
        table.add_column("Created", style="dim")
        for run in runs:
            table.add_row(str(run["id"]), run["mode"], str(run["exit_code"]), str(run["steps"]),
                          _num(run["beta"]), run["output_dir"] or "-", run["created_at"])
        self.console.print(table)
