"""
Writes run results to an output directory.

Files: report.json (the self-contained report), runtime.json (wall-clock
timings), CSV tables for the schedule, the iteration trace and the measure
curve, and an optional HTML summary.
"""

import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pandas as pd
import structlog
from jinja2 import Environment, FileSystemLoader, select_autoescape

from .. import __version__

logger = structlog.get_logger(__name__)

TEMPLATE_DIR = Path(__file__).parent / "templates"
FLOAT_FORMAT = "%.17g"


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (set, tuple)):
        return list(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dump_json(document: Dict[str, Any]) -> str:
    return json.dumps(document, indent=2, default=_jsonable) + "\n"


def load_report(path) -> Dict[str, Any]:
    """Load a report.json, given the file or the run directory holding it."""
    path = Path(path)
    if path.is_dir():
        path = path / "report.json"
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def step_table(report: Dict[str, Any]) -> pd.DataFrame:
    """One row per iteration step: trace columns joined with step diagnostics."""
    iteration = report.get("iteration") or {}
    trace = pd.DataFrame(iteration.get("trace", []))
    steps = iteration.get("steps", [])
    if trace.empty:
        return trace
    extra = pd.DataFrame(
        [
            {
                "nu": step["nu"],
                "divisor_min": step["divisor_min"],
                "f_norm": step["f_norm"],
                "lie_remainder": step["lie_remainder"],
                "energy_change": step["energy_change"],
                "accepted": step["accepted"],
            }
            for step in steps
        ]
    )
    if extra.empty:
        return trace
    return trace.merge(extra, on="nu", how="left")


def schedule_table(report: Dict[str, Any]) -> pd.DataFrame:
    return pd.DataFrame(report.get("schedule", []))


def measure_table(report: Dict[str, Any]) -> pd.DataFrame:
    measure = report.get("measure") or {}
    return pd.DataFrame(measure.get("points", []))


def condition_table(report: Dict[str, Any]) -> pd.DataFrame:
    required = set(report.get("required_conditions", []))
    rows: List[Dict[str, Any]] = [
        {
            "condition": cid,
            "required": cid in required,
            "pass": entry["pass"],
            "margin": entry["margin"],
            "threshold": entry["threshold"],
        }
        for cid, entry in (report.get("conditions") or {}).items()
    ]
    return pd.DataFrame(rows)


class ReportWriter:
    """Writes a report document and its tables under output_dir."""

    def __init__(self, output_dir="runs/latest"):
        self.output_dir = Path(output_dir)

    def write(self, report: Dict[str, Any], tables: bool = True, html: bool = False) -> Dict[str, str]:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        written: Dict[str, str] = {}

        written["report"] = self._write_text("report.json", dump_json(report))

        if tables:
            for name, frame in (
                ("schedule", schedule_table(report)),
                ("steps", step_table(report)),
                ("measure", measure_table(report)),
                ("conditions", condition_table(report)),
            ):
                if frame.empty:
                    continue
                path = self.output_dir / f"{name}.csv"
                frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
                written[name] = str(path)

        if html:
            written["html"] = self.write_html(report)

        logger.info("report_written", output_dir=str(self.output_dir), files=sorted(written))
        return written

    def write_html(self, report: Dict[str, Any]) -> str:
        env = Environment(loader=FileSystemLoader(str(TEMPLATE_DIR)), autoescape=select_autoescape(["html"]))
        env.filters["num"] = lambda v: "-" if v is None else f"{v:.6g}"
        template = env.get_template("run_summary.html")
        html_content = template.render(
            report=report,
            steps=step_table(report).to_dict(orient="records"),
            generated=datetime.now().strftime("%Y-%m-%d %H:%M:%S"),
            version=__version__,
        )
        return self._write_text("summary.html", html_content)

    def write_runtime(self, runtime: Dict[str, Any]) -> str:
        """Write runtime.json (phase timings) next to the report."""
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self._write_text("runtime.json", dump_json(runtime))

    def _write_text(self, name: str, content: str) -> str:
        path = self.output_dir / name
        with open(path, "w", encoding="utf-8") as f:
            f.write(content)
        return str(path)
