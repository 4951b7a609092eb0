import json
import math

import numpy as np
import pandas as pd
import pytest
from rich.console import Console

from src.analysis.report_generator import ReportWriter, dump_json, load_report, step_table
from src.analysis.verdicts import EXIT_PASS, EXIT_VERDICT, evaluate_verdicts, exit_code, identity_holds
from src.logging.logger import RunConsole


class TestVerdicts:
    def test_passing_report(self, sample_report):
        summary = evaluate_verdicts(sample_report())
        assert summary.mandatory == {"condition_R": True, "condition_K": True, "hessian_identity": True,
                                     "iteration_completed": True}
        assert summary.informational == {"condition_I": False, "eigen_bound": False, "cauchy": True}
        assert summary.exit_code == EXIT_PASS
        assert summary.to_dict()["failed"] == []

    def test_informational_failures_do_not_change_exit(self, sample_report):
        report = sample_report()
        report["iteration"]["convergence"]["cauchy"] = False
        assert evaluate_verdicts(report).exit_code == EXIT_PASS

    def test_halt_fails(self, sample_report):
        halt = {"nu": 0, "kind": "divisor", "message": "resonant mode(s) (1, 1, 0, 0, 0, 0)", "details": {}}
        summary = evaluate_verdicts(sample_report(halt=halt))
        assert summary.failed == ["iteration_completed"]
        assert summary.exit_code == EXIT_VERDICT

    def test_skipped_iteration_fails(self, sample_report):
        report = sample_report(k_pass=False)
        report["iteration"] = None
        report["skipped"] = {"iteration": "required condition(s) K failed"}
        summary = evaluate_verdicts(report)
        assert summary.failed == ["condition_K", "iteration_completed"]

    def test_measure_verdicts(self, sample_report, measure_document):
        summary = evaluate_verdicts(sample_report(measure=measure_document))
        assert summary.mandatory["measure_fit"]
        assert summary.informational["measure_beta_ge_1_over_N"]
        failed = evaluate_verdicts(sample_report(measure={"error": "resonance set is empty at gamma=0.001"}))
        assert failed.failed == ["measure_fit"]

    def test_exit_status_depends_only_on_mandatory(self):
        assert exit_code({}) == EXIT_PASS
        assert exit_code({"a": True, "b": False}) == EXIT_VERDICT

    @pytest.mark.parametrize("computed, expected, holds", [
        (1.0 + 1e-12, 1.0, True),
        (1.0 + 1e-8, 1.0, False),
        (-6.4e-53 * (1 + 5e-11), -6.4e-53, True),
        (0.0, 0.0, True),
        (1e-300, 0.0, False),
    ])
    def test_identity_holds(self, computed, expected, holds):
        assert identity_holds(computed, expected) is holds


class TestReportWriter:
    def test_writes_report_and_tables(self, sample_report, measure_document, tmp_path):
        report = sample_report(measure=measure_document)
        written = ReportWriter(tmp_path / "run").write(report)
        assert set(written) == {"report", "schedule", "steps", "measure", "conditions"}
        assert load_report(tmp_path / "run") == json.loads(dump_json(report))
        steps = pd.read_csv(written["steps"], float_precision="round_trip")
        assert list(steps["nu"]) == [0, 1]
        assert steps["new_error"][0] == 1e-38
        assert "divisor_min" in steps.columns
        conditions = pd.read_csv(written["conditions"])
        assert list(conditions["required"]) == [True, True, False]

    def test_full_precision_floats(self, sample_report, tmp_path):
        report = sample_report()
        report["iteration"]["trace"][0]["deviation"] = 0.1 + 0.2
        written = ReportWriter(tmp_path).write(report)
        with open(written["steps"]) as f:
            assert "0.30000000000000004" in f.read()

    def test_tables_optional(self, sample_report, tmp_path):
        written = ReportWriter(tmp_path).write(sample_report(), tables=False)
        assert set(written) == {"report"}

    def test_numpy_values_serialize(self):
        document = {"a": np.float64(1.5), "b": np.arange(3), "c": np.int64(7), "d": (1, 2), "e": math.inf}
        assert json.loads(dump_json(document)) == {"a": 1.5, "b": [0, 1, 2], "c": 7, "d": [1, 2], "e": math.inf}

    def test_step_table_without_iteration(self):
        assert step_table({"iteration": None}).empty

    def test_html_summary(self, sample_report, measure_document, tmp_path):
        report = sample_report(measure=measure_document)
        report["verdicts"] = evaluate_verdicts(report).to_dict()
        written = ReportWriter(tmp_path).write(report, html=True)
        html = (tmp_path / "summary.html").read_text(encoding="utf-8")
        assert written["html"] == str(tmp_path / "summary.html")
        assert "KAM Run Summary" in html
        assert "iteration_completed" in html
        assert "frequency_preserving:6" in html

    def test_runtime_beside_report(self, tmp_path):
        path = ReportWriter(tmp_path).write_runtime({"total_seconds": 0.5, "phases": []})
        assert json.loads(open(path).read())["total_seconds"] == 0.5


class TestRunConsole:
    def render(self, report):
        console = Console(record=True, width=160)
        RunConsole(console).show_report(report)
        return console.export_text()

    def test_tables(self, sample_report, measure_document):
        report = sample_report(measure=measure_document)
        report["verdicts"] = evaluate_verdicts(report).to_dict()
        text = self.render(report)
        for title in ("Non-degeneracy conditions", "KAM iteration", "Resonant set measure", "Verdicts"):
            assert title in text
        assert "hessian identity" in text

    def test_halt_and_measure_error(self, sample_report):
        halt = {"nu": 0, "kind": "divisor", "message": "resonant mode(s) (1, 1, 0, 0, 0, 0)", "details": {}}
        text = self.render(sample_report(halt=halt, measure={"error": "resonance set is empty at gamma=0.001"}))
        assert "Halted at step 0 (divisor)" in text
        assert "Measure estimate failed" in text

    def test_history(self):
        console = Console(record=True, width=160)
        RunConsole(console).show_history([
            {"id": 3, "mode": "full", "exit_code": 0, "steps": 5, "beta": None, "output_dir": "runs/a",
             "created_at": "2026-01-01 10:00"},
        ], {"database_path": "data/kam_runs.db", "tables": {"runs": 1, "run_steps": 5, "run_conditions": 3}})
        text = console.export_text()
        assert "Archived runs" in text and "runs/a" in text
        assert "Archive data/kam_runs.db: 1 run(s), 5 step(s), 3 condition(s)" in text
