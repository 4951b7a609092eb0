# Report writing and verdict evaluation
from .report_generator import ReportWriter, dump_json, load_report
from .verdicts import VerdictSummary, evaluate_verdicts, exit_code, identity_holds
