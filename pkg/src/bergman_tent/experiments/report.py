"""
CSV and summary output of experiment reports.

Files are written to a temporary sibling first and then renamed into place,
so a crashed run never leaves a truncated report behind.
"""

import csv
import io
import logging
import os
import tempfile
from pathlib import Path
from typing import List

from bergman_tent.experiments.model import ExperimentReport, Verdict

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["experiment", "cell", "function", "metric", "value", "converged", "regime"]

POLICY_NOTES = [
    "Constants and tolerances below are report policy, not quantities from the theory:",
    "  comparable = ratio band spread within the spread limit and |slope| of log-ratio",
    "  against -log(1 - |a|) within the slope limit; values moving by more than the",
    "  convergence tolerance under resolution doubling are flagged unconverged and",
    "  excluded from every verdict.",
]

Q1_NOTE = "Rows marked regime=q1 were computed with q = 1, where the functionals are L^1 means."


def header_line(report: ExperimentReport) -> str:
    return f"# bergman-tent seed={report.seed} experiment={report.experiment}"


def format_value(value: float) -> str:
    """17 significant digits, '.' decimal separator, round-trip exact."""
    return format(value, ".17g")


def render_csv(report: ExperimentReport) -> str:
    buffer = io.StringIO()
    buffer.write(header_line(report) + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for record in report.records:
        writer.writerow(
            [
                record.experiment,
                record.cell,
                record.function,
                record.metric,
                format_value(record.value),
                "true" if record.converged else "false",
                record.regime,
            ]
        )
    return buffer.getvalue()


def _verdict_line(verdict: Verdict) -> str:
    status = "PASS" if verdict.passed else "FAIL"
    stats = ", ".join(f"{key}={value:.6g}" for key, value in verdict.statistics.items())
    line = f"{status} {verdict.name} [{verdict.cell}]"
    if stats:
        line += f" {stats}"
    if verdict.detail:
        line += f" ({verdict.detail})"
    return line


def render_summary(report: ExperimentReport) -> str:
    lines: List[str] = [header_line(report), ""]
    lines.append("Configuration:")
    lines.extend(f"  {key} = {value!r}" for key, value in report.config.items())
    lines.append("")
    lines.extend(POLICY_NOTES)
    lines.append("")
    lines.append(f"Verdicts ({sum(v.passed for v in report.verdicts)}/{len(report.verdicts)} passed):")
    lines.extend(f"  {_verdict_line(verdict)}" for verdict in report.verdicts)
    notes = list(report.notes)
    if any(record.regime == "q1" for record in report.records):
        notes.append(Q1_NOTE)
    unconverged = sum(not record.converged for record in report.records)
    if unconverged:
        notes.append(f"{unconverged} rows were flagged unconverged and left out of the verdicts.")
    if notes:
        lines.append("")
        lines.append("Notes:")
        lines.extend(f"  {note}" for note in notes)
    lines.append("")
    lines.append(f"Overall: {'PASS' if report.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, temp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(temp_name, path)
    except BaseException:
        Path(temp_name).unlink(missing_ok=True)
        raise


def write_report(report: ExperimentReport, out_dir: Path) -> tuple[Path, Path]:
    """Write `<name>.csv` and `<name>.summary.txt` into out_dir."""
    csv_path = out_dir / f"{report.experiment}.csv"
    summary_path = out_dir / f"{report.experiment}.summary.txt"
    write_atomic(csv_path, render_csv(report))
    write_atomic(summary_path, render_summary(report))
    logger.info(f"Wrote {csv_path} and {summary_path}")
    return csv_path, summary_path
