"""Report types and reproducible CSV / structured-text emission.

Numbers are printed with 17 significant digits and '.' decimals so a
rerun of the same config produces byte-identical files.  Overwrites are
idempotent: unchanged content is left untouched, changed content moves
the old file to a .bak sibling first.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .errors import CheckFailure

__all__ = [
    "CheckRecord",
    "ScenarioReport",
    "emit_report",
    "format_number",
    "read_verdict",
]


def format_number(x) -> str:
    """Canonical numeric text: 17 significant digits, integers kept short."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.17g}"


@dataclass(frozen=True)
class CheckRecord:
    """One verified claim: the number, the tolerance it met, the verdict."""

    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        text = (
            f"check {self.name}: {verdict} value={format_number(self.value)} "
            f"tolerance={format_number(self.tolerance)}"
        )
        if self.detail:
            text += f" ({self.detail})"
        return text


@dataclass(frozen=True)
class ScenarioReport:
    """Everything a scenario measured, ready for emission.

    tables maps a name to (column names, rows); fits maps a name to a
    flat record dict.  The provenance block (config hash, seed, version)
    rides in the header of every file written from this report.
    """

    scenario: str
    config_hash: str
    seed: int
    checks: tuple = ()
    tables: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def require(self) -> "ScenarioReport":
        """Raise CheckFailure carrying the first failing check, else self."""
        for c in self.checks:
            if not c.passed:
                raise CheckFailure(
                    f"scenario {self.scenario}: {c.line()}",
                    check=c.name,
                    value=c.value,
                    tolerance=c.tolerance,
                )
        return self


def _header_lines(report: ScenarioReport) -> list[str]:
    return [
        f"# scenario: {report.scenario}",
        f"# config: {report.config_hash}",
        f"# seed: {report.seed}",
        f"# version: {__version__}",
    ]


def _write_if_changed(path: Path, content: str) -> Path:
    data = content.encode("utf-8")
    if path.exists():
        if path.read_bytes() == data:
            return path
        backup = path.with_name(path.name + ".bak")
        os.replace(path, backup)
    path.write_bytes(data)
    return path


def _csv_text(report: ScenarioReport, columns, rows) -> str:
    lines = _header_lines(report)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_number(x) for x in row))
    return "\n".join(lines) + "\n"


def _summary_text(report: ScenarioReport, table_files: dict) -> str:
    lines = ["# decaylab scenario report"]
    lines += _header_lines(report)
    lines.append(f"verdict: {'PASS' if report.passed else 'FAIL'}")
    for check in report.checks:
        lines.append(check.line())
    for name in sorted(report.fits):
        record = report.fits[name]
        body = " ".join(f"{k}={format_number(v)}" for k, v in sorted(record.items()))
        lines.append(f"fit {name}: {body}")
    for name in sorted(table_files):
        lines.append(f"table {name}: {table_files[name]}")
    return "\n".join(lines) + "\n"


def emit_report(report: ScenarioReport, path) -> list[Path]:
    """Write <path>.txt plus one CSV per table; returns paths written.

    An empty report still produces the header-only summary, so a run
    always leaves its provenance on disk.
    """
    base = Path(path)
    base.parent.mkdir(parents=True, exist_ok=True)
    written = []
    table_files = {}
    for name in sorted(report.tables):
        columns, rows = report.tables[name]
        csv_path = base.with_name(f"{base.name}_{name}.csv")
        _write_if_changed(csv_path, _csv_text(report, columns, rows))
        table_files[name] = csv_path.name
        written.append(csv_path)
    summary = base.with_name(base.name + ".txt")
    _write_if_changed(summary, _summary_text(report, table_files))
    written.insert(0, summary)
    return written


def read_verdict(path) -> bool:
    """Read a summary file back; True iff its verdict line says PASS."""
    text = Path(path).read_text(encoding="utf-8")
    for line in text.splitlines():
        if line.startswith("verdict:"):
            return line.split(":", 1)[1].strip() == "PASS"
    raise CheckFailure(f"no verdict line in {path}")
