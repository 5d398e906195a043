"""CSV output for scenario runs.

One header row, one row per grid point written with ``%.17g``, then ``#``
footer lines with the run parameters, the physicality report and the
cutoff check.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .scenarios import ScenarioResult


def footer_lines(result: "ScenarioResult") -> list[str]:
    from .scenarios import config_to_text

    meta = result.trajectory.meta
    lines = ["config " + line for line in config_to_text(result.config).splitlines()]
    lines += result.report.lines()
    lines += [f"steps accepted={meta.get('accepted', 0)} rejected={meta.get('rejected', 0)}"]
    lines += result.notes
    return lines


def write_csv(result: "ScenarioResult", path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(result.columns)
        for row in result.table:
            w.writerow(["%.17g" % v for v in row])
        for line in footer_lines(result):
            fh.write("# " + line + "\n")
    return path


@dataclass
class CsvTable:
    columns: list[str]
    data: np.ndarray
    footer: list[str] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]


def read_csv(path: str | Path) -> CsvTable:
    rows, footer = [], []
    with Path(path).open() as fh:
        header = next(csv.reader([fh.readline()]))
        for line in fh:
            if line.startswith("#"):
                footer.append(line[1:].strip())
            elif line.strip():
                rows.append([float(x) for x in line.split(",")])
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return CsvTable(header, data, footer)
