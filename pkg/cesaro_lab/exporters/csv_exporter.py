"""CSV plot-data exporter."""

import csv
from pathlib import Path
from typing import Any, List, Optional, Sequence

import numpy as np

from ..models import RunReport

# series name -> (file name, header); values are 2-D, one row per k (or per path)
SERIES_FILES = {
    "cesaro": ("trajectories.csv", ("k", "atom", "value")),
    "envelope": ("envelopes.csv", ("k", "epsilon", "value")),
    "paths": ("slln_trajectories.csv", ("path", "n", "value")),
}


class CSVExporter:
    """Writes the long-format CSV files behind a report's plots."""

    def __init__(self, report: RunReport):
        self.report = report

    def export(self, output_dir: Path) -> List[Path]:
        written = []
        for name in sorted(self.report.series):
            if name not in SERIES_FILES:
                continue
            file_name, header = SERIES_FILES[name]
            path = output_dir / file_name
            self._write(path, header, self.report.series[name], self.report.series_keys.get(name))
            written.append(path)
        return written

    def _write(
        self,
        path: Path,
        header: Sequence[str],
        values: np.ndarray,
        keys: Optional[List[Any]],
    ) -> None:
        columns = keys or list(range(1, values.shape[1] + 1))
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            if header[0] == "path":
                for path_index, row in enumerate(values, start=1):
                    for n, value in zip(columns, row):
                        writer.writerow((path_index, n, repr(float(value))))
                return
            for k, row in enumerate(values, start=1):
                for key, value in zip(columns, row):
                    writer.writerow((k, key, repr(float(value))))
