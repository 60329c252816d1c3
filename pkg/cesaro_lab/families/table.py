"""Table families read from CSV."""

import csv
import logging
import math
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence

import numpy as np

from ..errors import StructuralError
from ..models import AtomTag
from .base import CoefficientFamily

logger = logging.getLogger(__name__)


class TableFamily(CoefficientFamily):
    """Finite table of coefficients: rows are sequence indices, columns atoms."""

    def __init__(
        self,
        indices: Sequence[int],
        labels: Sequence[int],
        values: np.ndarray,
        meta: Optional[Mapping[int, AtomTag]] = None,
        cesaro_meta: Optional[Mapping[int, AtomTag]] = None,
        description: str = "table",
        source: Optional[Path] = None,
    ):
        values = np.asarray(values, dtype=float)
        if values.shape != (len(indices), len(labels)):
            raise StructuralError(
                f"table shape {values.shape} does not match "
                f"{len(indices)} rows x {len(labels)} atoms"
            )
        if not np.isfinite(values).all() or (values < 0).any():
            raise StructuralError("table coefficients must be finite and nonnegative")
        if any(b <= a for a, b in zip(indices, indices[1:])) or (indices and indices[0] < 1):
            raise StructuralError("table row indices must be strictly increasing positive integers")
        self.indices = np.asarray(indices, dtype=np.int64)
        self.labels = list(labels)
        self.values = values
        self.meta = dict(meta or {})
        self.cesaro_meta = dict(cesaro_meta or {})
        self.description = description
        self.source = source
        self._row_of = {int(n): row for row, n in enumerate(self.indices)}
        self._column_of = {label: column for column, label in enumerate(self.labels)}

    @classmethod
    def from_csv(
        cls,
        path: Path,
        meta: Optional[Mapping[int, AtomTag]] = None,
        cesaro_meta: Optional[Mapping[int, AtomTag]] = None,
    ) -> "TableFamily":
        """Read ``n,<atom>,<atom>,...`` with one row per sequence index."""
        path = Path(path)
        with path.open(newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise StructuralError(f"{path}: empty table") from None
            if len(header) < 2:
                raise StructuralError(f"{path}: header needs an index column and at least one atom")
            try:
                labels = [int(name) for name in header[1:]]
            except ValueError:
                raise StructuralError(
                    f"{path}: atom names in the header must be integer labels"
                ) from None

            indices = []
            rows = []
            for line_number, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header) or any(cell.strip() == "" for cell in row):
                    raise StructuralError(f"{path}:{line_number}: missing cell")
                try:
                    indices.append(int(row[0]))
                    rows.append([float(cell) for cell in row[1:]])
                except ValueError:
                    raise StructuralError(f"{path}:{line_number}: non-numeric cell") from None

        if not rows:
            raise StructuralError(f"{path}: table has no rows")
        logger.debug("loaded table %s: %d rows x %d atoms", path, len(rows), len(labels))
        return cls(
            indices,
            labels,
            np.array(rows),
            meta=meta,
            cesaro_meta=cesaro_meta,
            description=f"table {path.name}",
            source=path,
        )

    @classmethod
    def from_array(
        cls,
        values: np.ndarray,
        labels: Optional[Sequence[int]] = None,
        **kwargs: Any,
    ) -> "TableFamily":
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        labels = list(labels) if labels is not None else list(range(1, values.shape[1] + 1))
        return cls(list(range(1, values.shape[0] + 1)), labels, values, **kwargs)

    @property
    def max_index(self) -> int:
        return int(self.indices[-1])

    def coefficients(self, indices: np.ndarray, label: int) -> np.ndarray:
        if label not in self._column_of:
            raise StructuralError(f"table has no column for atom {label}")
        try:
            rows = [self._row_of[int(n)] for n in indices]
        except KeyError as e:
            raise StructuralError(f"table has no row for sequence index {e.args[0]}") from None
        return self.values[rows, self._column_of[label]]

    def tag_for(self, label: int, indices: Optional[np.ndarray] = None) -> AtomTag:
        return self.meta.get(label, AtomTag.unknown())

    def cesaro_tag_for(self, label: int, indices: Optional[np.ndarray] = None) -> AtomTag:
        if label in self.cesaro_meta:
            return self.cesaro_meta[label]
        return super().cesaro_tag_for(label, indices)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "description": self.description,
            "rows": int(self.indices.size),
            "atoms": self.labels,
        }
        if self.source is not None:
            data["path"] = str(self.source)
        return data


def tag_from_meta(value: Any) -> AtomTag:
    """Parse a config meta entry: "unbounded", "unknown" or {"bounded": C}."""
    if value == "unbounded":
        return AtomTag.unbounded()
    if value == "unknown":
        return AtomTag.unknown()
    if isinstance(value, Mapping) and set(value) == {"bounded"}:
        bound = float(value["bounded"])
        if not math.isfinite(bound) or bound < 0:
            raise StructuralError(f"declared bound {bound!r} must be finite and nonnegative")
        return AtomTag.bounded(bound)
    raise StructuralError(
        f"meta entry {value!r} must be 'unbounded', 'unknown' or {{'bounded': C}}"
    )
