"""Base coefficient family interface."""

from abc import ABC, abstractmethod
from typing import Dict, Iterable, Optional, Sequence

import numpy as np

from ..errors import StructuralError
from ..models import AtomTag


class CoefficientFamily(ABC):
    """Abstract doubly-indexed array c[n, m] with per-atom boundedness tags.

    ``n`` is the 1-based sequence index and ``m`` the 1-based atom label.
    Tag queries take an optional array of sequence indices: ``None`` asks
    about the full index range, an array asks about the subsequence it
    starts.
    """

    description: str = ""

    @abstractmethod
    def coefficients(self, indices: np.ndarray, label: int) -> np.ndarray:
        """Vector of c[n, label] for every n in ``indices``."""
        pass

    @abstractmethod
    def tag_for(self, label: int, indices: Optional[np.ndarray] = None) -> AtomTag:
        """Boundedness of n -> c[n, label] along ``indices`` (full range if None)."""
        pass

    def cesaro_tag_for(self, label: int, indices: Optional[np.ndarray] = None) -> AtomTag:
        """Boundedness of the running means of c[., label] along ``indices``."""
        tag = self.tag_for(label, indices)
        if tag.is_bounded:
            # means never exceed a bound on their terms
            return tag
        return AtomTag.unknown()

    def coefficient(self, n: int, label: int) -> float:
        return float(self.coefficients(np.array([n]), label)[0])

    def block(self, indices: Sequence[int], labels: Iterable[int]) -> np.ndarray:
        """Evaluation matrix with one row per index and one column per label."""
        index_array = np.asarray(indices, dtype=np.int64)
        columns = []
        for label in labels:
            column = np.asarray(self.coefficients(index_array, label), dtype=float)
            if column.shape != index_array.shape:
                raise StructuralError(
                    f"family returned {column.shape} values for {index_array.shape} indices"
                )
            if not np.isfinite(column).all() or (column < 0).any():
                raise StructuralError(
                    f"family produced a negative or non-finite coefficient on atom {label}"
                )
            columns.append(column)
        return np.column_stack(columns) if columns else np.empty((index_array.size, 0))

    def meta_for(
        self, labels: Iterable[int], indices: Optional[np.ndarray] = None
    ) -> Dict[int, AtomTag]:
        return {label: self.tag_for(label, indices) for label in labels}

    def cesaro_meta_for(
        self, labels: Iterable[int], indices: Optional[np.ndarray] = None
    ) -> Dict[int, AtomTag]:
        return {label: self.cesaro_tag_for(label, indices) for label in labels}

    def to_dict(self) -> Dict:
        return {"description": self.description}
