"""Sequence windows, Cesàro means and convex combinations."""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..errors import StructuralError
from ..models import AtomicSpace, AtomTag, HullKind, SimpleRV
from .base import CoefficientFamily

WEIGHT_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class SequenceWindow:
    """Probed subsequence n_1 < ... < n_K of a family over a space."""
    family: CoefficientFamily
    indices: Tuple[int, ...]
    space: AtomicSpace
    selection: str = "explicit"

    hull = HullKind.BASE

    def __post_init__(self) -> None:
        indices = tuple(int(n) for n in self.indices)
        if not indices:
            raise StructuralError("a window needs at least one index")
        if indices[0] < 1 or any(b <= a for a, b in zip(indices, indices[1:])):
            raise StructuralError("window indices must be strictly increasing positive integers")
        object.__setattr__(self, "indices", indices)

    @classmethod
    def first(cls, family: CoefficientFamily, space: AtomicSpace, horizon: int) -> "SequenceWindow":
        if horizon < 1:
            raise StructuralError(f"horizon {horizon} must be positive")
        return cls(family, tuple(range(1, horizon + 1)), space, selection="horizon")

    @property
    def length(self) -> int:
        return len(self.indices)

    @property
    def index_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.int64)

    @cached_property
    def matrix(self) -> np.ndarray:
        """K x atoms array of c[n_k, m]."""
        values = self.family.block(self.indices, self.space.labels)
        values.setflags(write=False)
        return values

    @cached_property
    def cesaro_matrix(self) -> np.ndarray:
        """Running means along the window, row k-1 holding the mean of the first k rows."""
        counts = np.arange(1, self.length + 1, dtype=float)[:, None]
        values = np.cumsum(self.matrix, axis=0) / counts
        values.setflags(write=False)
        return values

    def evaluate(self, k: int) -> SimpleRV:
        self._check_position(k)
        return SimpleRV(self.matrix[k - 1])

    def cesaro(self, k: int) -> SimpleRV:
        """Mean of the first k evaluations, summed exactly per atom."""
        self._check_position(k)
        head = self.matrix[:k]
        means = [math.fsum(head[:, j].tolist()) / k for j in range(head.shape[1])]
        return SimpleRV(np.array(means))

    def atom_tags(self) -> Dict[int, AtomTag]:
        return self.family.meta_for(self.space.labels, self.index_array)

    def full_range_tags(self) -> Dict[int, AtomTag]:
        return self.family.meta_for(self.space.labels, None)

    def subwindow(self, start: int, stop: int) -> "SequenceWindow":
        """Positions start..stop (1-based, inclusive) as their own window."""
        if not (1 <= start <= stop <= self.length):
            raise StructuralError(f"sub-window {start}..{stop} outside 1..{self.length}")
        return SequenceWindow(
            self.family, self.indices[start - 1:stop], self.space, selection="subwindow"
        )

    def permuted_matrix(self, order: Sequence[int]) -> np.ndarray:
        if sorted(order) != list(range(self.length)):
            raise StructuralError("order must be a permutation of window positions")
        return self.matrix[list(order)]

    def _check_position(self, k: int) -> None:
        if not (1 <= k <= self.length):
            raise StructuralError(f"window position {k} outside 1..{self.length}")


class CesaroFamily:
    """The Cesàro means of a window, exposed with the window's interface."""

    hull = HullKind.CESARO

    def __init__(self, base: SequenceWindow):
        self.base = base

    @property
    def space(self) -> AtomicSpace:
        return self.base.space

    @property
    def family(self) -> CoefficientFamily:
        return self.base.family

    @property
    def indices(self) -> Tuple[int, ...]:
        return self.base.indices

    @property
    def length(self) -> int:
        return self.base.length

    @property
    def matrix(self) -> np.ndarray:
        return self.base.cesaro_matrix

    def evaluate(self, k: int) -> SimpleRV:
        return self.base.cesaro(k)

    def atom_tags(self) -> Dict[int, AtomTag]:
        return self.base.family.cesaro_meta_for(self.space.labels, self.base.index_array)

    def full_range_tags(self) -> Dict[int, AtomTag]:
        return self.base.family.cesaro_meta_for(self.space.labels, None)


def evaluate(window: SequenceWindow, k: int) -> SimpleRV:
    return window.evaluate(k)


def cesaro(window: SequenceWindow, k: int) -> SimpleRV:
    return window.cesaro(k)


def convex_combination(rvs: Sequence[SimpleRV], weights: Sequence[float]) -> SimpleRV:
    """Pointwise sum of weights[i] * rvs[i]."""
    if not rvs:
        raise StructuralError("convex combination of no random variables")
    if len(rvs) != len(weights):
        raise StructuralError(f"{len(rvs)} random variables but {len(weights)} weights")
    weight_list: List[float] = [float(w) for w in weights]
    if any(w < 0 for w in weight_list):
        raise StructuralError("convex weights must be nonnegative")
    total = math.fsum(weight_list)
    if abs(total - 1.0) > WEIGHT_TOLERANCE:
        raise StructuralError(f"convex weights sum to {total!r}, not 1")
    sizes = {len(rv) for rv in rvs}
    if len(sizes) != 1:
        raise StructuralError("random variables in a combination must have equal length")
    stacked = np.vstack([rv.values for rv in rvs])
    combined = np.array([
        math.fsum((stacked[:, j] * np.asarray(weight_list)).tolist())
        for j in range(stacked.shape[1])
    ])
    return SimpleRV(combined, is_limit=any(rv.is_limit for rv in rvs))
