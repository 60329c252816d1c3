"""Probabilities and expectations on truncated atomic spaces.

The tail beyond the tracked prefix never contributes: random variables are
undefined there, so expectations and probabilities ignore it and callers
report ``tail_mass`` as an error bar.
"""

import math
from typing import Iterable, Optional

import numpy as np

from ..errors import StructuralError
from ..models import AtomicSpace, EquivalentMeasure, SimpleRV


def probability_of(space: AtomicSpace, atom_indices: Iterable[int]) -> float:
    """P(union of the atoms at the given 0-based positions)."""
    positions = set(atom_indices)
    for position in positions:
        if not (0 <= position < space.size):
            raise StructuralError(f"atom position {position} outside 0..{space.size - 1}")
    return math.fsum(space.masses[position] for position in sorted(positions))


def probability_of_labels(space: AtomicSpace, labels: Iterable[int]) -> float:
    return probability_of(space, (space.position_of(label) for label in labels))


def atom_weights(space: AtomicSpace, measure: Optional[EquivalentMeasure] = None) -> np.ndarray:
    """Per-position masses under ``measure`` (or P), aligned with ``space``."""
    if measure is None:
        return space.mass_array
    if set(measure.labels) != set(space.labels):
        raise StructuralError("measure and space track different atoms")
    return np.array([measure.probability_of_label(label) for label in space.labels])


def expectation(
    space: AtomicSpace,
    rv: SimpleRV,
    measure: Optional[EquivalentMeasure] = None,
) -> float:
    """E[rv] under ``measure`` or the base measure, tail excluded."""
    if len(rv) != space.size:
        raise StructuralError(f"random variable has {len(rv)} values for {space.size} atoms")
    weights = atom_weights(space, measure)
    values = rv.values
    charged = weights > 0
    if np.isinf(values[charged]).any():
        return math.inf
    return math.fsum((values[charged] * weights[charged]).tolist())


def exceedance_probability(space: AtomicSpace, rv: SimpleRV, level: float) -> float:
    """P(X > level) over tracked atoms."""
    return math.fsum(space.mass_array[rv.values > level].tolist())


def upper_quantile(space: AtomicSpace, rv: SimpleRV, epsilon: float) -> float:
    """Smallest value v taken by ``rv`` with P(X > v) <= epsilon."""
    order = np.argsort(rv.values, kind="stable")
    values = rv.values[order]
    masses = space.mass_array[order]
    # mass strictly above values[i] once ties are merged
    above = np.concatenate([np.cumsum(masses[::-1])[::-1][1:], [0.0]])
    for i, value in enumerate(values):
        if i + 1 < len(values) and values[i + 1] == value:
            continue
        if above[i] <= epsilon + 1e-15:
            return float(value)
    return float(values[-1])
