"""Dyadic growth probe shared by every divergence decision."""

import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from ..models import AtomTag

logger = logging.getLogger(__name__)

GROWTH_FACTOR = 1.5
MIN_GROWTH_BLOCKS = 3
PROBE_MARGIN = 1.1


def block_maxima(values: np.ndarray) -> List[float]:
    """Maxima over positions [2^j, 2^(j+1)), positions counted from 1."""
    values = np.asarray(values, dtype=float)
    maxima = []
    start = 1
    while start <= values.size:
        stop = min(2 * start, values.size + 1)
        maxima.append(float(values[start - 1:stop - 1].max()))
        start *= 2
    return maxima


def diverges(
    values: np.ndarray,
    factor: float = GROWTH_FACTOR,
    min_blocks: int = MIN_GROWTH_BLOCKS,
) -> bool:
    """True when the last block maximum outgrows an earlier positive one.

    Block J diverges against block i <= J - min_blocks when
    B_J >= factor ** (J - i) * B_i.
    """
    maxima = block_maxima(values)
    last = len(maxima) - 1
    if last < min_blocks:
        return False
    top = maxima[last]
    return any(
        maxima[i] > 0 and top >= factor ** (last - i) * maxima[i]
        for i in range(last - min_blocks + 1)
    )


@dataclass(frozen=True)
class GrowthProbe:
    """Classifies an atom with Unknown metadata from its observed values."""
    factor: float = GROWTH_FACTOR
    min_blocks: int = MIN_GROWTH_BLOCKS
    margin: float = PROBE_MARGIN

    def classify(self, values: np.ndarray) -> AtomTag:
        values = np.asarray(values, dtype=float)
        if diverges(values, self.factor, self.min_blocks):
            return AtomTag.unbounded()
        return AtomTag.bounded(float(values.max()) * self.margin if values.size else 1.0)
