"""Atomic probability spaces and the expectation kernel."""

from .atomic import (
    atom_weights,
    exceedance_probability,
    expectation,
    probability_of,
    probability_of_labels,
    upper_quantile,
)

__all__ = [
    "atom_weights",
    "exceedance_probability",
    "expectation",
    "probability_of",
    "probability_of_labels",
    "upper_quantile",
]
