"""Tightness and weak convergence of the laws P o X on a tracked prefix."""

import logging
from typing import Sequence

import numpy as np

from ..errors import StructuralError
from ..models import (
    AtomicSpace,
    DistributionSummary,
    SimpleRV,
    TightnessReport,
    TightnessVerdict,
    WeakConvergenceResult,
)
from ..space import upper_quantile

logger = logging.getLogger(__name__)

DEFAULT_EPS_GRID = (0.5, 0.1, 0.01)
ENVELOPE_DRIFT = 0.10
CDF_GRID_POINTS = 256
CDF_TOLERANCE = 1e-3
# horizontal CDF slack in grid steps; 0 is the plain sup-distance
CDF_SLACK_STEPS = 1
MIN_WEAK_SAMPLES = 8


def tightness_check(
    samples: Sequence[SimpleRV],
    space: AtomicSpace,
    eps_grid: Sequence[float] = DEFAULT_EPS_GRID,
) -> TightnessReport:
    """Quantile envelopes sup_k q_{1-eps}(X_k) and their stability."""
    if not samples:
        raise StructuralError("tightness needs at least one sample")
    grid = tuple(float(eps) for eps in eps_grid)
    quantiles = np.array([[upper_quantile(space, rv, eps) for eps in grid] for rv in samples])
    envelopes = np.maximum.accumulate(quantiles, axis=0)
    middle = envelopes[len(samples) // 2]
    final = envelopes[-1]

    finite = bool(np.isfinite(final).all())
    with np.errstate(invalid="ignore"):
        stable = bool((final - middle <= ENVELOPE_DRIFT * np.abs(middle) + 1e-12).all())
    verdict = TightnessVerdict.TIGHT if finite and stable else TightnessVerdict.NOT_TIGHT_ON_WINDOW
    logger.debug("tightness over %d samples: %s", len(samples), verdict.value)
    return TightnessReport(
        eps_grid=grid,
        quantiles=tuple(tuple(row) for row in quantiles.tolist()),
        max_quantiles={eps: float(value) for eps, value in zip(grid, final)},
        verdict=verdict,
    )


def law_of(space: AtomicSpace, rv: SimpleRV) -> DistributionSummary:
    """Support and masses of X, normalised over the tracked atoms."""
    masses = space.mass_array / space.mass_array.sum()
    support, inverse = np.unique(rv.values, return_inverse=True)
    probabilities = np.bincount(inverse, weights=masses, minlength=support.size)
    return DistributionSummary(
        support=tuple(support.tolist()), probabilities=tuple(probabilities.tolist())
    )


def cdf_matrix(space: AtomicSpace, samples: Sequence[SimpleRV], grid: np.ndarray) -> np.ndarray:
    """F_k(x) = P(X_k <= x) for every sample k and grid point x."""
    masses = space.mass_array / space.mass_array.sum()
    values = np.vstack([rv.values for rv in samples])
    return np.stack([(values <= x) @ masses for x in grid], axis=1)


def weak_convergence_check(
    samples: Sequence[SimpleRV],
    space: AtomicSpace,
    tol: float = CDF_TOLERANCE,
    grid_points: int = CDF_GRID_POINTS,
    slack_steps: int = CDF_SLACK_STEPS,
) -> WeakConvergenceResult:
    """Cauchy test of the last half of the sequence of laws against the last one.

    CDFs are compared on a fixed grid over [0, 1.05 * max finite value] with
    ``slack_steps`` grid steps of horizontal slack, as in the Lévy metric:
    F_last(x[i-s]) - tol <= F_k(x[i]) <= F_last(x[i+s]) + tol. With
    ``slack_steps=0`` this is the plain sup-distance test |F_k - F_last| <= tol.
    """
    if not (0 <= slack_steps < grid_points):
        raise StructuralError(f"slack_steps {slack_steps} outside [0, {grid_points})")
    if len(samples) < MIN_WEAK_SAMPLES:
        raise StructuralError(
            f"weak convergence needs at least {MIN_WEAK_SAMPLES} samples, got {len(samples)}"
        )
    values = np.vstack([rv.values for rv in samples])
    finite = values[np.isfinite(values)]
    top = 1.05 * float(finite.max()) if finite.size and finite.max() > 0 else 1.0
    grid = np.linspace(0.0, top, grid_points)

    cdfs = cdf_matrix(space, samples, grid)
    last = cdfs[-1]
    s = slack_steps
    lower = np.concatenate([np.zeros(s), last[: grid_points - s]]) - tol
    upper = np.concatenate([last[s:], np.ones(s)]) + tol
    tail = cdfs[len(samples) // 2:]
    converges = bool(((tail >= lower) & (tail <= upper)).all())
    distance = float(np.abs(tail - last).max())

    limit = law_of(space, samples[-1]) if converges and not samples[-1].is_limit else None
    logger.debug("weak convergence: %s (sup distance %.3g)", converges, distance)
    return WeakConvergenceResult(
        converges=converges, max_distance=distance, limit=limit, grid_points=grid_points
    )
