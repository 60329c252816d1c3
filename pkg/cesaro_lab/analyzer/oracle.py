"""Brute-force boundedness-in-probability oracle over sampled convex hulls."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from ..errors import StructuralError
from ..models import AtomicSpace, BoundednessDecision, Provenance, SimpleRV
from .decomposition import Hull, bounded_in_probability, resolve_tags

logger = logging.getLogger(__name__)

ORACLE_SAMPLES = 1000
ORACLE_GRID_POINTS = 64
CHUNK_SIZE = 250


def sample_hull(
    values: np.ndarray,
    samples: int = ORACLE_SAMPLES,
    seed: int = 0,
    jobs: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> np.ndarray:
    """Generators plus Dirichlet(1, ..., 1) mixtures of the rows of ``values``.

    Each chunk draws from its own child of ``SeedSequence(seed)`` and chunks
    are stacked by index, so the result does not depend on ``jobs``.
    """
    generators = values.shape[0]
    if generators < 2 or samples <= 0:
        return values.copy()

    chunks = math.ceil(samples / chunk_size)
    children = np.random.SeedSequence(seed).spawn(chunks)
    sizes = [min(chunk_size, samples - i * chunk_size) for i in range(chunks)]
    alpha = np.ones(generators)

    def draw(i: int) -> np.ndarray:
        rng = np.random.default_rng(children[i])
        weights = stats.dirichlet.rvs(alpha, size=sizes[i], random_state=rng)
        return weights @ values

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        mixtures = list(pool.map(draw, range(chunks)))
    return np.vstack([values] + mixtures)


def exceedance_curve(
    space: AtomicSpace, members: np.ndarray, m_grid: Sequence[float]
) -> np.ndarray:
    """sup over members of P(X > M) for every M of the grid."""
    masses = space.mass_array
    return np.array([float(((members > level) @ masses).max()) for level in m_grid])


def brute_force_boundedness_oracle(
    rvs: Sequence[SimpleRV],
    space: AtomicSpace,
    epsilon: float,
    m_grid: Iterable[float],
    samples: int = ORACLE_SAMPLES,
    seed: int = 0,
    jobs: int = 1,
) -> BoundednessDecision:
    """Least grid M with sup P(X > M) < epsilon over the sampled hull, if any."""
    grid = sorted(float(level) for level in m_grid)
    if not grid:
        raise StructuralError("the oracle needs a nonempty M grid")
    if not rvs:
        raise StructuralError("the oracle needs at least one random variable")
    if any(len(rv) != space.size for rv in rvs):
        raise StructuralError("every random variable needs one value per atom")
    if any(rv.is_limit for rv in rvs):
        raise StructuralError("limit objects are not hull members")

    generators = np.vstack([rv.values for rv in rvs])
    members = sample_hull(generators, samples=samples, seed=seed, jobs=jobs)
    curve = exceedance_curve(space, members, grid)
    passing = np.flatnonzero(curve < epsilon)
    if passing.size:
        return BoundednessDecision.bounded_with(
            grid[int(passing[0])], epsilon, method="oracle", provenance=Provenance.HEURISTIC
        )
    return BoundednessDecision.unbounded(epsilon, method="oracle", provenance=Provenance.HEURISTIC)


def restricted_members(hull: Hull, restrict_to: Iterable[int]) -> List[SimpleRV]:
    """The hull's generators multiplied by the indicator of the restriction."""
    positions = [hull.space.position_of(label) for label in sorted(set(restrict_to))]
    mask = np.zeros(hull.space.size, dtype=bool)
    mask[positions] = True
    return [SimpleRV(np.where(mask, row, 0.0)) for row in hull.matrix]


def agreement_grid(
    hull: Hull,
    restrict_to: Iterable[int],
    bounded_labels: Iterable[int],
    points: int = ORACLE_GRID_POINTS,
) -> np.ndarray:
    """Geometric grid topping out just above every value seen on bounded atoms."""
    shared = sorted(set(restrict_to) & set(bounded_labels))
    positions = [hull.space.position_of(label) for label in shared]
    observed = float(hull.matrix[:, positions].max()) if positions else 0.0
    top = 1.05 * max(observed, 1.0)
    return np.geomspace(top * 1e-4, top, points)


@dataclass(frozen=True)
class OracleAgreement:
    restrict_to: Tuple[int, ...]
    epsilon: float
    effective_epsilon: float
    reduction: BoundednessDecision
    oracle: BoundednessDecision

    @property
    def agrees(self) -> bool:
        return self.reduction.bounded == self.oracle.bounded


def oracle_agreement(
    hull: Hull,
    restrict_to: Iterable[int],
    epsilon: float,
    samples: int = ORACLE_SAMPLES,
    points: int = ORACLE_GRID_POINTS,
    seed: int = 0,
    jobs: int = 1,
    heuristic: bool = False,
) -> OracleAgreement:
    """Run the reduction and the oracle on the same restriction and compare.

    The oracle runs at min(epsilon, smallest restricted atom mass): a single
    unbounded atom lighter than epsilon cannot push P(X > M) over epsilon on
    its own, while the reduction flags it regardless of its mass.
    """
    labels = sorted(set(restrict_to))
    reduction = bounded_in_probability(hull, labels, epsilon, heuristic=heuristic)
    if not labels:
        oracle = BoundednessDecision.bounded_with(
            0.0, epsilon, method="oracle", provenance=Provenance.HEURISTIC
        )
        return OracleAgreement((), epsilon, epsilon, reduction, oracle)

    tags = resolve_tags(hull, labels, heuristic=heuristic)
    bounded_labels = [label for label in labels if tags[label].is_bounded]
    effective = min(epsilon, min(hull.space.mass_of(label) for label in labels))
    oracle = brute_force_boundedness_oracle(
        restricted_members(hull, labels),
        hull.space,
        effective,
        agreement_grid(hull, labels, bounded_labels, points),
        samples=samples,
        seed=seed,
        jobs=jobs,
    )
    if reduction.bounded != oracle.bounded:
        logger.warning("oracle disagrees on atoms %s at epsilon %g", labels, epsilon)
    return OracleAgreement(tuple(labels), epsilon, effective, reduction, oracle)


def oracle_profile(
    hull: Hull,
    eps_grid: Sequence[float],
    m_grid: Optional[Sequence[float]] = None,
    samples: int = ORACLE_SAMPLES,
    seed: int = 0,
    jobs: int = 1,
    points: int = ORACLE_GRID_POINTS,
) -> List[BoundednessDecision]:
    """Oracle decision on the full hull for every epsilon of the grid.

    Without ``m_grid`` the levels are ``points`` geometric steps up to just
    above the largest evaluated value.
    """
    rvs = [SimpleRV(row) for row in hull.matrix]
    if m_grid is None:
        top = 1.05 * max(float(hull.matrix.max()), 1.0)
        m_grid = np.geomspace(top * 1e-4, top, points)
    return [
        brute_force_boundedness_oracle(
            rvs, hull.space, eps, m_grid, samples=samples, seed=seed, jobs=jobs
        )
        for eps in eps_grid
    ]
