"""Equivalence chains checked edge by edge on declared families.

Each check returns a :class:`Verdict`: ``details`` holds the machine-readable
edges, ``narrative`` a sentence for the human report.
"""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from ..errors import CertificateError, CesaroLabError
from ..families.window import CesaroFamily, SequenceWindow
from ..models import EquivalentMeasure, Provenance, SimpleRV, Verdict, VerdictStatus
from .decomposition import (
    Hull,
    bounded_in_probability,
    build_equivalent_measure,
    certify_l1_bound,
    hereditarily_unbounded,
    l1_bounded_on_window,
    partition,
)
from .distributions import DEFAULT_EPS_GRID, tightness_check, weak_convergence_check
from .limits import DEFAULT_TOL, limit_profile
from .oracle import ORACLE_GRID_POINTS, ORACLE_SAMPLES, oracle_agreement

logger = logging.getLogger(__name__)


def tightness_grid(window: SequenceWindow, eps_grid: Sequence[float]) -> List[float]:
    """The epsilon grid plus half the lightest atom mass, so every atom can break tightness."""
    extra = min(window.space.masses) / 2
    return sorted(set(float(eps) for eps in eps_grid) | {extra}, reverse=True)


def _rows(matrix: np.ndarray) -> List[SimpleRV]:
    return [SimpleRV(row) for row in matrix]


def _chain_status(edges: Dict[str, bool]) -> VerdictStatus:
    values = set(edges.values())
    return VerdictStatus.PASS if len(values) == 1 else VerdictStatus.FAIL


def _certifies_everything(hull: Hull, heuristic: bool) -> bool:
    part = partition(hull, heuristic=heuristic)
    if part.unbounded_atoms:
        return False
    try:
        certify_l1_bound(hull, part, build_equivalent_measure(part))
    except CertificateError:
        return False
    return True


def cor_finite_chain(
    window: SequenceWindow,
    eps_grid: Sequence[float] = DEFAULT_EPS_GRID,
    tol: float = DEFAULT_TOL,
    stability_span: Optional[int] = None,
    heuristic: bool = False,
) -> Verdict:
    """All-finite limit versus boundedness, certificates and tightness of both hulls.

    The chain is an equivalence: it passes when every edge holds or every
    edge fails.
    """
    profile = limit_profile(window, tol, stability_span)
    parameters = {"tol": tol, "stability_span": profile.stability_span, "eps_grid": list(eps_grid)}
    if profile.no_limit_set:
        return Verdict(
            "cor_finite", VerdictStatus.INCONCLUSIVE, parameters=parameters,
            details={"no_limit": sorted(profile.no_limit_set)},
            narrative=f"atoms {sorted(profile.no_limit_set)} have no Cesàro limit on this window",
        )

    cesaro = CesaroFamily(window)
    labels = list(window.space.labels)
    grid = tightness_grid(window, eps_grid)
    edges = {
        "finite_everywhere": profile.finite_set == frozenset(labels),
        "base_bounded": all(
            bounded_in_probability(window, labels, eps, heuristic).bounded for eps in eps_grid
        ),
        "cesaro_bounded": all(
            bounded_in_probability(cesaro, labels, eps, heuristic).bounded for eps in eps_grid
        ),
        "base_certificate": _certifies_everything(window, heuristic),
        "cesaro_certificate": _certifies_everything(cesaro, heuristic),
        "base_tight": tightness_check(_rows(window.matrix), window.space, grid).is_tight,
        "cesaro_tight": tightness_check(_rows(cesaro.matrix), window.space, grid).is_tight,
        "cesaro_weakly_convergent": weak_convergence_check(
            _rows(cesaro.matrix), window.space
        ).converges,
    }
    status = _chain_status(edges)
    held = all(edges.values())
    return Verdict(
        "cor_finite", status,
        provenance=Provenance.HEURISTIC if heuristic else Provenance.EXACT,
        parameters=parameters, details=edges,
        narrative=(
            f"all {len(edges)} edges {'hold' if held else 'fail'} together"
            if status is VerdictStatus.PASS
            else "broken edges: " + ", ".join(name for name, ok in edges.items() if ok != held)
        ),
    )


def cor_infinite_chain(
    window: SequenceWindow,
    tol: float = DEFAULT_TOL,
    stability_span: Optional[int] = None,
    heuristic: bool = False,
) -> Verdict:
    """Limit infinite everywhere versus hereditary unboundedness of both hulls."""
    profile = limit_profile(window, tol, stability_span)
    parameters = {"tol": tol, "stability_span": profile.stability_span}
    if profile.no_limit_set:
        return Verdict(
            "cor_infinite", VerdictStatus.INCONCLUSIVE, parameters=parameters,
            details={"no_limit": sorted(profile.no_limit_set)},
            narrative=f"atoms {sorted(profile.no_limit_set)} have no Cesàro limit on this window",
        )
    labels = list(window.space.labels)
    edges = {
        "infinite_everywhere": not profile.finite_set,
        "base_hereditarily_unbounded": hereditarily_unbounded(partition(window, heuristic), labels),
        "cesaro_hereditarily_unbounded": hereditarily_unbounded(
            partition(CesaroFamily(window), heuristic), labels
        ),
    }
    status = _chain_status(edges)
    return Verdict(
        "cor_infinite", status,
        provenance=Provenance.HEURISTIC if heuristic else Provenance.EXACT,
        parameters=parameters, details=edges,
        narrative="edges agree" if status is VerdictStatus.PASS else f"edges disagree: {edges}",
    )


def verify_remark_main(
    window: SequenceWindow,
    eps_grid: Sequence[float] = DEFAULT_EPS_GRID,
    samples: int = ORACLE_SAMPLES,
    seed: int = 0,
    jobs: int = 1,
    heuristic: bool = False,
    points: int = ORACLE_GRID_POINTS,
) -> Verdict:
    """J_b is maximal for the oracle, carries an L1(Q) bound, and its Cesàro laws converge."""
    part = partition(window, heuristic=heuristic)
    bounded = sorted(part.bounded_atoms)

    def oracle_bounded(labels: List[int]) -> bool:
        return all(
            oracle_agreement(
                window,
                labels,
                eps,
                samples=samples,
                points=points,
                seed=seed,
                jobs=jobs,
                heuristic=heuristic,
            ).oracle.bounded
            for eps in eps_grid
        )

    maximal = oracle_bounded(bounded) if bounded else True
    for extra in sorted(part.unbounded_atoms):
        if oracle_bounded(bounded + [extra]):
            maximal = False
            logger.warning("oracle finds J_b + {%d} bounded", extra)

    try:
        certify_l1_bound(window, part, build_equivalent_measure(part), seed=seed)
        certified = True
    except CertificateError:
        certified = False

    mask = np.isin(np.asarray(window.space.labels), bounded)
    cesaro_rows = [SimpleRV(np.where(mask, row, 0.0)) for row in window.cesaro_matrix]
    weak = False
    if len(cesaro_rows) >= 8:
        weak = weak_convergence_check(cesaro_rows, window.space).converges

    details = {"maximal": maximal, "l1_bound": certified, "weak_convergence": weak}
    status = VerdictStatus.PASS if all(details.values()) else VerdictStatus.FAIL
    return Verdict(
        "remark_main", status, provenance=part.provenance,
        parameters={
            "eps_grid": list(eps_grid),
            "samples": samples,
            "grid_points": points,
            "seed": seed,
        },
        details=details,
        narrative=f"J_b = {bounded}: "
        + ", ".join(f"{k}={'ok' if v else 'FAILED'}" for k, v in details.items()),
    )


def random_measure(labels: Sequence[int], rng: np.random.Generator) -> EquivalentMeasure:
    """A uniformly drawn measure giving every atom positive mass."""
    weights = np.ones(1)
    if len(labels) > 1:
        weights = stats.dirichlet.rvs(np.ones(len(labels)), random_state=rng)[0]
    positive = np.maximum(weights, 1e-300)
    return EquivalentMeasure(labels=tuple(labels), weights=tuple(positive.tolist()))


def measure_change_equivalence(
    window: SequenceWindow,
    eps_grid: Sequence[float] = DEFAULT_EPS_GRID,
    trials: int = 20,
    samples: int = ORACLE_SAMPLES,
    seed: int = 0,
    heuristic: bool = False,
    points: int = ORACLE_GRID_POINTS,
) -> Verdict:
    """Boundedness in probability on a set versus L1-boundedness under some Q ~ P.

    Forward: bounded on J_b at every epsilon implies the constructed measure
    certifies J_b. Backward: whenever a random Q makes the window L1-bounded on
    a random atom set, the oracle finds the hull bounded there.
    """
    part = partition(window, heuristic=heuristic)
    bounded = sorted(part.bounded_atoms)
    forward = True
    if all(bounded_in_probability(window, bounded, eps, heuristic).bounded for eps in eps_grid):
        try:
            certify_l1_bound(window, part, build_equivalent_measure(part))
        except CesaroLabError:
            forward = False

    rng = np.random.default_rng(seed)
    labels = list(window.space.labels)
    tested = 0
    violations = []
    for trial in range(trials):
        measure = random_measure(labels, rng)
        size = int(rng.integers(1, len(labels) + 1))
        chosen = sorted(int(label) for label in rng.choice(labels, size=size, replace=False))
        if not l1_bounded_on_window(window, measure, chosen):
            continue
        tested += 1
        for eps in eps_grid:
            outcome = oracle_agreement(
                window,
                chosen,
                eps,
                samples=samples,
                points=points,
                seed=seed + trial,
                heuristic=heuristic,
            )
            if not outcome.oracle.bounded:
                violations.append({"trial": trial, "atoms": chosen, "epsilon": eps})

    details = {"forward": forward, "backward_tested": tested, "backward_violations": violations}
    status = VerdictStatus.PASS if forward and not violations else VerdictStatus.FAIL
    return Verdict(
        "measure_change", status, provenance=part.provenance,
        parameters={
            "eps_grid": list(eps_grid),
            "trials": trials,
            "grid_points": points,
            "seed": seed,
        },
        details=details,
        narrative=(
            f"forward {'ok' if forward else 'FAILED'}; {tested} L1-bounded random sets, "
            f"{len(violations)} oracle violations"
        ),
    )
