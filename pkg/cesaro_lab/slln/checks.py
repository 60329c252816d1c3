"""Empirical checks of the SLLN regimes and the variance condition."""

import logging
import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..analyzer.distributions import DEFAULT_EPS_GRID
from ..analyzer.limits import LimitClassifier
from ..analyzer.oracle import ORACLE_GRID_POINTS, ORACLE_SAMPLES, exceedance_curve, sample_hull
from ..errors import StructuralError
from ..families.probe import diverges
from ..families.table import TableFamily
from ..families.window import SequenceWindow
from ..models import AtomicSpace, Provenance, Verdict, VerdictStatus
from .generators import EmpiricalRun, GeneratorSpec

logger = logging.getLogger(__name__)

SLLN_TOL = 0.05
MIN_VARIANCE_PATHS = 200
VOTE_SHARE = 0.9
BRIDGE_PATHS = 16
BRIDGE_HORIZON = 4096
PAIRWISE_Z = 4.5


def dyadic_grid(length: int) -> List[int]:
    grid = []
    n = 1
    while n <= length:
        grid.append(n)
        n *= 2
    return grid


def verify_variance_condition(run: EmpiricalRun, c: float, max_n: Optional[int] = None) -> Verdict:
    """Var[sum_{n<=N} xi_n] <= c * (1 + 3/sqrt(paths)) * sum_{n<=N} Var[xi_n].

    Checked on a dyadic grid of N.
    """
    if run.paths < MIN_VARIANCE_PATHS:
        raise StructuralError(
            f"variance estimation needs at least {MIN_VARIANCE_PATHS} paths, got {run.paths}"
        )
    values = run.trajectories
    limit = c * (1.0 + 3.0 / math.sqrt(run.paths))
    per_term = values.var(axis=0, ddof=1)
    sums = np.cumsum(values, axis=1)

    rows = []
    for n in dyadic_grid(min(run.length, max_n or run.length)):
        total_var = float(sums[:, n - 1].var(ddof=1))
        sum_var = float(per_term[:n].sum())
        ratio = total_var / sum_var if sum_var > 0 else (0.0 if total_var == 0 else math.inf)
        rows.append({
            "N": n,
            "var_of_sum": total_var,
            "sum_of_var": sum_var,
            "ratio": ratio,
            "ok": ratio <= limit,
        })

    pairwise = pairwise_products(run)
    status = VerdictStatus.PASS if all(row["ok"] for row in rows) else VerdictStatus.FAIL
    worst = max(row["ratio"] for row in rows)
    return Verdict(
        "variance_condition", status, provenance=Provenance.HEURISTIC,
        parameters={"c": c, "paths": run.paths, "limit": limit},
        details={"rows": rows, "pairwise": pairwise},
        narrative=f"worst ratio {worst:.4f} against limit {limit:.4f} over {len(rows)} dyadic N",
    )


def pairwise_products(run: EmpiricalRun, horizon: int = 1024) -> Dict[str, Any]:
    """Largest z-score of E[xi_n xi_{n+1}] above mu^2 among adjacent pairs."""
    mu = run.spec.declared_mean
    n = min(run.length, horizon)
    if n < 2 or not math.isfinite(mu):
        return {"checked_pairs": 0, "max_z": 0.0, "ok": True}
    products = run.trajectories[:, : n - 1] * run.trajectories[:, 1:n]
    se = products.std(axis=0, ddof=1) / math.sqrt(run.paths)
    excess = products.mean(axis=0) - mu ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, excess / se, np.where(excess > 0, np.inf, 0.0))
    max_z = float(z.max())
    return {"checked_pairs": n - 1, "max_z": max_z, "ok": max_z <= PAIRWISE_Z}


def required_m_profile(
    values: np.ndarray,
    epsilon: float,
    horizons: Sequence[int],
    samples: int = ORACLE_SAMPLES,
    seed: int = 0,
    jobs: int = 1,
    points: int = ORACLE_GRID_POINTS,
) -> np.ndarray:
    """Least grid M bounding the sampled hull of the first h rows, for each horizon h.

    ``values`` holds one row per sequence index and one column per path; paths
    are the atoms of a uniform space.
    """
    space = AtomicSpace.uniform(values.shape[1])
    positive = values[values > 0]
    low = float(positive.min()) if positive.size else 1.0
    top = 1.05 * max(float(values[: max(horizons)].max()), low)
    grid = np.geomspace(low, top, points) if top > low else np.array([top])
    profile = []
    for h in horizons:
        members = sample_hull(values[:h], samples=samples, seed=seed, jobs=jobs)
        curve = exceedance_curve(space, members, grid)
        passing = np.flatnonzero(curve < epsilon)
        profile.append(float(grid[passing[0]]) if passing.size else math.inf)
    return np.asarray(profile)


def profile_diverges(profile: np.ndarray) -> bool:
    """Growth rule on the step function n -> M(h_j) over dyadic horizons h_j = 2^j."""
    if not np.isfinite(profile).all():
        return True
    steps = np.concatenate([np.full(2 ** j, m) for j, m in enumerate(profile)])
    return diverges(steps)


def bridge_table(
    run: EmpiricalRun, paths: int = BRIDGE_PATHS, cesaro: bool = False
) -> SequenceWindow:
    """First paths of the run as a table family on a uniform space, one atom per path."""
    used = min(paths, run.paths)
    horizon = min(run.length, BRIDGE_HORIZON)
    source = run.cesaro if cesaro else run.trajectories
    family = TableFamily.from_array(source[:used, :horizon].T, description="sampled paths")
    return SequenceWindow.first(family, AtomicSpace.uniform(used), horizon)


def hull_bounded(
    run: EmpiricalRun,
    cesaro: bool,
    eps_grid: Sequence[float],
    samples: int,
    seed: int,
    jobs: int,
    points: int = ORACLE_GRID_POINTS,
) -> Dict[str, Any]:
    window = bridge_table(run, cesaro=cesaro)
    horizons = dyadic_grid(window.length)
    profiles = {
        eps: required_m_profile(
            window.matrix, eps, horizons, samples=samples, seed=seed, jobs=jobs, points=points
        )
        for eps in eps_grid
    }
    growing = [eps for eps, profile in profiles.items() if profile_diverges(profile)]
    return {
        "bounded": not growing,
        "growing_at": growing,
        "profiles": {str(eps): profile.tolist() for eps, profile in profiles.items()},
    }


def classifier_vote(
    run: EmpiricalRun, tol: float = SLLN_TOL, stability_span: Optional[int] = None
) -> Dict[str, Any]:
    """Per-path limit classification of the running means and the majority outcome."""
    classifier = LimitClassifier(tol=tol, stability_span=stability_span)
    outcomes = [classifier.classify(row) for row in run.cesaro]
    finite = sum(1 for o in outcomes if o is not None and math.isfinite(o))
    infinite = sum(1 for o in outcomes if o is not None and math.isinf(o))
    share = VOTE_SHARE * run.paths
    decision: Optional[bool]
    if finite >= share:
        decision = True
    elif infinite >= share:
        decision = False
    else:
        decision = None
    return {
        "finite": finite,
        "infinite": infinite,
        "no_limit": run.paths - finite - infinite,
        "converges": decision,
    }


def slln_regime_check(
    spec: GeneratorSpec,
    run: EmpiricalRun,
    eps_grid: Sequence[float] = DEFAULT_EPS_GRID,
    tol: float = SLLN_TOL,
    samples: int = ORACLE_SAMPLES,
    seed: int = 0,
    jobs: int = 1,
    points: int = ORACLE_GRID_POINTS,
) -> Verdict:
    """Finite mean, Cesàro convergence, and boundedness of both hulls must agree."""
    vote = classifier_vote(run, tol)
    parameters = {
        "tol": tol,
        "eps_grid": list(eps_grid),
        "samples": samples,
        "grid_points": points,
        "seed": seed,
        "bridge_paths": min(BRIDGE_PATHS, run.paths),
    }
    if vote["converges"] is None:
        return Verdict(
            "slln_regime", VerdictStatus.INCONCLUSIVE, provenance=Provenance.HEURISTIC,
            parameters=parameters, details={"vote": vote},
            narrative=f"classifier split across paths: {vote}",
        )

    base = hull_bounded(run, False, eps_grid, samples, seed, jobs, points)
    cesaro = hull_bounded(run, True, eps_grid, samples, seed, jobs, points)
    edges = {
        "declared_finite_mean": spec.declared_finite_mean,
        "cesaro_converges": bool(vote["converges"]),
        "hull_bounded": base["bounded"],
        "cesaro_hull_bounded": cesaro["bounded"],
    }
    agree = len(set(edges.values())) == 1
    broken = [name for name, value in edges.items() if value != spec.declared_finite_mean]
    branch = "finite" if spec.declared_finite_mean else "infinite"
    logger.info("SLLN regime %s: edges %s", branch, edges)
    return Verdict(
        "slln_regime", VerdictStatus.PASS if agree else VerdictStatus.FAIL,
        provenance=Provenance.HEURISTIC, parameters=parameters,
        details={"edges": edges, "vote": vote, "hull": base, "cesaro_hull": cesaro},
        narrative=(f"{branch}-mean branch: all equivalences hold" if agree
                   else f"{branch}-mean branch broken at: {', '.join(broken)}"),
    )
