"""Cesàro limit profiles and the finite-limit set."""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from ..errors import StructuralError
from ..families.probe import GROWTH_FACTOR, MIN_GROWTH_BLOCKS, diverges
from ..families.window import CesaroFamily, SequenceWindow
from ..models import LimitProfile, PropMainReport, VerdictStatus
from .decomposition import full_range_bounded_atoms, partition

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-3
MIN_STABILITY_SPAN = 32


def default_stability_span(window_length: int) -> int:
    return max(MIN_STABILITY_SPAN, window_length // 4)


@dataclass(frozen=True)
class LimitClassifier:
    """Operational meaning of 'converges', 'diverges to infinity' and 'no limit'."""
    tol: float = DEFAULT_TOL
    stability_span: Optional[int] = None
    factor: float = GROWTH_FACTOR
    min_blocks: int = MIN_GROWTH_BLOCKS

    def span_for(self, length: int) -> int:
        return self.stability_span or default_stability_span(length)

    def classify(self, trajectory: np.ndarray) -> Optional[float]:
        """Finite limit, ``inf`` or ``None`` for a running-mean trajectory."""
        span = self.span_for(trajectory.size)
        if trajectory.size < 2 * span:
            raise StructuralError(
                f"window of length {trajectory.size} is shorter than 2 x stability_span {span}"
            )
        tail = trajectory[-span:]
        mean = math.fsum(tail.tolist()) / span
        spread = float(tail.max() - tail.min())
        if spread <= self.tol * max(abs(mean), 1.0):
            return mean
        if diverges(trajectory, self.factor, self.min_blocks):
            return math.inf
        return None


def profile_from_trajectories(
    labels: Sequence[int],
    trajectories: np.ndarray,
    classifier: LimitClassifier,
) -> LimitProfile:
    """Profile from a K x atoms matrix of running means."""
    limits = tuple(classifier.classify(trajectories[:, j]) for j in range(trajectories.shape[1]))
    profile = LimitProfile(
        labels=tuple(labels),
        limits=limits,
        tol=classifier.tol,
        stability_span=classifier.span_for(trajectories.shape[0]),
        window_length=trajectories.shape[0],
    )
    if profile.no_limit_set:
        logger.warning(
            "no Cesàro limit on atoms %s within tol %g",
            sorted(profile.no_limit_set),
            classifier.tol,
        )
    return profile


def limit_profile(
    window: SequenceWindow,
    tol: float = DEFAULT_TOL,
    stability_span: Optional[int] = None,
) -> LimitProfile:
    """Per-atom Cesàro limit along the window."""
    classifier = LimitClassifier(tol=tol, stability_span=stability_span)
    return profile_from_trajectories(window.space.labels, window.cesaro_matrix, classifier)


def verify_prop_main(
    window: SequenceWindow,
    tol: float = DEFAULT_TOL,
    stability_span: Optional[int] = None,
    heuristic: bool = False,
) -> PropMainReport:
    """Compare {xi < inf} with the bounded parts of C and of its Cesàro hull."""
    profile = limit_profile(window, tol, stability_span)
    base = partition(window, heuristic=heuristic)
    cesaro = partition(CesaroFamily(window), heuristic=heuristic)
    finite = profile.finite_set
    equal = (
        finite == base.bounded_atoms,
        finite == cesaro.bounded_atoms,
        base.bounded_atoms == cesaro.bounded_atoms,
    )
    full_range = full_range_bounded_atoms(window)

    if profile.no_limit_set:
        status = VerdictStatus.INCONCLUSIVE
    elif all(equal) and full_range <= finite:
        status = VerdictStatus.PASS
    else:
        status = VerdictStatus.FAIL
    logger.info(
        "finite set %s, J_b %s, Cesàro J_b %s: %s",
        sorted(finite),
        sorted(base.bounded_atoms),
        sorted(cesaro.bounded_atoms),
        status.value,
    )
    return PropMainReport(
        finite_set=finite,
        omega_b=base.bounded_atoms,
        omega_bar_b=cesaro.bounded_atoms,
        equal=equal,
        no_limit=profile.no_limit_set,
        full_range_bounded=full_range,
        status=status,
    )


def subwindow_consistency(
    window: SequenceWindow,
    tol: float = DEFAULT_TOL,
    stability_span: Optional[int] = None,
    pieces: int = 2,
) -> Dict[str, object]:
    """Compare the full-window profile with profiles of contiguous sub-windows.

    Sub-windows share the full window's stability_span and must agree on the
    finite set and on finite limit values within 2 * tol (relative, floor 1).
    """
    span = stability_span or default_stability_span(window.length)
    full = limit_profile(window, tol, span)
    length = window.length // pieces
    if length < 2 * span:
        raise StructuralError(
            f"sub-windows of length {length} are shorter than 2 x stability_span {span}"
        )

    mismatches = []
    for i in range(pieces):
        piece = window.subwindow(i * length + 1, (i + 1) * length)
        profile = limit_profile(piece, tol, span)
        if profile.finite_set != full.finite_set:
            differing = sorted(profile.finite_set ^ full.finite_set)
            mismatches.append({"piece": i, "reason": "finite set", "atoms": differing})
            continue
        for label in sorted(full.finite_set):
            a, b = full.limit_of(label), profile.limit_of(label)
            if abs(a - b) > 2 * tol * max(abs(a), 1.0):  # type: ignore[operator]
                mismatches.append({
                    "piece": i,
                    "reason": "limit value",
                    "atom": label,
                    "full": a,
                    "piece_value": b,
                })
    return {"consistent": not mismatches, "pieces": pieces, "span": span, "mismatches": mismatches}


def permuted_cesaro(window: SequenceWindow, seed: int = 0) -> Dict[str, object]:
    """Full-window Cesàro value before and after shuffling the window order."""
    order = np.random.default_rng(seed).permutation(window.length)
    shuffled = window.permuted_matrix(order.tolist())
    original = window.cesaro(window.length).values
    permuted = np.array([
        math.fsum(shuffled[:, j].tolist()) / window.length for j in range(shuffled.shape[1])
    ])
    return {
        "identical": bool(np.array_equal(original, permuted)),
        "original": original.tolist(),
        "permuted": permuted.tolist(),
    }
