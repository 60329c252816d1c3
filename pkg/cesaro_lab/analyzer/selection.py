"""Heuristic subsequence selection by diagonal dyadic band refinement."""

import logging
import math
from collections import Counter
from typing import List, Optional

import numpy as np

from ..errors import StructuralError
from ..families.base import CoefficientFamily
from ..families.window import SequenceWindow
from ..models import AtomicSpace
from .limits import DEFAULT_TOL, LimitClassifier, default_stability_span

logger = logging.getLogger(__name__)

ZERO_BAND = -(10 ** 6)


def value_bands(values: np.ndarray) -> np.ndarray:
    """floor(log2 v) per value, with a dedicated band for zeros."""
    bands = np.full(values.shape, ZERO_BAND, dtype=np.int64)
    positive = values > 0
    bands[positive] = np.floor(np.log2(values[positive])).astype(np.int64)
    return bands


def modal_band(bands: np.ndarray) -> int:
    counts = Counter(bands.tolist())
    top = max(counts.values())
    return min(band for band, count in counts.items() if count == top)


def _band_candidate(family: CoefficientFamily, survivors: np.ndarray, label: int) -> np.ndarray:
    if survivors.size < 2:
        return survivors
    bands = value_bands(np.asarray(family.coefficients(survivors, label), dtype=float))
    return survivors[bands == modal_band(bands)]


def _thinning_cannot_bound(family: CoefficientFamily, survivors: np.ndarray, label: int) -> bool:
    candidate = _band_candidate(family, survivors, label)
    return (
        family.tag_for(label, survivors).is_unbounded
        and family.tag_for(label, candidate).is_unbounded
    )


def _classifier_for(length: int, tol: float) -> Optional[LimitClassifier]:
    span = default_stability_span(length)
    if length < 2 * span:
        return None
    return LimitClassifier(tol=tol, stability_span=span)


def _settles_along(
    family: CoefficientFamily, survivors: np.ndarray, label: int, tol: float
) -> bool:
    """The running means of one atom reach a finite limit along ``survivors``."""
    classifier = _classifier_for(survivors.size, tol)
    if classifier is None:
        return False
    values = np.asarray(family.coefficients(survivors, label), dtype=float)
    limit = classifier.classify(np.cumsum(values) / np.arange(1, values.size + 1))
    return limit is not None and math.isfinite(limit)


def unsettled_atoms(window: SequenceWindow, tol: float = DEFAULT_TOL) -> List[int]:
    """Atoms with no Cesàro limit along the window; every atom when it is too short to judge."""
    classifier = _classifier_for(window.length, tol)
    if classifier is None:
        return list(window.space.labels)
    matrix = window.cesaro_matrix
    return [
        label
        for j, label in enumerate(window.space.labels)
        if classifier.classify(matrix[:, j]) is None
    ]


def _converges_already(window: SequenceWindow, tol: float) -> bool:
    """Every atom has a finite limit or stays unbounded on its own modal band."""
    classifier = _classifier_for(window.length, tol)
    if classifier is None:
        return False
    for j, label in enumerate(window.space.labels):
        limit = classifier.classify(window.cesaro_matrix[:, j])
        if limit is not None and math.isfinite(limit):
            continue
        if not _thinning_cannot_bound(window.family, window.index_array, label):
            return False
    return True


def _refine(family: CoefficientFamily, survivors: np.ndarray, label: int, tol: float) -> np.ndarray:
    if _thinning_cannot_bound(family, survivors, label):
        return survivors
    if _settles_along(family, survivors, label, tol):
        return survivors
    return _band_candidate(family, survivors, label)


def komlos_select(
    family: CoefficientFamily,
    space: AtomicSpace,
    horizon: int,
    block: int,
    tol: float = DEFAULT_TOL,
) -> SequenceWindow:
    """Pick a subsequence of 1..horizon along which running means settle.

    Atoms are visited in label order. An atom whose running means already
    reach a finite limit on the survivors is left alone; any other atom keeps
    the survivors whose value lies in its most populated dyadic band. An atom
    whose tag stays Unbounded on that band never constrains the selection.
    Atoms still without a limit are refined again until no band removes an
    index. When that leaves fewer than ``block`` indices, or some atom still
    has no limit, an evenly strided window and then 1..horizon are tried; the
    first candidate without NoLimit atoms is returned.
    """
    if block < 1 or horizon < 4 * block:
        raise StructuralError(f"horizon {horizon} must be at least 4 x block {block}")

    identity = SequenceWindow.first(family, space, horizon)
    if _converges_already(identity, tol):
        logger.debug("window 1..%d already converges; no thinning", horizon)
        return SequenceWindow(family, identity.indices, space, selection="identity")

    survivors = identity.index_array
    for label in space.labels:
        survivors = _refine(family, survivors, label, tol)
        logger.debug("atom %d keeps %d indices", label, survivors.size)

    while survivors.size >= block:
        window = SequenceWindow(family, tuple(int(n) for n in survivors), space, selection="komlos")
        unsettled = unsettled_atoms(window, tol)
        if not unsettled:
            return window
        refined = survivors
        for label in unsettled:
            if not _thinning_cannot_bound(family, refined, label):
                refined = _band_candidate(family, refined, label)
        if refined.size == survivors.size:
            logger.debug("atoms %s keep no limit and no band removes an index", unsettled)
            break
        survivors = refined

    stride = max(1, horizon // block)
    logger.warning(
        "band refinement did not settle with >= %d indices; trying stride %d", block, stride
    )
    strided = tuple(range(1, horizon + 1, stride))
    fallbacks = (
        SequenceWindow(family, strided, space, selection="stride-fallback"),
        SequenceWindow(family, identity.indices, space, selection="identity-fallback"),
    )
    for window in fallbacks:
        if not unsettled_atoms(window, tol):
            return window
    logger.warning("no candidate window settles every atom within tol %g", tol)
    return fallbacks[-1]


def selected_window(
    family: CoefficientFamily,
    space: AtomicSpace,
    horizon: int,
    block: Optional[int] = None,
    tol: float = DEFAULT_TOL,
) -> SequenceWindow:
    return komlos_select(family, space, horizon, block or max(1, horizon // 8), tol)
