"""Bounded / hereditarily-unbounded partition and the certifying measure.

Everything here works on atom labels. A hull is anything exposing ``space``,
``matrix``, ``atom_tags()`` and ``hull``: a :class:`SequenceWindow` for C or
a :class:`CesaroFamily` for the hull of the running means.
"""

import logging
import math
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Union

import numpy as np

from ..errors import CertificateError, DeclaredBoundViolation, StructuralError, UnknownMetadataError
from ..families.probe import GrowthProbe, diverges
from ..families.window import CesaroFamily, SequenceWindow
from ..models import (
    AtomTag,
    BoundednessCertificate,
    BoundednessDecision,
    EquivalentMeasure,
    Partition,
    Provenance,
)

logger = logging.getLogger(__name__)

Hull = Union[SequenceWindow, CesaroFamily]

CERTIFICATE_SLACK = 1e-9
BOUND_CHECK_RELATIVE = 1e-12
# smallest normal float64 exponent; weights below it lose Q ~ P
MIN_LOG2_WEIGHT = -1022


def resolve_tags(
    hull: Hull,
    labels: Optional[Iterable[int]] = None,
    heuristic: bool = False,
    probe: Optional[GrowthProbe] = None,
) -> Dict[int, AtomTag]:
    """Declared tags for ``labels``, with Unknown atoms probed in heuristic mode."""
    tags = hull.atom_tags()
    wanted = list(hull.space.labels if labels is None else labels)
    for label in wanted:
        if label not in tags:
            raise StructuralError(f"atom {label} is not tracked by this space")
    unknown = [label for label in wanted if tags[label].is_unknown]
    if unknown and not heuristic:
        raise UnknownMetadataError(unknown)

    resolved = {label: tags[label] for label in wanted}
    probe = probe or GrowthProbe()
    for label in unknown:
        column = hull.matrix[:, hull.space.position_of(label)]
        resolved[label] = probe.classify(column)
        logger.debug(
            "probed atom %d on %s hull: %s", label, hull.hull.value, resolved[label].kind.value
        )
    if unknown:
        logger.warning("atoms %s classified by growth probe; results are heuristic", unknown)
    return resolved


def check_declared_bounds(hull: Hull, tags: Mapping[int, AtomTag]) -> None:
    """Spot-check every Bounded(C) atom over the evaluated window."""
    for label, tag in tags.items():
        if not tag.is_bounded:
            continue
        column = hull.matrix[:, hull.space.position_of(label)]
        worst = int(np.argmax(column))
        bound = float(tag.bound or 1.0)
        if column[worst] > bound * (1.0 + BOUND_CHECK_RELATIVE):
            raise DeclaredBoundViolation(label, hull.indices[worst], float(column[worst]), bound)


def partition(
    hull: Hull,
    heuristic: bool = False,
    probe: Optional[GrowthProbe] = None,
) -> Partition:
    """Split tracked atoms into J_b (bounded along the window) and J_u."""
    tags = resolve_tags(hull, heuristic=heuristic, probe=probe)
    check_declared_bounds(hull, tags)
    declared = hull.atom_tags()
    probed = frozenset(label for label in tags if declared[label].is_unknown)

    bounded = frozenset(label for label, tag in tags.items() if tag.is_bounded)
    unbounded = frozenset(label for label, tag in tags.items() if tag.is_unbounded)
    result = Partition(
        bounded_atoms=bounded,
        unbounded_atoms=unbounded,
        provenance=Provenance.HEURISTIC if probed else Provenance.EXACT,
        bounds={label: float(tags[label].bound or 1.0) for label in bounded},
        hull=hull.hull,
        probed_atoms=probed,
    )
    logger.info(
        "partition on %s: J_b=%s J_u=%s", hull.hull.value, sorted(bounded), sorted(unbounded)
    )
    return result


def full_range_bounded_atoms(hull: Hull) -> FrozenSet[int]:
    """Atoms whose whole sequence (not just the window) is declared bounded."""
    return frozenset(label for label, tag in hull.full_range_tags().items() if tag.is_bounded)


def build_equivalent_measure(
    part: Partition,
    bounds: Optional[Mapping[int, float]] = None,
) -> EquivalentMeasure:
    """q_m = 2^-m / C_m on J_b and 2^-m on J_u, normalised by K."""
    labels = part.atoms
    if not labels:
        raise StructuralError("cannot build a measure on an empty atom set")
    bounds = dict(part.bounds if bounds is None else bounds)
    divisors: Dict[int, float] = {}
    for label in labels:
        if label in part.bounded_atoms:
            if label not in bounds:
                raise StructuralError(f"no bound C_m for bounded atom {label}")
            divisors[label] = max(float(bounds[label]), 1.0)
        else:
            divisors[label] = 1.0

    tiny = [label for label in labels if -label - math.log2(divisors[label]) < MIN_LOG2_WEIGHT]
    if tiny:
        raise StructuralError(
            f"q_m = 2^-m / C_m falls below 2^{MIN_LOG2_WEIGHT} on atoms {tiny[:5]}"
            f"{' ...' if len(tiny) > 5 else ''}; float64 weights cannot keep them positive"
        )
    weights = [math.ldexp(1.0, -label) / divisors[label] for label in labels]
    return EquivalentMeasure(labels=tuple(labels), weights=tuple(weights))


def l1_bound(part: Partition, measure: EquivalentMeasure) -> float:
    """(1/K) * sum over J_b of 2^-m."""
    total = math.fsum(math.ldexp(1.0, -label) for label in sorted(part.bounded_atoms))
    return total / measure.normalizer


def restricted_expectations(
    hull: Hull,
    measure: EquivalentMeasure,
    restrict_to: Iterable[int],
) -> np.ndarray:
    """k -> E_Q[X_k 1_B] along the hull, B the union of ``restrict_to``."""
    labels = sorted(set(restrict_to))
    if not labels:
        return np.zeros(hull.length)
    positions = [hull.space.position_of(label) for label in labels]
    q = np.array([measure.probability_of_label(label) for label in labels])
    return hull.matrix[:, positions] @ q


def certify_l1_bound(
    hull: Hull,
    part: Partition,
    measure: EquivalentMeasure,
    seed: Optional[int] = None,
) -> BoundednessCertificate:
    """Check sup_k E_Q[X_k 1_{U_b}] against the geometric-series bound."""
    bound = l1_bound(part, measure)
    trajectory = restricted_expectations(hull, measure, part.bounded_atoms)
    if trajectory.size and part.bounded_atoms:
        position = int(np.argmax(trajectory))
        checked_sup = float(trajectory[position])
    else:
        position, checked_sup = 0, 0.0

    if checked_sup > bound + CERTIFICATE_SLACK:
        atom = _violating_atom(hull, part, position)
        raise CertificateError(position + 1, atom, checked_sup, bound)

    logger.info("certificate on %s: sup %.6g <= bound %.6g", hull.hull.value, checked_sup, bound)
    return BoundednessCertificate(
        measure=measure,
        bounded_atoms=part.bounded_atoms,
        l1_bound=bound,
        checked_sup=checked_sup,
        argmax_position=position + 1,
        provenance=part.provenance,
        hull=part.hull,
        seed=seed,
    )


def _violating_atom(hull: Hull, part: Partition, position: int) -> Optional[int]:
    row = hull.matrix[position]
    for label in sorted(part.bounded_atoms):
        if row[hull.space.position_of(label)] > part.bounds[label]:
            return label
    return None


def bounded_in_probability(
    hull: Hull,
    restrict_to: Iterable[int],
    epsilon: float,
    heuristic: bool = False,
    probe: Optional[GrowthProbe] = None,
) -> BoundednessDecision:
    """Decide whether the hull restricted to the given atoms is bounded in probability.

    Any Unbounded atom in the restriction is a witness of unboundedness.
    Otherwise atoms are covered in label order until the uncovered mass drops
    below ``epsilon``; M is the largest C_m among the covered atoms.
    """
    if not (0.0 < epsilon < 1.0):
        raise StructuralError(f"epsilon {epsilon!r} outside (0, 1)")
    labels = sorted(set(restrict_to))
    if not labels:
        return BoundednessDecision.bounded_with(0.0, epsilon)

    tags = resolve_tags(hull, labels, heuristic=heuristic, probe=probe)
    probed = any(hull.atom_tags()[label].is_unknown for label in labels)
    provenance = Provenance.HEURISTIC if probed else Provenance.EXACT
    witnesses = [label for label in labels if tags[label].is_unbounded]
    if witnesses:
        return BoundednessDecision.unbounded(epsilon, witness=witnesses[0], provenance=provenance)

    space = hull.space
    uncovered = math.fsum(space.mass_of(label) for label in labels)
    bound = 0.0
    for label in labels:
        if uncovered < epsilon:
            break
        bound = max(bound, float(tags[label].bound or 1.0))
        uncovered -= space.mass_of(label)
    return BoundednessDecision.bounded_with(bound, epsilon, provenance=provenance)


def hereditarily_unbounded(part: Partition, subset: Iterable[int]) -> bool:
    """True iff every atom of ``subset`` lies in J_u; the empty subset is vacuously true."""
    atoms = set(subset)
    untracked = atoms - set(part.atoms)
    if untracked:
        raise StructuralError(f"atoms {sorted(untracked)} are not in the partition")
    return atoms <= part.unbounded_atoms


def l1_bounded_on_window(
    hull: Hull,
    measure: EquivalentMeasure,
    restrict_to: Iterable[int],
) -> bool:
    """L1(Q)-boundedness of the restricted hull read off the E_Q trajectory.

    Terms are nonnegative, so sup_k E_Q[X_k 1_B] is finite iff every atom's
    weighted coefficient sequence is bounded; the growth rule runs per atom.
    """
    for label in sorted(set(restrict_to)):
        column = hull.matrix[:, hull.space.position_of(label)]
        if diverges(column * measure.probability_of_label(label)):
            return False
    return True
