"""Deterministic catalogue of declared families for regression and acceptance runs."""

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..models import AtomicSpace
from .builtin import RuleFamily
from .rules import AbsSineRule, AtomRule, BurstRule, ConstantRule, PowerRule

CATALOGUE_SEED = 20240607
CATALOGUE_SIZE = 32
CATALOGUE_HORIZON = 4096
CATALOGUE_TOL = 5e-3


@dataclass(frozen=True)
class CatalogueEntry:
    name: str
    space: AtomicSpace
    family: RuleFamily


def random_space(rng: np.random.Generator, atoms: int, tail: float = 0.0) -> AtomicSpace:
    """Dirichlet(1, ..., 1) atom masses scaled to leave ``tail`` untracked."""
    draws = rng.dirichlet(np.ones(atoms))
    draws = np.maximum(draws, 1e-6)
    masses = draws / math.fsum(draws.tolist()) * (1.0 - tail)
    tail_mass = max(0.0, 1.0 - math.fsum(masses.tolist()))
    return AtomicSpace(masses=tuple(masses.tolist()), tail_mass=tail_mass)


def bounded_rule(rng: np.random.Generator) -> AtomRule:
    choice = rng.integers(4)
    if choice == 0:
        return ConstantRule(value=float(rng.integers(0, 6)))
    if choice == 1:
        return AbsSineRule(amplitude=float(rng.integers(1, 4)))
    if choice == 2:
        return PowerRule(alpha=-float(rng.integers(2, 4)), scale=float(rng.integers(1, 4)))
    return BurstRule(
        base=float(rng.integers(0, 3)),
        spike=float(rng.integers(1, 4)),
        growth=0.0,
        period=int(rng.integers(2, 5)),
        phase=int(rng.integers(0, 2)),
    )


def unbounded_rule(rng: np.random.Generator) -> AtomRule:
    """Unbounded rule that outgrows every bounded atom within a few hundred indices.

    Slower growth such as n^0.1 stays below the oracle's M grid on short
    windows, so the oracle would report it bounded; it is left out here.
    """
    if rng.integers(2) == 0:
        return PowerRule(alpha=float(rng.choice([1.0, 1.5, 2.0])), scale=float(rng.integers(1, 3)))
    return BurstRule(
        base=float(rng.integers(0, 2)),
        spike=1.0,
        growth=float(rng.choice([1.0, 2.0])),
        period=int(rng.integers(2, 4)),
        phase=1,
    )


def random_declared_family(
    rng: np.random.Generator,
    atoms: int,
    unbounded_share: float = 0.4,
    name: Optional[str] = None,
) -> CatalogueEntry:
    """Random space plus one declared rule per atom."""
    space = random_space(rng, atoms, tail=float(rng.choice([0.0, 0.0, 0.05])))
    rules = {}
    for label in space.labels:
        if rng.random() < unbounded_share:
            rules[label] = unbounded_rule(rng)
        else:
            rules[label] = bounded_rule(rng)
    family = RuleFamily(rules)
    return CatalogueEntry(name or f"random-{atoms}", space, family)


def regression_catalogue(
    count: int = CATALOGUE_SIZE, seed: int = CATALOGUE_SEED
) -> List[CatalogueEntry]:
    """Families on 3 to 20 atoms mixing constant, bounded and unbounded atoms."""
    rng = np.random.default_rng(seed)
    entries = []
    for i in range(count):
        atoms = 3 + (7 * i) % 18
        share = [0.0, 0.3, 0.5, 1.0][i % 4] if i < 8 else 0.35
        entry = random_declared_family(rng, atoms, unbounded_share=share)
        entries.append(CatalogueEntry(f"catalogue-{i:02d}", entry.space, entry.family))
    return entries


def bounded_families(count: int = 10, seed: int = CATALOGUE_SEED + 1) -> List[CatalogueEntry]:
    rng = np.random.default_rng(seed)
    return [
        random_declared_family(rng, 3 + i % 6, unbounded_share=0.0, name=f"bounded-{i:02d}")
        for i in range(count)
    ]


def unbounded_families(count: int = 5, seed: int = CATALOGUE_SEED + 2) -> List[CatalogueEntry]:
    rng = np.random.default_rng(seed)
    return [
        random_declared_family(rng, 3 + i, unbounded_share=1.0, name=f"unbounded-{i:02d}")
        for i in range(count)
    ]
