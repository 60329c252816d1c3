"""Core data models for atomic-space Cesàro analysis."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .errors import StructuralError

MEASURE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class AtomicSpace:
    """Finite prefix of a countable atomic probability space.

    ``masses[i]`` is the probability of the atom at position ``i``; ``labels``
    keeps the original 1-based atom index m so that reordering or truncating
    the prefix never changes which A_m an entry refers to. Everything beyond
    the prefix is lumped into ``tail_mass``.
    """
    masses: Tuple[float, ...]
    tail_mass: float = 0.0
    labels: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        masses = tuple(float(p) for p in self.masses)
        if not masses:
            raise StructuralError("an atomic space needs at least one atom")
        for position, p in enumerate(masses):
            if not (0.0 < p <= 1.0):
                raise StructuralError(f"atom at position {position} has mass {p!r} outside (0, 1]")
        tail = float(self.tail_mass)
        if not (0.0 <= tail < 1.0):
            raise StructuralError(f"tail_mass {tail!r} outside [0, 1)")
        total = math.fsum(masses) + tail
        if abs(total - 1.0) > MEASURE_TOLERANCE:
            raise StructuralError(f"masses plus tail sum to {total!r}, not 1")

        labels = tuple(int(label) for label in self.labels) or tuple(range(1, len(masses) + 1))
        if len(labels) != len(masses):
            raise StructuralError("one label per atom is required")
        if len(set(labels)) != len(labels) or min(labels) < 1:
            raise StructuralError("atom labels must be distinct positive integers")

        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "tail_mass", tail)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def uniform(cls, atoms: int) -> "AtomicSpace":
        return cls(masses=tuple([1.0 / atoms] * atoms))

    @classmethod
    def geometric(cls, atoms: int, ratio: float = 0.5) -> "AtomicSpace":
        """P(A_m) = (1 - r) r^(m-1) on the first ``atoms`` atoms, rest in the tail."""
        masses = tuple((1.0 - ratio) * ratio ** m for m in range(atoms))
        return cls(masses=masses, tail_mass=ratio ** atoms)

    @property
    def size(self) -> int:
        return len(self.masses)

    @property
    def mass_array(self) -> np.ndarray:
        return np.asarray(self.masses, dtype=float)

    def position_of(self, label: int) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise StructuralError(f"atom {label} is not tracked by this space") from None

    def mass_of(self, label: int) -> float:
        return self.masses[self.position_of(label)]

    def reordered(self, order: Sequence[int]) -> "AtomicSpace":
        """Same atoms, listed in the given order of positions."""
        if sorted(order) != list(range(self.size)):
            raise StructuralError("order must be a permutation of atom positions")
        return AtomicSpace(
            masses=tuple(self.masses[i] for i in order),
            tail_mass=self.tail_mass,
            labels=tuple(self.labels[i] for i in order),
        )


@dataclass(frozen=True, eq=False)
class SimpleRV:
    """Nonnegative random variable that is constant on every tracked atom."""
    values: np.ndarray
    is_limit: bool = False

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise StructuralError("a simple random variable needs one value per atom")
        if np.isnan(values).any():
            raise StructuralError("NaN is not a valid random-variable value")
        if (values < 0).any():
            raise StructuralError("random-variable values must be nonnegative")
        if np.isinf(values).any() and not self.is_limit:
            raise StructuralError("only limit objects may take the value +inf")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)

    def restricted(self, positions: Sequence[int]) -> "SimpleRV":
        """X * 1_B for B the union of the atoms at ``positions``."""
        mask = np.zeros(self.values.size, dtype=bool)
        mask[list(positions)] = True
        return SimpleRV(np.where(mask, self.values, 0.0), is_limit=self.is_limit)


@dataclass(frozen=True)
class EquivalentMeasure:
    """Q with Q(A_m) = q_m / K on the tracked atoms."""
    labels: Tuple[int, ...]
    weights: Tuple[float, ...]
    tail_probability: float = 0.0
    normalizer: float = field(init=False)
    atom_probabilities: Tuple[float, ...] = field(init=False)

    def __post_init__(self) -> None:
        weights = tuple(float(q) for q in self.weights)
        if not weights:
            raise StructuralError("an equivalent measure needs at least one atom")
        if len(weights) != len(self.labels):
            raise StructuralError("one weight per atom label is required")
        if any(not (q > 0.0) or math.isinf(q) for q in weights):
            raise StructuralError("every weight q_m must be finite and positive for Q ~ P")
        normalizer = math.fsum(weights)
        if not (0.0 < normalizer < math.inf):
            raise StructuralError(f"normalizer K = {normalizer!r} must be finite and positive")
        scale = 1.0 - self.tail_probability
        probabilities = tuple(scale * q / normalizer for q in weights)
        total = math.fsum(probabilities) + self.tail_probability
        if abs(total - 1.0) > MEASURE_TOLERANCE:
            raise StructuralError(f"Q sums to {total!r}, not 1")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "normalizer", normalizer)
        object.__setattr__(self, "atom_probabilities", probabilities)

    @property
    def probability_array(self) -> np.ndarray:
        return np.asarray(self.atom_probabilities, dtype=float)

    def probability_of_label(self, label: int) -> float:
        return self.atom_probabilities[self.labels.index(label)]


class TagKind(Enum):
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class AtomTag:
    """Boundedness metadata for one atom's coefficient sequence."""
    kind: TagKind
    bound: Optional[float] = None

    @classmethod
    def bounded(cls, bound: float) -> "AtomTag":
        # measure construction needs C_m >= 1
        return cls(TagKind.BOUNDED, max(float(bound), 1.0))

    @classmethod
    def unbounded(cls) -> "AtomTag":
        return cls(TagKind.UNBOUNDED)

    @classmethod
    def unknown(cls) -> "AtomTag":
        return cls(TagKind.UNKNOWN)

    @property
    def is_bounded(self) -> bool:
        return self.kind is TagKind.BOUNDED

    @property
    def is_unbounded(self) -> bool:
        return self.kind is TagKind.UNBOUNDED

    @property
    def is_unknown(self) -> bool:
        return self.kind is TagKind.UNKNOWN

    def combine(self, other: "AtomTag") -> "AtomTag":
        """Tag of a sequence interleaving two sequences."""
        if self.is_unbounded or other.is_unbounded:
            return AtomTag.unbounded()
        if self.is_unknown or other.is_unknown:
            return AtomTag.unknown()
        return AtomTag.bounded(max(self.bound or 1.0, other.bound or 1.0))


class Provenance(Enum):
    EXACT = "exact"
    HEURISTIC = "heuristic"


class HullKind(Enum):
    BASE = "C"
    CESARO = "C_bar"


@dataclass(frozen=True)
class Partition:
    """Index sets J_b / J_u realising {Omega_b, Omega_u} on the tracked atoms."""
    bounded_atoms: FrozenSet[int]
    unbounded_atoms: FrozenSet[int]
    provenance: Provenance
    bounds: Dict[int, float] = field(default_factory=dict)
    hull: HullKind = HullKind.BASE
    probed_atoms: FrozenSet[int] = frozenset()

    def __post_init__(self) -> None:
        if self.bounded_atoms & self.unbounded_atoms:
            raise StructuralError("J_b and J_u must be disjoint")
        missing = set(self.bounded_atoms) - set(self.bounds)
        if missing:
            raise StructuralError(f"bounded atoms {sorted(missing)} have no bound C_m")

    @property
    def atoms(self) -> List[int]:
        return sorted(self.bounded_atoms | self.unbounded_atoms)


@dataclass(frozen=True)
class BoundednessCertificate:
    """L1(Q) certificate for the hull restricted to U_b."""
    measure: EquivalentMeasure
    bounded_atoms: FrozenSet[int]
    l1_bound: float
    checked_sup: float
    argmax_position: int
    provenance: Provenance
    hull: HullKind = HullKind.BASE
    seed: Optional[int] = None


@dataclass(frozen=True)
class BoundednessDecision:
    """Answer to 'is C|_B bounded in probability at level epsilon'."""
    bounded: bool
    epsilon: float
    bound: Optional[float] = None
    witness: Optional[int] = None
    method: str = "reduction"
    provenance: Provenance = Provenance.EXACT

    @classmethod
    def bounded_with(cls, bound: float, epsilon: float, **kwargs: Any) -> "BoundednessDecision":
        return cls(True, epsilon, bound=float(bound), **kwargs)

    @classmethod
    def unbounded(
        cls, epsilon: float, witness: Optional[int] = None, **kwargs: Any
    ) -> "BoundednessDecision":
        return cls(False, epsilon, witness=witness, **kwargs)


@dataclass(frozen=True)
class LimitProfile:
    """Per-atom Cesàro limit: a float (possibly inf) or None for NoLimit."""
    labels: Tuple[int, ...]
    limits: Tuple[Optional[float], ...]
    tol: float
    stability_span: int
    window_length: int

    @property
    def finite_set(self) -> FrozenSet[int]:
        return frozenset(
            label for label, value in zip(self.labels, self.limits)
            if value is not None and math.isfinite(value)
        )

    @property
    def infinite_set(self) -> FrozenSet[int]:
        return frozenset(
            label for label, value in zip(self.labels, self.limits)
            if value is not None and math.isinf(value)
        )

    @property
    def no_limit_set(self) -> FrozenSet[int]:
        return frozenset(label for label, value in zip(self.labels, self.limits) if value is None)

    @property
    def converged(self) -> bool:
        return not self.no_limit_set

    def limit_of(self, label: int) -> Optional[float]:
        return self.limits[self.labels.index(label)]


class TightnessVerdict(Enum):
    TIGHT = "tight"
    NOT_TIGHT_ON_WINDOW = "not_tight_on_window"


@dataclass(frozen=True)
class TightnessReport:
    eps_grid: Tuple[float, ...]
    quantiles: Tuple[Tuple[float, ...], ...]  # sample x eps
    max_quantiles: Dict[float, float]
    verdict: TightnessVerdict

    @property
    def is_tight(self) -> bool:
        return self.verdict is TightnessVerdict.TIGHT

    def envelope(self, epsilon: float) -> np.ndarray:
        """Running supremum over samples of the (1 - epsilon)-quantile."""
        column = self.eps_grid.index(epsilon)
        return np.maximum.accumulate(np.array([row[column] for row in self.quantiles]))


@dataclass(frozen=True)
class DistributionSummary:
    """Law of a simple random variable: support points and their masses."""
    support: Tuple[float, ...]
    probabilities: Tuple[float, ...]

    @property
    def mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self.support, self.probabilities))

    @property
    def is_point_mass(self) -> bool:
        return len(self.support) == 1


@dataclass(frozen=True)
class WeakConvergenceResult:
    converges: bool
    max_distance: float
    limit: Optional[DistributionSummary] = None
    grid_points: int = 256


class VerdictStatus(Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


@dataclass
class Verdict:
    """Machine verdict plus the human narrative that explains it."""
    name: str
    status: VerdictStatus
    provenance: Provenance = Provenance.EXACT
    parameters: Dict[str, Any] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)
    narrative: str = ""

    @property
    def passed(self) -> bool:
        return self.status is VerdictStatus.PASS


@dataclass(frozen=True)
class PropMainReport:
    finite_set: FrozenSet[int]
    omega_b: FrozenSet[int]
    omega_bar_b: FrozenSet[int]
    equal: Tuple[bool, bool, bool]  # finite = Omega_b, finite = bar Omega_b, Omega_b = bar Omega_b
    no_limit: FrozenSet[int]
    full_range_bounded: FrozenSet[int]
    status: VerdictStatus


@dataclass
class RunReport:
    """Everything a single experiment produced."""
    name: str
    kind: str
    config: Dict[str, Any]
    seed: int
    version: str
    partition: Optional[Partition] = None
    cesaro_partition: Optional[Partition] = None
    limit_profile: Optional[LimitProfile] = None
    certificate: Optional[BoundednessCertificate] = None
    verdicts: List[Verdict] = field(default_factory=list)
    summaries: Dict[str, Any] = field(default_factory=dict)
    timings: Dict[str, Any] = field(default_factory=dict)
    series: Dict[str, np.ndarray] = field(default_factory=dict)  # plot data, CSV only
    series_keys: Dict[str, List[Any]] = field(default_factory=dict)  # column keys per series
    expected: Dict[str, str] = field(default_factory=dict)  # verdict name -> expected status
    error: Optional[str] = None

    def verdict_ok(self, verdict: Verdict) -> bool:
        return verdict.status.value == self.expected.get(verdict.name, VerdictStatus.PASS.value)

    @property
    def passed(self) -> bool:
        return self.error is None and all(self.verdict_ok(v) for v in self.verdicts)
