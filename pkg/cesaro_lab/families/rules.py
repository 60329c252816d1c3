"""Per-atom coefficient rules with declared boundedness."""

from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np

from ..errors import StructuralError
from ..models import AtomTag


class AtomRule(ABC):
    """Sequence n -> c[n, m] for one atom, with its own tags."""

    kind: str = ""

    @abstractmethod
    def values(self, indices: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def tag(self, indices: Optional[np.ndarray] = None) -> AtomTag:
        pass

    def cesaro_tag(self, indices: Optional[np.ndarray] = None) -> AtomTag:
        return self.tag(indices)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, **asdict(self)}  # type: ignore[call-overload]


@dataclass(frozen=True)
class ConstantRule(AtomRule):
    value: float = 1.0
    kind = "constant"

    def __post_init__(self) -> None:
        if self.value < 0:
            raise StructuralError(f"constant rule value {self.value!r} is negative")

    def values(self, indices: np.ndarray) -> np.ndarray:
        return np.full(indices.shape, float(self.value))

    def tag(self, indices: Optional[np.ndarray] = None) -> AtomTag:
        return AtomTag.bounded(self.value)


@dataclass(frozen=True)
class PowerRule(AtomRule):
    """c[n] = scale * n ** alpha; unbounded exactly when alpha > 0."""
    alpha: float = 1.0
    scale: float = 1.0
    kind = "power"

    def __post_init__(self) -> None:
        if self.scale < 0:
            raise StructuralError(f"power rule scale {self.scale!r} is negative")

    def values(self, indices: np.ndarray) -> np.ndarray:
        return self.scale * np.power(indices.astype(float), self.alpha)

    def tag(self, indices: Optional[np.ndarray] = None) -> AtomTag:
        if self.alpha > 0 and self.scale > 0:
            return AtomTag.unbounded()
        return AtomTag.bounded(self.scale)


@dataclass(frozen=True)
class AbsSineRule(AtomRule):
    amplitude: float = 1.0
    kind = "abs_sine"

    def __post_init__(self) -> None:
        if self.amplitude < 0:
            raise StructuralError(f"abs_sine amplitude {self.amplitude!r} is negative")

    def values(self, indices: np.ndarray) -> np.ndarray:
        return self.amplitude * np.abs(np.sin(indices.astype(float)))

    def tag(self, indices: Optional[np.ndarray] = None) -> AtomTag:
        return AtomTag.bounded(self.amplitude)


@dataclass(frozen=True)
class BurstRule(AtomRule):
    """c[n] = base + spike * n ** growth when n = phase (mod period), else base.

    Tags are window-aware: a subsequence that avoids the burst residue keeps
    the base bound even when the full sequence is unbounded.
    """
    base: float = 0.0
    spike: float = 1.0
    growth: float = 1.0
    period: int = 2
    phase: int = 1
    kind = "burst"

    def __post_init__(self) -> None:
        if self.period < 1:
            raise StructuralError("burst period must be at least 1")
        if self.base < 0 or self.spike < 0:
            raise StructuralError("burst base and spike must be nonnegative")

    def hits(self, indices: np.ndarray) -> np.ndarray:
        return np.mod(indices, self.period) == self.phase % self.period

    def values(self, indices: np.ndarray) -> np.ndarray:
        spikes = self.spike * np.power(indices.astype(float), self.growth)
        return np.where(self.hits(indices), self.base + spikes, self.base)

    def tag(self, indices: Optional[np.ndarray] = None) -> AtomTag:
        bursts = True if indices is None else bool(self.hits(indices).any())
        if not bursts or self.spike == 0:
            return AtomTag.bounded(self.base)
        if self.growth > 0:
            return AtomTag.unbounded()
        return AtomTag.bounded(self.base + self.spike)


@dataclass(frozen=True)
class UniformNoiseRule(AtomRule):
    """I.i.d. Uniform[low, high] coefficients.

    c[n] is the first draw of the generator seeded with (seed, stream, n), so
    any index can be evaluated on its own.
    """
    low: float = 0.0
    high: float = 1.0
    seed: int = 0
    stream: int = 0
    kind = "uniform_noise"

    def __post_init__(self) -> None:
        if not (0 <= self.low <= self.high):
            raise StructuralError("uniform_noise needs 0 <= low <= high")

    def values(self, indices: np.ndarray) -> np.ndarray:
        draws = [
            np.random.default_rng([self.seed, self.stream, int(n)]).uniform(self.low, self.high)
            for n in np.ravel(indices)
        ]
        return np.asarray(draws, dtype=float).reshape(np.shape(indices))

    def tag(self, indices: Optional[np.ndarray] = None) -> AtomTag:
        return AtomTag.bounded(self.high)


RULE_TYPES = {
    rule.kind: rule
    for rule in (ConstantRule, PowerRule, AbsSineRule, BurstRule, UniformNoiseRule)
}


def rule_from_dict(data: Dict[str, Any]) -> AtomRule:
    params = dict(data)
    kind = params.pop("kind", None)
    if kind not in RULE_TYPES:
        raise StructuralError(f"unknown rule kind {kind!r}; expected one of {sorted(RULE_TYPES)}")
    try:
        return RULE_TYPES[kind](**params)
    except TypeError as e:
        raise StructuralError(f"bad parameters for rule '{kind}': {e}") from None
