"""Built-in coefficient families."""

from typing import Any, Callable, Dict, Mapping, Optional

import numpy as np

from ..errors import StructuralError
from ..models import AtomTag
from .base import CoefficientFamily
from .rules import AtomRule, ConstantRule, PowerRule, rule_from_dict


class RuleFamily(CoefficientFamily):
    """Family assembled from one rule per atom label, with an optional default."""

    def __init__(
        self,
        rules: Mapping[int, AtomRule],
        default: Optional[AtomRule] = None,
        description: str = "",
    ):
        self.rules = dict(rules)
        self.default = default
        self.description = description or self._describe()

    def rule_for(self, label: int) -> AtomRule:
        rule = self.rules.get(label, self.default)
        if rule is None:
            raise StructuralError(f"no rule for atom {label}")
        return rule

    def coefficients(self, indices: np.ndarray, label: int) -> np.ndarray:
        return self.rule_for(label).values(np.asarray(indices, dtype=np.int64))

    def tag_for(self, label: int, indices: Optional[np.ndarray] = None) -> AtomTag:
        return self.rule_for(label).tag(indices)

    def cesaro_tag_for(self, label: int, indices: Optional[np.ndarray] = None) -> AtomTag:
        return self.rule_for(label).cesaro_tag(indices)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "description": self.description,
            "rules": {str(label): rule.to_dict() for label, rule in sorted(self.rules.items())},
        }
        if self.default is not None:
            data["default"] = self.default.to_dict()
        return data

    def _describe(self) -> str:
        kinds = sorted({rule.kind for rule in self.rules.values()})
        if self.default is not None:
            kinds.append(f"default={self.default.kind}")
        return "rules: " + ", ".join(kinds)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RuleFamily":
        rules = {int(label): rule_from_dict(rule) for label, rule in data.get("rules", {}).items()}
        default = rule_from_dict(data["default"]) if data.get("default") else None
        return cls(rules, default=default, description=data.get("description", ""))


class CallableFamily(CoefficientFamily):
    """Family given by a plain function c(n, m) and a dict of declared tags."""

    def __init__(
        self,
        function: Callable[[int, int], float],
        tags: Optional[Mapping[int, AtomTag]] = None,
        cesaro_tags: Optional[Mapping[int, AtomTag]] = None,
        description: str = "callable",
    ):
        self.function = function
        self.tags = dict(tags or {})
        self.cesaro_tags = dict(cesaro_tags or {})
        self.description = description

    def coefficients(self, indices: np.ndarray, label: int) -> np.ndarray:
        return np.array([float(self.function(int(n), label)) for n in indices], dtype=float)

    def tag_for(self, label: int, indices: Optional[np.ndarray] = None) -> AtomTag:
        return self.tags.get(label, AtomTag.unknown())

    def cesaro_tag_for(self, label: int, indices: Optional[np.ndarray] = None) -> AtomTag:
        if label in self.cesaro_tags:
            return self.cesaro_tags[label]
        return super().cesaro_tag_for(label, indices)


def constant_family(value: float) -> RuleFamily:
    return RuleFamily({}, default=ConstantRule(value), description=f"constant c = {value:g}")


def power_family(alpha: float, scale: float = 1.0) -> RuleFamily:
    return RuleFamily(
        {},
        default=PowerRule(alpha=alpha, scale=scale),
        description=f"power c = {scale:g} n^{alpha:g}",
    )
