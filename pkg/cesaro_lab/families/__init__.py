"""Coefficient families, windows and Cesàro hulls."""

from .base import CoefficientFamily
from .builtin import CallableFamily, RuleFamily, constant_family, power_family
from .probe import GrowthProbe, diverges
from .rules import (
    AbsSineRule,
    AtomRule,
    BurstRule,
    ConstantRule,
    PowerRule,
    UniformNoiseRule,
    rule_from_dict,
)
from .table import TableFamily
from .window import CesaroFamily, SequenceWindow, cesaro, convex_combination, evaluate

__all__ = [
    "AbsSineRule",
    "AtomRule",
    "BurstRule",
    "CallableFamily",
    "CesaroFamily",
    "CoefficientFamily",
    "ConstantRule",
    "GrowthProbe",
    "PowerRule",
    "RuleFamily",
    "SequenceWindow",
    "TableFamily",
    "UniformNoiseRule",
    "cesaro",
    "constant_family",
    "convex_combination",
    "diverges",
    "evaluate",
    "power_family",
    "rule_from_dict",
]
