"""SLLN generators and empirical regime checks."""

from .checks import slln_regime_check, verify_variance_condition
from .generators import EmpiricalRun, GeneratorSpec, generate, implied_mixing_coefficients

__all__ = [
    "EmpiricalRun",
    "GeneratorSpec",
    "generate",
    "implied_mixing_coefficients",
    "slln_regime_check",
    "verify_variance_condition",
]
