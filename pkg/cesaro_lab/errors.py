"""Exception hierarchy."""

from typing import Iterable, Optional


class CesaroLabError(Exception):
    """Base class for every error raised by cesaro_lab."""


class StructuralError(CesaroLabError, ValueError):
    """Shape, range or normalisation error in the inputs."""


class MetadataError(CesaroLabError):
    """Family metadata is missing or contradicted by evaluations."""


class UnknownMetadataError(MetadataError):
    """Exact mode met atoms whose boundedness is not declared."""

    def __init__(self, atoms: Iterable[int]):
        self.atoms = sorted(atoms)
        super().__init__(
            f"atoms {self.atoms} carry Unknown metadata; declare them or enable heuristic mode"
        )


class DeclaredBoundViolation(MetadataError):
    """A coefficient exceeded the bound its atom declares."""

    def __init__(self, atom: int, n: int, value: float, bound: float):
        self.atom = atom
        self.n = n
        self.value = value
        self.bound = bound
        super().__init__(
            f"atom {atom}: c[{n},{atom}] = {value!r} exceeds declared bound {bound!r}"
        )


class CertificateError(CesaroLabError):
    """The L1(Q) bound of a boundedness certificate was violated."""

    def __init__(self, k: int, atom: Optional[int], checked_sup: float, bound: float):
        self.k = k
        self.atom = atom
        self.checked_sup = checked_sup
        self.bound = bound
        super().__init__(
            f"E_Q at window position {k} is {checked_sup!r} > bound {bound!r}"
            f" (violating atom: {atom})"
        )


class GeneratorSpecError(CesaroLabError):
    """A generator spec violates one of its construction conditions."""

    def __init__(self, condition: str):
        self.condition = condition
        super().__init__(f"generator spec rejected: {condition}")


class ConfigError(CesaroLabError):
    """An experiment config failed to parse."""

    def __init__(self, key_path: str, message: str):
        self.key_path = key_path
        super().__init__(f"{key_path or '<root>'}: {message}")


class StageError(CesaroLabError):
    """A pipeline stage failed."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
