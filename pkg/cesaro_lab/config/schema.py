"""Experiment config schema and strict JSON loader.

Every parse error names the dotted key path of the first offending entry;
unknown keys are errors.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from ..errors import ConfigError, GeneratorSpecError, StructuralError
from ..families.base import CoefficientFamily
from ..families.builtin import RuleFamily, constant_family, power_family
from ..families.rules import rule_from_dict
from ..families.table import TableFamily, tag_from_meta
from ..models import AtomicSpace
from ..slln.generators import GeneratorSpec

KINDS = ("partition", "slln")
MODES = ("exact", "heuristic")
FAMILY_KINDS = ("constant", "power", "rules", "table")

_MISSING = object()


def _object(value: Any, path: str) -> Dict[str, Any]:
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected an object, got {type(value).__name__}")
    return value


def _reject_unknown(data: Mapping[str, Any], allowed: Tuple[str, ...], path: str) -> None:
    for key in data:
        if key not in allowed:
            raise ConfigError(_join(path, key), f"unknown key; allowed keys are {sorted(allowed)}")


def _join(path: str, key: Any) -> str:
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else str(key)


def _get(data: Mapping[str, Any], key: str, path: str, kind: Any, default: Any = _MISSING) -> Any:
    where = _join(path, key)
    if key not in data:
        if default is _MISSING:
            raise ConfigError(where, "required key is missing")
        return default
    value = data[key]
    if value is None and default is None:
        return None
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(where, f"expected a number, got {value!r}")
        value = float(value)
        if math.isnan(value):
            raise ConfigError(where, "NaN is not allowed")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(where, f"expected an integer, got {value!r}")
        return value
    if not isinstance(value, kind):
        raise ConfigError(where, f"expected {getattr(kind, '__name__', kind)}, got {value!r}")
    return value


def _floats(values: Any, path: str) -> Tuple[float, ...]:
    if not isinstance(values, list):
        raise ConfigError(path, "expected a list of numbers")
    return tuple(_get({"v": v}, "v", _join(path, i), float) for i, v in enumerate(values))


def _ints(values: Any, path: str) -> Tuple[int, ...]:
    if not isinstance(values, list):
        raise ConfigError(path, "expected a list of integers")
    return tuple(_get({"v": v}, "v", _join(path, i), int) for i, v in enumerate(values))


@dataclass(frozen=True)
class SpaceConfig:
    masses: Tuple[float, ...]
    tail_mass: float = 0.0
    labels: Tuple[int, ...] = ()

    @classmethod
    def parse(cls, data: Any, path: str = "space") -> "SpaceConfig":
        data = _object(data, path)
        _reject_unknown(data, ("masses", "tail_mass", "labels"), path)
        config = cls(
            masses=_floats(_get(data, "masses", path, list), _join(path, "masses")),
            tail_mass=_get(data, "tail_mass", path, float, 0.0),
            labels=_ints(data["labels"], _join(path, "labels")) if "labels" in data else (),
        )
        try:
            config.build()
        except StructuralError as e:
            raise ConfigError(path, str(e)) from None
        return config

    def build(self) -> AtomicSpace:
        return AtomicSpace(masses=self.masses, tail_mass=self.tail_mass, labels=self.labels)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"masses": list(self.masses), "tail_mass": self.tail_mass}
        if self.labels:
            data["labels"] = list(self.labels)
        return data


@dataclass(frozen=True)
class FamilyConfig:
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def parse(cls, data: Any, path: str = "family") -> "FamilyConfig":
        data = _object(data, path)
        kind = _get(data, "kind", path, str)
        if kind not in FAMILY_KINDS:
            raise ConfigError(_join(path, "kind"), f"expected one of {FAMILY_KINDS}, got {kind!r}")
        params: Dict[str, Any]
        if kind == "constant":
            _reject_unknown(data, ("kind", "value"), path)
            value = _get(data, "value", path, float)
            if value < 0:
                raise ConfigError(_join(path, "value"), "must be nonnegative")
            params = {"value": value}
        elif kind == "power":
            _reject_unknown(data, ("kind", "alpha", "scale"), path)
            scale = _get(data, "scale", path, float, 1.0)
            if scale < 0:
                raise ConfigError(_join(path, "scale"), "must be nonnegative")
            params = {"alpha": _get(data, "alpha", path, float), "scale": scale}
        elif kind == "rules":
            _reject_unknown(data, ("kind", "rules", "default", "description"), path)
            rules = _object(_get(data, "rules", path, dict, {}), _join(path, "rules"))
            for label, rule in rules.items():
                cls._check_label(label, _join(path, "rules"))
                cls._check_rule(rule, _join(_join(path, "rules"), label))
            default = _get(data, "default", path, dict, None)
            if default is not None:
                cls._check_rule(default, _join(path, "default"))
            if not rules and default is None:
                raise ConfigError(_join(path, "rules"), "need at least one rule or a default")
            params = {
                "rules": rules,
                "default": default,
                "description": _get(data, "description", path, str, ""),
            }
        else:
            _reject_unknown(data, ("kind", "path", "meta", "cesaro_meta"), path)
            params = {
                "path": _get(data, "path", path, str),
                "meta": cls._check_meta(data, "meta", path),
                "cesaro_meta": cls._check_meta(data, "cesaro_meta", path),
            }
        return cls(kind, params)

    @staticmethod
    def _check_label(label: str, path: str) -> None:
        if not label.isdigit() or int(label) < 1:
            raise ConfigError(_join(path, label), "atom labels must be positive integers")

    @classmethod
    def _check_meta(cls, data: Dict[str, Any], key: str, path: str) -> Dict[str, Any]:
        meta = _object(_get(data, key, path, dict, {}), _join(path, key))
        for label, entry in meta.items():
            cls._check_label(label, _join(path, key))
            try:
                tag_from_meta(entry)
            except StructuralError as e:
                raise ConfigError(_join(_join(path, key), label), str(e)) from None
        return meta

    @staticmethod
    def _check_rule(rule: Any, path: str) -> None:
        _object(rule, path)
        try:
            rule_from_dict(rule)
        except StructuralError as e:
            raise ConfigError(path, str(e)) from None

    def build(self, base_dir: Optional[Path] = None) -> CoefficientFamily:
        if self.kind == "constant":
            return constant_family(self.params["value"])
        if self.kind == "power":
            return power_family(self.params["alpha"], self.params["scale"])
        if self.kind == "rules":
            return RuleFamily.from_dict(self.params)
        table_path = Path(self.params["path"])
        if not table_path.is_absolute() and base_dir is not None:
            table_path = base_dir / table_path
        meta, cesaro_meta = (
            {int(label): tag_from_meta(entry) for label, entry in self.params[key].items()}
            for key in ("meta", "cesaro_meta")
        )
        return TableFamily.from_csv(table_path, meta=meta, cesaro_meta=cesaro_meta)

    def to_dict(self) -> Dict[str, Any]:
        data = {"kind": self.kind}
        for key, value in self.params.items():
            if value is None or (key in ("description", "cesaro_meta") and not value):
                continue
            data[key] = value
        return data


@dataclass(frozen=True)
class WindowConfig:
    horizon: Optional[int] = None
    indices: Tuple[int, ...] = ()
    komlos_horizon: Optional[int] = None
    komlos_block: Optional[int] = None

    @classmethod
    def parse(cls, data: Any, path: str = "window") -> "WindowConfig":
        data = _object(data, path)
        _reject_unknown(data, ("horizon", "indices", "komlos"), path)
        chosen = [key for key in ("horizon", "indices", "komlos") if key in data]
        if len(chosen) != 1:
            raise ConfigError(path, "exactly one of horizon, indices or komlos is required")
        if "horizon" in data:
            horizon = _get(data, "horizon", path, int)
            if horizon < 1:
                raise ConfigError(_join(path, "horizon"), "must be positive")
            return cls(horizon=horizon)
        if "indices" in data:
            indices = _ints(data["indices"], _join(path, "indices"))
            if not indices or indices[0] < 1 or any(b <= a for a, b in zip(indices, indices[1:])):
                raise ConfigError(
                    _join(path, "indices"), "must be nonempty, positive and strictly increasing"
                )
            return cls(indices=indices)
        komlos_path = _join(path, "komlos")
        komlos = _object(data["komlos"], komlos_path)
        _reject_unknown(komlos, ("horizon", "block"), komlos_path)
        horizon = _get(komlos, "horizon", komlos_path, int)
        block = _get(komlos, "block", komlos_path, int)
        if block < 1 or horizon < 4 * block:
            raise ConfigError(komlos_path, "need block >= 1 and horizon >= 4 x block")
        return cls(komlos_horizon=horizon, komlos_block=block)

    @property
    def selection(self) -> str:
        if self.horizon is not None:
            return "horizon"
        return "indices" if self.indices else "komlos"

    def to_dict(self) -> Dict[str, Any]:
        if self.horizon is not None:
            return {"horizon": self.horizon}
        if self.indices:
            return {"indices": list(self.indices)}
        return {"komlos": {"horizon": self.komlos_horizon, "block": self.komlos_block}}


@dataclass(frozen=True)
class Tolerances:
    tol: float = 1e-3
    stability_span: Optional[int] = None
    eps_grid: Tuple[float, ...] = (0.5, 0.1, 0.01)

    @classmethod
    def parse(cls, data: Any, path: str = "tolerances") -> "Tolerances":
        data = _object(data, path)
        _reject_unknown(data, ("tol", "stability_span", "eps_grid"), path)
        tol = _get(data, "tol", path, float, 1e-3)
        if tol <= 0:
            raise ConfigError(_join(path, "tol"), "must be positive")
        span = _get(data, "stability_span", path, int, None)
        if span is not None and span < 1:
            raise ConfigError(_join(path, "stability_span"), "must be positive")
        eps_grid = cls.eps_grid
        if "eps_grid" in data:
            eps_grid = _floats(data["eps_grid"], _join(path, "eps_grid"))
        for i, eps in enumerate(eps_grid):
            if not (0 < eps < 1):
                raise ConfigError(_join(_join(path, "eps_grid"), i), "epsilon must lie in (0, 1)")
        if not eps_grid:
            raise ConfigError(_join(path, "eps_grid"), "must not be empty")
        return cls(tol=tol, stability_span=span, eps_grid=eps_grid)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tol": self.tol,
            "stability_span": self.stability_span,
            "eps_grid": list(self.eps_grid),
        }


@dataclass(frozen=True)
class OracleConfig:
    samples: int = 1000
    grid_points: int = 64

    @classmethod
    def parse(cls, data: Any, path: str = "oracle") -> "OracleConfig":
        data = _object(data, path)
        _reject_unknown(data, ("samples", "grid_points"), path)
        samples = _get(data, "samples", path, int, 1000)
        points = _get(data, "grid_points", path, int, 64)
        if samples < 0:
            raise ConfigError(_join(path, "samples"), "must be nonnegative")
        if points < 2:
            raise ConfigError(_join(path, "grid_points"), "need at least 2 levels")
        return cls(samples=samples, grid_points=points)

    def to_dict(self) -> Dict[str, Any]:
        return {"samples": self.samples, "grid_points": self.grid_points}


GENERATOR_KEYS = (
    "kind", "length", "paths", "declared_finite_mean", "distribution", "params", "lag", "kernel",
    "mean", "variance", "variance_growth", "correlation", "c", "slln_tol",
)
NONNEGATIVE_GENERATOR_KEYS = ("mean", "variance", "variance_growth", "c")


@dataclass(frozen=True)
class GeneratorConfig:
    values: Dict[str, Any]
    slln_tol: float = 0.05

    @classmethod
    def parse(cls, data: Any, seed: int, path: str = "generator") -> "GeneratorConfig":
        data = _object(data, path)
        _reject_unknown(data, GENERATOR_KEYS, path)
        values: Dict[str, Any] = {
            "kind": _get(data, "kind", path, str),
            "length": _get(data, "length", path, int),
        }
        values["paths"] = _get(data, "paths", path, int, 1)
        values["declared_finite_mean"] = _get(data, "declared_finite_mean", path, bool, True)
        if "distribution" in data:
            values["distribution"] = _get(data, "distribution", path, str)
        if "params" in data:
            params = _object(data["params"], _join(path, "params"))
            values["params"] = {k: _get(params, k, _join(path, "params"), float) for k in params}
        if "lag" in data:
            values["lag"] = _get(data, "lag", path, int)
        if "kernel" in data:
            values["kernel"] = list(_floats(data["kernel"], _join(path, "kernel")))
        for key in ("mean", "variance", "variance_growth", "c"):
            if key in data:
                values[key] = _get(data, key, path, float)
                if key in NONNEGATIVE_GENERATOR_KEYS and values[key] < 0:
                    raise ConfigError(_join(path, key), "must be nonnegative")
        if "correlation" in data:
            values["correlation"] = _get(data, "correlation", path, str)
        slln_tol = _get(data, "slln_tol", path, float, 0.05)
        config = cls(values=values, slln_tol=slln_tol)
        try:
            config.build(seed)
        except GeneratorSpecError as e:
            raise ConfigError(path, e.condition) from None
        return config

    def build(self, seed: int) -> GeneratorSpec:
        values = dict(self.values)
        if "kernel" in values:
            values["kernel"] = tuple(values["kernel"])
        return GeneratorSpec(seed=seed, **values)

    def to_dict(self) -> Dict[str, Any]:
        return {**self.values, "slln_tol": self.slln_tol}


EXPECT_KEYS = ("bounded_atoms", "unbounded_atoms", "finite_set", "slln_branch", "verdicts")


@dataclass(frozen=True)
class ExpectConfig:
    """Golden values a run is checked against."""
    bounded_atoms: Optional[Tuple[int, ...]] = None
    unbounded_atoms: Optional[Tuple[int, ...]] = None
    finite_set: Optional[Tuple[int, ...]] = None
    slln_branch: Optional[str] = None
    verdicts: Dict[str, str] = field(default_factory=dict)

    @classmethod
    def parse(cls, data: Any, path: str = "expect") -> "ExpectConfig":
        data = _object(data, path)
        _reject_unknown(data, EXPECT_KEYS, path)
        sets = {
            key: tuple(sorted(_ints(data[key], _join(path, key)))) if key in data else None
            for key in ("bounded_atoms", "unbounded_atoms", "finite_set")
        }
        branch = _get(data, "slln_branch", path, str, None)
        if branch not in (None, "finite", "infinite"):
            raise ConfigError(_join(path, "slln_branch"), "must be 'finite' or 'infinite'")
        verdicts = _object(_get(data, "verdicts", path, dict, {}), _join(path, "verdicts"))
        for name, status in verdicts.items():
            if status not in ("pass", "fail", "inconclusive"):
                raise ConfigError(
                    _join(_join(path, "verdicts"), name), "must be pass, fail or inconclusive"
                )
        return cls(slln_branch=branch, verdicts=dict(verdicts), **sets)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {}
        for key in ("bounded_atoms", "unbounded_atoms", "finite_set"):
            value = getattr(self, key)
            if value is not None:
                data[key] = list(value)
        if self.slln_branch is not None:
            data["slln_branch"] = self.slln_branch
        if self.verdicts:
            data["verdicts"] = dict(self.verdicts)
        return data


TOP_KEYS = (
    "name", "kind", "seed", "mode", "space", "family", "window", "tolerances", "oracle",
    "generator", "expect", "output",
)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    kind: str
    seed: int = 0
    mode: str = "exact"
    space: Optional[SpaceConfig] = None
    family: Optional[FamilyConfig] = None
    window: Optional[WindowConfig] = None
    tolerances: Tolerances = Tolerances()
    oracle: OracleConfig = OracleConfig()
    generator: Optional[GeneratorConfig] = None
    expect: ExpectConfig = ExpectConfig()
    output: Optional[str] = None
    base_dir: Optional[Path] = field(default=None, compare=False)

    @property
    def heuristic(self) -> bool:
        return self.mode == "heuristic"

    def with_overrides(
        self,
        seed: Optional[int] = None,
        mode: Optional[str] = None,
        eps_grid: Optional[List[float]] = None,
        output: Optional[str] = None,
    ) -> "ExperimentConfig":
        """Copy with CLI flags applied, re-validated through the parser."""
        data = self.to_dict()
        if seed is not None:
            data["seed"] = seed
        if mode is not None:
            data["mode"] = mode
        if eps_grid is not None:
            data.setdefault("tolerances", {})["eps_grid"] = list(eps_grid)
        if output is not None:
            data["output"] = output
        return parse_config(data, base_dir=self.base_dir)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "name": self.name, "kind": self.kind, "seed": self.seed, "mode": self.mode,
            "tolerances": self.tolerances.to_dict(), "oracle": self.oracle.to_dict(),
        }
        for key in ("space", "family", "window", "generator"):
            value = getattr(self, key)
            if value is not None:
                data[key] = value.to_dict()
        expect = self.expect.to_dict()
        if expect:
            data["expect"] = expect
        if self.output is not None:
            data["output"] = self.output
        return data


def parse_config(data: Any, base_dir: Optional[Path] = None) -> ExperimentConfig:
    """Build an ExperimentConfig from decoded JSON, rejecting anything unexpected."""
    data = _object(data, "")
    _reject_unknown(data, TOP_KEYS, "")
    kind = _get(data, "kind", "", str)
    if kind not in KINDS:
        raise ConfigError("kind", f"expected one of {KINDS}, got {kind!r}")
    seed = _get(data, "seed", "", int, 0)
    if not (0 <= seed < 2 ** 64):
        raise ConfigError("seed", "must be an unsigned 64-bit integer")
    mode = _get(data, "mode", "", str, "exact")
    if mode not in MODES:
        raise ConfigError("mode", f"expected one of {MODES}, got {mode!r}")

    values: Dict[str, Any] = {
        "name": _get(data, "name", "", str),
        "kind": kind,
        "seed": seed,
        "mode": mode,
        "output": _get(data, "output", "", str, None),
        "base_dir": base_dir,
    }
    if "tolerances" in data:
        values["tolerances"] = Tolerances.parse(data["tolerances"])
    if "oracle" in data:
        values["oracle"] = OracleConfig.parse(data["oracle"])
    if "expect" in data:
        values["expect"] = ExpectConfig.parse(data["expect"])

    if kind == "partition":
        for key in ("space", "family", "window"):
            if key not in data:
                raise ConfigError(key, "required key is missing")
        if "generator" in data:
            raise ConfigError("generator", "only slln experiments take a generator")
        values["space"] = SpaceConfig.parse(data["space"])
        values["family"] = FamilyConfig.parse(data["family"])
        values["window"] = WindowConfig.parse(data["window"])
    else:
        if "generator" not in data:
            raise ConfigError("generator", "required key is missing")
        for key in ("space", "family", "window"):
            if key in data:
                raise ConfigError(key, "slln experiments build their own space from sampled paths")
        values["generator"] = GeneratorConfig.parse(data["generator"], seed)
    return ExperimentConfig(**values)


def load_config(path: Path) -> ExperimentConfig:
    """Read and parse a JSON config file; relative table paths resolve against its folder."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError("", f"cannot read {path}: {e.strerror or e}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("", f"{path} is not valid JSON: {e.msg} at line {e.lineno}") from None
    return parse_config(data, base_dir=path.parent)
