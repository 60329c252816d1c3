"""Nonnegative sequence generators with SLLN hypotheses built in."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy import stats

from ..errors import GeneratorSpecError

logger = logging.getLogger(__name__)

KINDS = ("iid", "m_dependent", "correlated_variance")
CORRELATIONS = ("antithetic", "independent", "comonotone")


def law_for(distribution: str, params: Dict[str, float]) -> Any:
    """Frozen scipy law for a named nonnegative distribution."""
    p = dict(params)
    try:
        if distribution == "exponential":
            rate = p.pop("rate", 1.0)
            if rate <= 0:
                raise GeneratorSpecError("exponential rate must be positive")
            law = stats.expon(scale=1.0 / rate)
        elif distribution == "pareto":
            shape, scale = p.pop("shape"), p.pop("scale", 1.0)
            if shape <= 0 or scale <= 0:
                raise GeneratorSpecError("pareto shape and scale must be positive")
            law = stats.pareto(b=shape, scale=scale)
        elif distribution == "uniform":
            low, high = p.pop("low", 0.0), p.pop("high", 1.0)
            if not (0 <= low < high):
                raise GeneratorSpecError("uniform law needs 0 <= low < high")
            law = stats.uniform(loc=low, scale=high - low)
        elif distribution == "gamma":
            shape, scale = p.pop("shape"), p.pop("scale", 1.0)
            if shape <= 0 or scale <= 0:
                raise GeneratorSpecError("gamma shape and scale must be positive")
            law = stats.gamma(a=shape, scale=scale)
        elif distribution == "lognormal":
            sigma, scale = p.pop("sigma"), p.pop("scale", 1.0)
            if sigma <= 0 or scale <= 0:
                raise GeneratorSpecError("lognormal sigma and scale must be positive")
            law = stats.lognorm(s=sigma, scale=scale)
        elif distribution == "constant":
            value = p.pop("value")
            if value < 0:
                raise GeneratorSpecError("constant value must be nonnegative")
            law = ConstantLaw(float(value))
        else:
            raise GeneratorSpecError(f"unknown distribution '{distribution}'")
    except KeyError as e:
        raise GeneratorSpecError(f"{distribution} needs parameter '{e.args[0]}'") from None
    if p:
        raise GeneratorSpecError(f"unexpected parameters for {distribution}: {sorted(p)}")
    return law


@dataclass(frozen=True)
class ConstantLaw:
    """Degenerate law with the frozen-distribution methods the generators use."""
    value: float

    def mean(self) -> float:
        return self.value

    def var(self) -> float:
        return 0.0

    def rvs(self, size: int, random_state: Optional[np.random.Generator] = None) -> np.ndarray:
        return np.full(size, self.value)


@dataclass(frozen=True)
class GeneratorSpec:
    """What to simulate, how long, how many paths and from which seed."""
    kind: str
    length: int
    paths: int = 1
    seed: int = 0
    declared_finite_mean: bool = True
    distribution: str = "exponential"
    params: Dict[str, float] = field(default_factory=dict)
    lag: int = 0
    kernel: Tuple[float, ...] = ()
    mean: float = 1.0
    variance: float = 0.0
    variance_growth: float = 0.0
    correlation: str = "antithetic"
    c: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kernel", tuple(float(w) for w in self.kernel))
        self.validate()

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise GeneratorSpecError(f"kind must be one of {KINDS}")
        if self.length < 1 or self.paths < 1:
            raise GeneratorSpecError("length and paths must be positive")
        if not (0 <= self.seed < 2 ** 64):
            raise GeneratorSpecError("seed must fit in 64 bits")
        if self.kind == "iid":
            self._validate_iid()
        elif self.kind == "m_dependent":
            self._validate_m_dependent()
        else:
            self._validate_correlated()

    def _validate_iid(self) -> None:
        mean = float(self.law.mean())
        if self.declared_finite_mean and not math.isfinite(mean):
            raise GeneratorSpecError(
                f"declared finite mean but {self.distribution} has infinite mean"
            )
        if not self.declared_finite_mean and math.isfinite(mean):
            raise GeneratorSpecError(
                f"declared infinite mean but {self.distribution} has mean {mean:g}"
            )

    def _validate_m_dependent(self) -> None:
        if not self.declared_finite_mean:
            raise GeneratorSpecError("infinite mean is only constructed for iid kinds")
        if self.lag < 1:
            raise GeneratorSpecError("m_dependent lag must be at least 1")
        if len(self.kernel) != self.lag + 1:
            raise GeneratorSpecError(
                f"kernel needs lag + 1 = {self.lag + 1} weights, got {len(self.kernel)}"
            )
        if any(w < 0 for w in self.kernel) or sum(self.kernel) <= 0:
            raise GeneratorSpecError("kernel weights must be nonnegative with a positive sum")
        if not math.isfinite(float(self.law.var())):
            raise GeneratorSpecError(f"{self.distribution} innovations need finite variance")

    def _validate_correlated(self) -> None:
        if not self.declared_finite_mean:
            raise GeneratorSpecError("infinite mean is only constructed for iid kinds")
        if not (0 <= self.mean < math.inf):
            raise GeneratorSpecError("mean must be finite and nonnegative")
        if self.variance < 0:
            raise GeneratorSpecError("variance must be nonnegative")
        if not (0 <= self.variance_growth < 1):
            raise GeneratorSpecError(
                "variance_growth must lie in [0, 1) so that sum Var/n^2 converges"
            )
        if self.correlation not in CORRELATIONS:
            raise GeneratorSpecError(f"correlation must be one of {CORRELATIONS}")
        if self.c <= 0:
            raise GeneratorSpecError("c must be positive")
        if math.sqrt(3.0) * float(self.amplitudes.max()) > self.mean:
            raise GeneratorSpecError("nonnegativity needs sqrt(3) * sigma_n <= mean for every n")
        worst = self.worst_variance_ratio()
        if worst > self.c:
            raise GeneratorSpecError(
                f"Var[sum] <= c * sum Var fails: {self.correlation} terms reach "
                f"ratio {worst:g} > c = {self.c:g}"
            )

    @cached_property
    def law(self) -> Any:
        return law_for(self.distribution, self.params)

    @cached_property
    def variances(self) -> np.ndarray:
        """Var[xi_n]; antithetic partners share the variance of their pair."""
        n = np.arange(1, self.length + 1)
        pair_index = 2 * np.ceil(n / 2)
        return self.variance * np.power(pair_index, self.variance_growth)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.sqrt(self.variances)

    def worst_variance_ratio(self) -> float:
        """max over N of Var[sum_{n<=N} xi_n] / sum_{n<=N} Var[xi_n], from the construction."""
        if self.kind != "correlated_variance" or self.variance == 0:
            return 1.0
        total = np.cumsum(self.variances)
        if self.correlation == "independent":
            return 1.0
        if self.correlation == "comonotone":
            return float((np.cumsum(self.amplitudes) ** 2 / total).max())
        # antithetic pairs cancel; an unpaired last term carries its own variance
        paired = np.where(np.arange(1, self.length + 1) % 2 == 0, 0.0, self.variances)
        return float((paired / total).max())

    @property
    def declared_mean(self) -> float:
        if self.kind == "correlated_variance":
            return float(self.mean)
        return float(self.law.mean())

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "kind": self.kind, "length": self.length, "paths": self.paths, "seed": self.seed,
            "declared_finite_mean": self.declared_finite_mean,
        }
        if self.kind in ("iid", "m_dependent"):
            data.update(distribution=self.distribution, params=dict(self.params))
        if self.kind == "m_dependent":
            data.update(lag=self.lag, kernel=list(self.kernel))
        if self.kind == "correlated_variance":
            data.update(
                mean=self.mean,
                variance=self.variance,
                variance_growth=self.variance_growth,
                correlation=self.correlation,
                c=self.c,
            )
        return data


@dataclass(frozen=True, eq=False)
class EmpiricalRun:
    """Sampled trajectories, one row per Monte Carlo path."""
    spec: GeneratorSpec
    trajectories: np.ndarray

    def __post_init__(self) -> None:
        if (self.trajectories < 0).any():
            raise GeneratorSpecError("generator produced a negative value")
        self.trajectories.setflags(write=False)

    @property
    def paths(self) -> int:
        return int(self.trajectories.shape[0])

    @property
    def length(self) -> int:
        return int(self.trajectories.shape[1])

    @cached_property
    def cesaro(self) -> np.ndarray:
        return np.cumsum(self.trajectories, axis=1) / np.arange(1, self.length + 1)

    @property
    def final_means(self) -> np.ndarray:
        return self.cesaro[:, -1]

    def summary(self) -> Dict[str, float]:
        finals = self.final_means
        return {
            "paths": self.paths,
            "length": self.length,
            "declared_mean": self.spec.declared_mean,
            "final_mean_average": float(finals.mean()),
            "final_mean_sd": float(finals.std(ddof=1)) if self.paths > 1 else 0.0,
            "max_value": float(self.trajectories.max()),
        }


def _iid_path(spec: GeneratorSpec, rng: np.random.Generator) -> np.ndarray:
    return np.asarray(spec.law.rvs(size=spec.length, random_state=rng), dtype=float)


def _m_dependent_path(spec: GeneratorSpec, rng: np.random.Generator) -> np.ndarray:
    draws = spec.law.rvs(size=spec.length + spec.lag, random_state=rng)
    innovations = np.asarray(draws, dtype=float)
    weights = np.asarray(spec.kernel)
    # xi_n = sum_i w_i Z_{n+i} / sum w keeps the innovation mean
    return np.convolve(innovations, weights[::-1], mode="valid") / weights.sum()


def _correlated_path(spec: GeneratorSpec, rng: np.random.Generator) -> np.ndarray:
    spread = math.sqrt(3.0) * spec.amplitudes
    if spec.correlation == "comonotone":
        noise = np.full(spec.length, rng.uniform(-1.0, 1.0))
    elif spec.correlation == "independent":
        noise = rng.uniform(-1.0, 1.0, size=spec.length)
    else:
        pairs = rng.uniform(-1.0, 1.0, size=(spec.length + 1) // 2)
        noise = np.empty(spec.length)
        noise[0::2] = pairs
        noise[1::2] = -pairs[: spec.length // 2]
    return np.maximum(spec.mean + spread * noise, 0.0)


PATH_BUILDERS = {
    "iid": _iid_path,
    "m_dependent": _m_dependent_path,
    "correlated_variance": _correlated_path,
}


def generate(spec: GeneratorSpec, jobs: int = 1) -> EmpiricalRun:
    """Sample ``spec.paths`` independent paths, each from its own child seed."""
    children = np.random.SeedSequence(spec.seed).spawn(spec.paths)
    builder = PATH_BUILDERS[spec.kind]

    def build(child: np.random.SeedSequence) -> np.ndarray:
        return builder(spec, np.random.default_rng(child))

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        rows = list(pool.map(build, children))
    logger.debug("generated %d %s paths of length %d", spec.paths, spec.kind, spec.length)
    return EmpiricalRun(spec, np.vstack(rows))


def implied_mixing_coefficients(spec: GeneratorSpec, horizon: int = 1000) -> Dict[str, Any]:
    """Upper bounds on phi(n) and rho(n) implied by the construction's dependence lag.

    Both coefficients are at most 1 and vanish beyond the lag, so the
    summability series reduce to finite sums over n <= lag.
    """
    if spec.kind == "iid":
        lag = 0
    elif spec.kind == "m_dependent":
        lag = spec.lag
    elif spec.correlation == "antithetic":
        lag = 1
    elif spec.correlation == "independent":
        lag = 0
    else:
        lag = horizon
    n = np.arange(1, horizon + 1)
    bound = (n <= lag).astype(float)
    phi_series = float(np.sum(np.sqrt(bound[1:]) * np.log(n[1:]) / n[1:]))
    rho_series = float(bound.sum())
    return {
        "lag": lag,
        "phi_bound": bound.tolist(),
        "rho_bound": bound.tolist(),
        "phi_series": phi_series,
        "rho_series": rho_series,
        "finite_lag": lag < horizon,
    }


def variance_series(spec: GeneratorSpec) -> float:
    """sum_{n <= length} Var[xi_n] / n^2."""
    n = np.arange(1, spec.length + 1, dtype=float)
    if spec.kind == "correlated_variance":
        variances = spec.variances
    elif spec.kind == "m_dependent":
        weights = np.asarray(spec.kernel)
        shrink = float((weights ** 2).sum() / weights.sum() ** 2)
        variances = np.full(spec.length, float(spec.law.var()) * shrink)
    else:
        variances = np.full(spec.length, float(spec.law.var()))
    with np.errstate(invalid="ignore"):
        return float(np.sum(variances / n ** 2))
