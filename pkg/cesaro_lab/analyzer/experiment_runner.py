"""Experiment runner that orchestrates the partition and SLLN pipelines."""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TypeVar

import numpy as np

from .. import __version__
from ..config.schema import ExperimentConfig, load_config
from ..errors import CesaroLabError, StageError
from ..exporters import CSVExporter, JSONExporter, MarkdownExporter, SuiteExporter
from ..families.window import CesaroFamily, SequenceWindow
from ..models import (
    BoundednessDecision,
    PropMainReport,
    Provenance,
    RunReport,
    SimpleRV,
    Verdict,
    VerdictStatus,
)
from ..slln.checks import (
    BRIDGE_PATHS,
    VOTE_SHARE,
    classifier_vote,
    slln_regime_check,
    verify_variance_condition,
)
from ..slln.generators import (
    EmpiricalRun,
    generate,
    implied_mixing_coefficients,
    variance_series,
)
from ..space import expectation
from .decomposition import build_equivalent_measure, certify_l1_bound, partition
from .distributions import tightness_check
from .limits import (
    default_stability_span,
    limit_profile,
    permuted_cesaro,
    subwindow_consistency,
    verify_prop_main,
)
from .oracle import oracle_profile
from .selection import komlos_select
from .verification import (
    cor_finite_chain,
    cor_infinite_chain,
    measure_change_equivalence,
    tightness_grid,
    verify_remark_main,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")

EMPIRICAL_SHARE = 0.95
PERMUTATION_RTOL = 1e-12


def _status(ok: bool) -> VerdictStatus:
    return VerdictStatus.PASS if ok else VerdictStatus.FAIL


class ExperimentRunner:
    """Runs one experiment config stage by stage and collects a RunReport.

    A failing stage stops the run; the report then carries ``error`` naming
    the stage and its cause and counts as a verification failure.
    """

    def __init__(self, config: ExperimentConfig, jobs: int = 1):
        self.config = config
        self.jobs = max(1, jobs)
        self.report = RunReport(
            name=config.name,
            kind=config.kind,
            config=config.to_dict(),
            seed=config.seed,
            version=__version__,
            expected=dict(config.expect.verdicts),
        )
        self._stages: Dict[str, float] = {}

    @property
    def provenance(self) -> Provenance:
        return Provenance.HEURISTIC if self.config.heuristic else Provenance.EXACT

    def run(self) -> RunReport:
        started = datetime.now(timezone.utc)
        clock = time.perf_counter()
        try:
            if self.config.kind == "partition":
                self._run_partition()
            else:
                self._run_slln()
        except StageError as e:
            logger.error("%s: %s", self.config.name, e)
            self.report.error = str(e)
        self.report.timings = {
            "started_at": started.isoformat(),
            "total_seconds": time.perf_counter() - clock,
            "stages": dict(self._stages),
        }
        return self.report

    def stage(self, name: str, action: Callable[[], T]) -> T:
        """Run one timed stage, wrapping library errors in StageError."""
        logger.info("%s: stage %s", self.config.name, name)
        clock = time.perf_counter()
        try:
            return action()
        except (CesaroLabError, ArithmeticError, ValueError) as e:
            if isinstance(e, StageError):
                raise
            raise StageError(name, e) from e
        finally:
            self._stages[name] = time.perf_counter() - clock

    def add(self, verdict: Verdict) -> None:
        logger.info("%s: %s -> %s", self.config.name, verdict.name, verdict.status.value)
        self.report.verdicts.append(verdict)

    # partition pipeline

    def build_window(self) -> SequenceWindow:
        config = self.config
        assert config.space is not None and config.family is not None and config.window is not None
        space = self.stage("space", config.space.build)
        family = self.stage("family", lambda: config.family.build(config.base_dir))
        window_config = config.window

        def select() -> SequenceWindow:
            if window_config.horizon is not None:
                return SequenceWindow.first(family, space, window_config.horizon)
            if window_config.indices:
                return SequenceWindow(family, window_config.indices, space, selection="indices")
            return komlos_select(
                family,
                space,
                window_config.komlos_horizon,
                window_config.komlos_block,
                config.tolerances.tol,
            )

        window = self.stage("window", select)
        self.report.summaries["window"] = {
            "length": window.length,
            "selection": window.selection,
            "first_index": window.indices[0],
            "last_index": window.indices[-1],
        }
        return window

    def _run_partition(self) -> None:
        config = self.config
        tol = config.tolerances.tol
        span = config.tolerances.stability_span
        eps_grid = config.tolerances.eps_grid
        samples = config.oracle.samples
        points = config.oracle.grid_points
        heuristic = config.heuristic

        window = self.build_window()
        cesaro = CesaroFamily(window)
        base_part = self.stage("partition", lambda: partition(window, heuristic=heuristic))
        self.report.partition = base_part
        self.report.cesaro_partition = self.stage(
            "cesaro_partition", lambda: partition(cesaro, heuristic=heuristic)
        )

        measure = self.stage("measure", lambda: build_equivalent_measure(base_part))
        self.report.certificate = self.stage(
            "certificate", lambda: certify_l1_bound(window, base_part, measure, seed=config.seed)
        )

        profile = self.stage("limits", lambda: limit_profile(window, tol, span))
        self.report.limit_profile = profile
        labels = list(window.space.labels)
        self.report.series["cesaro"] = window.cesaro_matrix
        self.report.series_keys["cesaro"] = labels

        prop_main = self.stage("prop_main", lambda: verify_prop_main(window, tol, span, heuristic))
        self.add(self._prop_main_verdict(prop_main, tol))

        all_labels = frozenset(labels)
        if not base_part.unbounded_atoms or profile.finite_set == all_labels:
            self.add(self.stage(
                "cor_finite", lambda: cor_finite_chain(window, eps_grid, tol, span, heuristic)
            ))
        if not base_part.bounded_atoms or not profile.finite_set:
            self.add(self.stage(
                "cor_infinite", lambda: cor_infinite_chain(window, tol, span, heuristic)
            ))

        if samples > 0:
            self.add(self.stage("remark_main", lambda: verify_remark_main(
                window, eps_grid, samples=samples, seed=config.seed, jobs=self.jobs,
                heuristic=heuristic, points=points,
            )))
            self.add(self.stage("measure_change", lambda: measure_change_equivalence(
                window, eps_grid, samples=samples, seed=config.seed,
                heuristic=heuristic, points=points,
            )))

        self._subwindow(window, tol, span)
        self.add(self.stage("permutation", lambda: self._permutation_verdict(window)))
        self.stage("envelopes", lambda: self._envelopes(window, eps_grid))
        self.stage("expectations", lambda: self._expectations(window))
        self._check_expected_sets()

    def _prop_main_verdict(self, result: PropMainReport, tol: float) -> Verdict:
        details = {
            "finite_set": sorted(result.finite_set),
            "J_b": sorted(result.omega_b),
            "cesaro_J_b": sorted(result.omega_bar_b),
            "finite_eq_J_b": result.equal[0],
            "finite_eq_cesaro_J_b": result.equal[1],
            "J_b_eq_cesaro_J_b": result.equal[2],
            "no_limit": sorted(result.no_limit),
            "full_range_bounded": sorted(result.full_range_bounded),
        }
        if result.status is VerdictStatus.INCONCLUSIVE:
            narrative = f"atoms {sorted(result.no_limit)} have no Cesàro limit within tol {tol:g}"
        elif result.status is VerdictStatus.PASS:
            narrative = f"finite-limit set {sorted(result.finite_set)} equals J_b on both hulls"
        else:
            narrative = (
                f"finite-limit set {sorted(result.finite_set)}, J_b {sorted(result.omega_b)}, "
                f"Cesàro J_b {sorted(result.omega_bar_b)}"
            )
        return Verdict(
            "prop_main", result.status, provenance=self.provenance,
            parameters={"tol": tol}, details=details, narrative=narrative,
        )

    def _subwindow(self, window: SequenceWindow, tol: float, span: Optional[int]) -> None:
        used = span or default_stability_span(window.length)
        if window.length // 2 < 2 * used:
            logger.info("window of length %d too short for sub-window checks", window.length)
            return
        result = self.stage("subwindow", lambda: subwindow_consistency(window, tol, used))
        self.add(Verdict(
            "subwindow", _status(bool(result["consistent"])), provenance=self.provenance,
            parameters={"tol": tol, "stability_span": used, "pieces": result["pieces"]},
            details={"mismatches": result["mismatches"]},
            narrative=("both halves reproduce the finite-limit set" if result["consistent"]
                       else f"{len(result['mismatches'])} sub-window mismatches"),
        ))

    def _permutation_verdict(self, window: SequenceWindow) -> Verdict:
        result = permuted_cesaro(window, seed=self.config.seed)
        original = np.asarray(result["original"], dtype=float)
        permuted = np.asarray(result["permuted"], dtype=float)
        close = bool(result["identical"]) or bool(
            np.allclose(original, permuted, rtol=PERMUTATION_RTOL, atol=0.0, equal_nan=False)
        )
        return Verdict(
            "permutation", _status(close), provenance=Provenance.EXACT,
            parameters={"seed": self.config.seed, "rtol": PERMUTATION_RTOL},
            details={"identical": result["identical"]},
            narrative=(
                "full-window Cesàro mean unchanged by reordering" if close
                else "reordering changed the mean"
            ),
        )

    def _envelopes(self, window: SequenceWindow, eps_grid: Sequence[float]) -> None:
        grid = tightness_grid(window, eps_grid)
        rows = [SimpleRV(row) for row in window.cesaro_matrix]
        report = tightness_check(rows, window.space, grid)
        envelopes = [report.envelope(eps) for eps in report.eps_grid]
        self.report.series["envelope"] = np.column_stack(envelopes)
        self.report.series_keys["envelope"] = list(report.eps_grid)
        self.report.summaries["tightness"] = {
            "verdict": report.verdict.value,
            "max_quantiles": {str(eps): value for eps, value in report.max_quantiles.items()},
        }

    def _expectations(self, window: SequenceWindow) -> None:
        space = window.space
        last = window.length
        self.report.summaries["expectations"] = {
            "final_term": expectation(space, window.evaluate(last)),
            "final_cesaro": expectation(space, window.cesaro(last)),
        }

    def _check_expected_sets(self) -> None:
        expect = self.config.expect
        part, profile = self.report.partition, self.report.limit_profile
        observed = {
            "bounded_atoms": sorted(part.bounded_atoms) if part else None,
            "unbounded_atoms": sorted(part.unbounded_atoms) if part else None,
            "finite_set": sorted(profile.finite_set) if profile else None,
        }
        wanted = {
            key: list(getattr(expect, key))
            for key in observed
            if getattr(expect, key) is not None
        }
        if not wanted:
            return
        mismatched = [key for key, value in wanted.items() if observed[key] != value]
        self.add(Verdict(
            "expected_sets", _status(not mismatched), provenance=self.provenance,
            parameters={"expected": wanted},
            details={"observed": {key: observed[key] for key in wanted}, "mismatched": mismatched},
            narrative=(
                "golden atom sets reproduced" if not mismatched
                else f"mismatch in {', '.join(mismatched)}"
            ),
        ))

    # SLLN pipeline

    def _run_slln(self) -> None:
        config = self.config
        assert config.generator is not None
        spec = self.stage("generator", lambda: config.generator.build(config.seed))
        run = self.stage("generate", lambda: generate(spec, jobs=self.jobs))
        tol = config.generator.slln_tol

        self.add(self.stage("slln_regime", lambda: slln_regime_check(
            spec, run, config.tolerances.eps_grid, tol=tol,
            samples=config.oracle.samples, seed=config.seed, jobs=self.jobs,
            points=config.oracle.grid_points,
        )))
        if spec.kind == "correlated_variance":
            self.add(self.stage(
                "variance_condition", lambda: verify_variance_condition(run, spec.c)
            ))
        self.add(self.stage("slln_empirical", lambda: self._empirical_verdict(run, tol)))
        if config.expect.slln_branch is not None:
            branch = "finite" if spec.declared_finite_mean else "infinite"
            self.add(Verdict(
                "expected_branch", _status(branch == config.expect.slln_branch),
                provenance=Provenance.EXACT,
                parameters={"expected": config.expect.slln_branch}, details={"observed": branch},
                narrative=f"{branch}-mean branch declared",
            ))

        self.report.summaries["generator"] = spec.to_dict()
        self.report.summaries["paths"] = run.summary()
        self.report.summaries["mixing"] = self.stage(
            "mixing", lambda: implied_mixing_coefficients(spec, min(spec.length, 1000))
        )
        if math.isfinite(spec.declared_mean):
            self.report.summaries["variance_series"] = self.stage(
                "variance_series", lambda: variance_series(spec)
            )
        shown = min(run.paths, BRIDGE_PATHS)
        self.report.series["paths"] = run.cesaro[:shown]

    def _empirical_verdict(self, run: EmpiricalRun, tol: float) -> Verdict:
        """Finite mean: means end near the mean. Infinite mean: the divergence rule fires."""
        spec = run.spec
        if spec.declared_finite_mean:
            mu = spec.declared_mean
            near = np.abs(run.final_means - mu) < tol * max(abs(mu), 1.0)
            share = float(near.mean())
            return Verdict(
                "slln_empirical", _status(share >= EMPIRICAL_SHARE),
                provenance=Provenance.HEURISTIC,
                parameters={"tol": tol, "required_share": EMPIRICAL_SHARE},
                details={"share_near_mean": share, "declared_mean": mu},
                narrative=f"{share:.1%} of paths end within {tol:g} of the mean {mu:g}",
            )
        vote = classifier_vote(run, tol)
        share = vote["infinite"] / run.paths
        return Verdict(
            "slln_empirical", _status(share >= VOTE_SHARE), provenance=Provenance.HEURISTIC,
            parameters={"tol": tol, "required_share": VOTE_SHARE},
            details={"share_diverging": share, "vote": vote},
            narrative=f"divergence rule fires on {share:.1%} of paths",
        )

    # oracle

    def oracle_decisions(self) -> List[BoundednessDecision]:
        window = self.build_window()
        return self.stage("oracle", lambda: oracle_profile(
            window, self.config.tolerances.eps_grid,
            samples=self.config.oracle.samples, seed=self.config.seed, jobs=self.jobs,
            points=self.config.oracle.grid_points,
        ))


def write_report(report: RunReport, output_dir: Path) -> List[Path]:
    """report.json, report.md and the CSV plot files."""
    output_dir.mkdir(parents=True, exist_ok=True)
    JSONExporter(report).export(output_dir / "report.json")
    MarkdownExporter(report).export(output_dir / "report.md")
    written = [output_dir / "report.json", output_dir / "report.md"]
    written.extend(CSVExporter(report).export(output_dir))
    return written


def run_experiment(
    config: ExperimentConfig, jobs: int = 1, output_dir: Optional[Path] = None
) -> RunReport:
    report = ExperimentRunner(config, jobs).run()
    target = output_dir or (Path(config.output) if config.output else None)
    if target is not None:
        write_report(report, target)
    return report


def run_partition(
    config: ExperimentConfig, jobs: int = 1, output_dir: Optional[Path] = None
) -> RunReport:
    """partition -> measure -> certificate -> limit_profile -> verify_prop_main.

    The equivalence chains and window checks run around them.
    """
    if config.kind != "partition":
        raise CesaroLabError(f"config {config.name!r} is a {config.kind} experiment")
    return run_experiment(config, jobs, output_dir)


def run_slln(
    config: ExperimentConfig, jobs: int = 1, output_dir: Optional[Path] = None
) -> RunReport:
    """generate -> slln_regime_check -> verify_variance_condition when applicable."""
    if config.kind != "slln":
        raise CesaroLabError(f"config {config.name!r} is a {config.kind} experiment")
    return run_experiment(config, jobs, output_dir)


def run_oracle(config: ExperimentConfig, jobs: int = 1) -> List[BoundednessDecision]:
    if config.kind != "partition":
        raise CesaroLabError("the oracle runs on partition configs only")
    return ExperimentRunner(config, jobs).oracle_decisions()


@dataclass
class SuiteEntry:
    config_file: str
    name: Optional[str] = None
    status: str = "pass"  # pass | fail | error
    error: Optional[str] = None
    report: Optional[RunReport] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config": self.config_file,
            "name": self.name,
            "status": self.status,
            "error": self.error,
        }


@dataclass
class SuiteResult:
    directory: Path
    entries: List[SuiteEntry] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        """2 on any unreadable config, else 1 on any failed run, else 0."""
        if any(entry.status == "error" for entry in self.entries):
            return 2
        if any(entry.status == "fail" for entry in self.entries):
            return 1
        return 0

    @property
    def passed(self) -> int:
        return sum(1 for entry in self.entries if entry.status == "pass")


def _suite_entry(path: Path, output_dir: Optional[Path]) -> SuiteEntry:
    entry = SuiteEntry(config_file=path.name)
    try:
        config = load_config(path)
        entry.name = config.name
        # one worker per run; the pool parallelises across configs
        target = output_dir / path.stem if output_dir else None
        report = run_experiment(config, jobs=1, output_dir=target)
    except (CesaroLabError, OSError) as e:
        logger.error("cannot run %s: %s", path.name, e)
        entry.status, entry.error = "error", str(e)
        return entry
    entry.report = report
    entry.status = "pass" if report.passed else "fail"
    entry.error = report.error
    return entry


def run_suite(directory: Path, jobs: int = 1, output_dir: Optional[Path] = None) -> SuiteResult:
    """Run every *.json config of a directory; results keep filename order."""
    directory = Path(directory)
    configs = sorted(directory.glob("*.json"))
    result = SuiteResult(directory=directory)
    if not configs:
        logger.warning("no configs found in %s", directory)
        return result
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        result.entries = list(pool.map(lambda path: _suite_entry(path, output_dir), configs))
    if output_dir is not None:
        output_dir.mkdir(parents=True, exist_ok=True)
        exporter = SuiteExporter([entry.to_dict() for entry in result.entries], result.exit_code)
        exporter.export(output_dir / "suite.json")
    return result
