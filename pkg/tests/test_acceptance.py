"""End-to-end checks over the shipped catalogues and regression configs."""

import math

import numpy as np
import pytest

from cesaro_lab.analyzer import (
    build_equivalent_measure,
    certify_l1_bound,
    cor_finite_chain,
    cor_infinite_chain,
    komlos_select,
    limit_profile,
    oracle_agreement,
    partition,
    permuted_cesaro,
    verify_prop_main,
)
from cesaro_lab.analyzer.experiment_runner import run_experiment, run_suite
from cesaro_lab.config import load_config
from cesaro_lab.families import SequenceWindow
from cesaro_lab.families.catalog import (
    CATALOGUE_HORIZON,
    CATALOGUE_TOL,
    bounded_families,
    random_declared_family,
    regression_catalogue,
    unbounded_families,
)
from cesaro_lab.exporters import JSONExporter
from cesaro_lab.models import VerdictStatus
from cesaro_lab.slln import GeneratorSpec, generate, verify_variance_condition
from cesaro_lab.slln.checks import classifier_vote
from conftest import REGRESSION_DIR

pytestmark = pytest.mark.slow

EPS_GRID = (0.5, 0.1, 0.01)


def window_of(entry, horizon=CATALOGUE_HORIZON):
    return SequenceWindow.first(entry.family, entry.space, horizon)


@pytest.fixture(scope="module")
def catalogue_windows():
    return [(entry.name, window_of(entry)) for entry in regression_catalogue()]


def test_finite_set_equals_both_bounded_parts(catalogue_windows):
    assert len(catalogue_windows) >= 30
    failures = [
        name for name, window in catalogue_windows
        if verify_prop_main(window, CATALOGUE_TOL).status is not VerdictStatus.PASS
    ]
    assert failures == []


def test_reduction_agrees_with_the_oracle():
    rng = np.random.default_rng(99)
    disagreements = []
    for i in range(50):
        entry = random_declared_family(rng, 3 + i % 10, name=f"oracle-{i:02d}")
        window = window_of(entry, horizon=256)
        for eps in EPS_GRID:
            result = oracle_agreement(window, window.space.labels, eps, samples=1000, seed=i)
            if not result.agrees:
                disagreements.append((entry.name, eps))
    assert disagreements == []


def test_certificates_respect_the_geometric_bound(catalogue_windows):
    checked = 0
    for name, window in catalogue_windows:
        part = partition(window)
        if not part.bounded_atoms:
            continue
        measure = build_equivalent_measure(part)
        assert math.fsum(measure.atom_probabilities) == pytest.approx(1.0, abs=1e-12), name
        assert min(measure.atom_probabilities) > 0, name
        certificate = certify_l1_bound(window, part, measure)
        expected_bound = math.fsum(2.0 ** -m for m in part.bounded_atoms) / measure.normalizer
        assert certificate.l1_bound == pytest.approx(expected_bound)
        assert certificate.checked_sup <= expected_bound + 1e-9, name
        checked += 1
    assert checked > 0


@pytest.mark.parametrize("entry", bounded_families(), ids=lambda e: e.name)
def test_all_bounded_chain(entry):
    verdict = cor_finite_chain(window_of(entry), EPS_GRID, CATALOGUE_TOL)
    assert verdict.status is VerdictStatus.PASS
    assert all(verdict.details.values()), verdict.details


@pytest.mark.parametrize("entry", unbounded_families(), ids=lambda e: e.name)
def test_all_unbounded_chain(entry):
    verdict = cor_infinite_chain(window_of(entry), CATALOGUE_TOL)
    assert verdict.status is VerdictStatus.PASS
    assert all(verdict.details.values()), verdict.details


def test_exponential_running_means_settle():
    run = generate(GeneratorSpec(kind="iid", length=100_000, paths=100, seed=2024), jobs=4)
    assert int((np.abs(run.final_means - 1.0) < 0.02).sum()) >= 95


def test_pareto_running_means_diverge():
    spec = GeneratorSpec(kind="iid", length=100_000, paths=100, seed=2025, distribution="pareto",
                         params={"shape": 0.5}, declared_finite_mean=False)
    assert classifier_vote(generate(spec, jobs=4))["infinite"] >= 95


def test_antithetic_variance_condition():
    spec = GeneratorSpec(kind="correlated_variance", length=4096, paths=500, seed=404, mean=1.0, variance=0.25,
                         correlation="antithetic", c=1.0)
    verdict = verify_variance_condition(generate(spec), c=1.0)
    assert verdict.status is VerdictStatus.PASS
    assert all(row["ratio"] <= 1.0 + 3.0 / math.sqrt(500) for row in verdict.details["rows"])


def test_permutation_leaves_the_final_mean_unchanged(catalogue_windows):
    for name, window in catalogue_windows[:10]:
        result = permuted_cesaro(window, seed=17)
        original = np.asarray(result["original"])
        assert result["identical"] or np.allclose(original, result["permuted"], rtol=1e-12, atol=0.0), name


def test_reruns_reproduce_the_verdict_section():
    config = load_config(REGRESSION_DIR / "three-atom.json")
    first, second = run_experiment(config), run_experiment(config)
    assert JSONExporter(first).verdict_section() == JSONExporter(second).verdict_section()


def test_regression_suite_passes():
    result = run_suite(REGRESSION_DIR, jobs=4)
    assert [entry.status for entry in result.entries] == ["pass"] * len(result.entries)
    assert result.exit_code == 0


def test_komlos_selection_leaves_no_atom_without_a_limit():
    unsettled = []
    for entry in regression_catalogue():
        window = komlos_select(entry.family, entry.space, CATALOGUE_HORIZON, 256, tol=CATALOGUE_TOL)
        if limit_profile(window, CATALOGUE_TOL).no_limit_set:
            unsettled.append((entry.name, window.selection))
    assert unsettled == []
