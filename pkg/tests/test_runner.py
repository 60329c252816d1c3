import json

import pytest

from cesaro_lab.analyzer.experiment_runner import (
    ExperimentRunner,
    run_experiment,
    run_oracle,
    run_partition,
    run_slln,
    run_suite,
    write_report,
)
from cesaro_lab.config import load_config, parse_config
from cesaro_lab.errors import CesaroLabError
from cesaro_lab.exporters import JSONExporter
from cesaro_lab.models import Provenance, VerdictStatus
from conftest import REGRESSION_DIR


def tiny_config(**overrides):
    data = {
        "name": "tiny",
        "kind": "partition",
        "seed": 7,
        "space": {"masses": [0.5, 0.5]},
        "family": {"kind": "constant", "value": 2.0},
        "window": {"horizon": 256},
        "tolerances": {"tol": 0.001},
        "oracle": {"samples": 0},
        "expect": {"bounded_atoms": [1, 2], "unbounded_atoms": [], "finite_set": [1, 2]},
    }
    data.update(overrides)
    return data


class TestPartitionRun:
    def test_constant_family(self):
        report = run_partition(parse_config(tiny_config()))
        assert report.error is None
        assert [v.name for v in report.verdicts] == ["prop_main", "cor_finite", "subwindow", "permutation",
                                                     "expected_sets"]
        assert report.passed
        assert report.summaries["window"]["length"] == 256
        assert report.summaries["expectations"]["final_cesaro"] == pytest.approx(2.0)
        assert report.series["cesaro"].shape == (256, 2)

    def test_golden_set_mismatch_fails(self):
        config = parse_config(tiny_config(expect={"bounded_atoms": [1]}))
        report = run_experiment(config)
        assert report.error is None
        assert not report.passed
        assert report.verdicts[-1].name == "expected_sets"
        assert report.verdicts[-1].details["mismatched"] == ["bounded_atoms"]

    def test_expected_failure_inverts_a_verdict(self):
        report = run_experiment(parse_config(tiny_config(expect={"verdicts": {"permutation": "fail"}})))
        permutation = next(v for v in report.verdicts if v.name == "permutation")
        assert permutation.status is VerdictStatus.PASS
        assert not report.verdict_ok(permutation)
        assert not report.passed

    def test_only_timings_differ_between_runs(self):
        config = parse_config(tiny_config())
        first, second = run_experiment(config), run_experiment(config)
        assert JSONExporter(first).verdict_section() == JSONExporter(second).verdict_section()

    def test_three_atom_window(self, partition_config):
        report = run_partition(parse_config(partition_config))
        assert report.error is None
        assert sorted(report.partition.bounded_atoms) == [1, 2]
        assert sorted(report.limit_profile.finite_set) == [1, 2]
        assert {v.name for v in report.verdicts} == {
            "prop_main", "remark_main", "measure_change", "subwindow", "permutation",
        }
        assert report.passed

    def test_heuristic_table(self, tmp_path):
        config = load_config(REGRESSION_DIR / "table-diverging.json")
        report = run_experiment(config, output_dir=tmp_path)
        assert report.passed
        assert report.partition.provenance is Provenance.HEURISTIC
        assert sorted(report.partition.probed_atoms) == [1, 2, 3]
        assert len((tmp_path / "trajectories.csv").read_text().splitlines()) == 1 + 256 * 3

    def test_exact_table_with_declared_cesaro_tags(self):
        report = run_experiment(load_config(REGRESSION_DIR / "table-exact.json"))
        assert report.error is None
        assert report.passed
        assert report.partition.provenance is Provenance.EXACT
        assert sorted(report.partition.unbounded_atoms) == [3]

    def test_komlos_window_run(self):
        report = run_experiment(load_config(REGRESSION_DIR / "komlos-burst.json"))
        assert report.error is None
        assert report.summaries["window"]["selection"] == "komlos"
        assert report.summaries["window"]["length"] == 512
        assert report.summaries["window"]["first_index"] == 2
        assert sorted(report.limit_profile.finite_set) == [1, 2]
        assert report.passed


class TestStageErrors:
    def test_missing_metadata_aborts_the_run(self, tmp_path):
        table = tmp_path / "coefficients.csv"
        table.write_text("n,1,2\n" + "".join(f"{n},1,{n}\n" for n in range(1, 65)))
        config = parse_config(tiny_config(
            family={"kind": "table", "path": str(table)}, window={"horizon": 64}, expect={},
        ))
        report = ExperimentRunner(config).run()
        assert report.error.startswith("stage 'partition' failed")
        assert report.partition is None
        assert report.verdicts == []
        assert not report.passed
        assert "partition" in report.timings["stages"]

    def test_wrong_kind(self):
        slln = parse_config({"name": "s", "kind": "slln", "generator": {"kind": "iid", "length": 10}})
        with pytest.raises(CesaroLabError):
            run_partition(slln)
        with pytest.raises(CesaroLabError):
            run_oracle(slln)
        with pytest.raises(CesaroLabError):
            run_slln(parse_config(tiny_config()))


def test_write_report(tmp_path):
    report = run_experiment(parse_config(tiny_config()))
    written = write_report(report, tmp_path / "out")
    assert sorted(p.name for p in written) == ["envelopes.csv", "report.json", "report.md", "trajectories.csv"]
    data = json.loads((tmp_path / "out" / "report.json").read_text())
    assert data["passed"] is True
    assert data["limit_profile"]["limits"] == {"1": 2.0, "2": 2.0}


def test_oracle_decisions():
    decisions = run_oracle(parse_config(tiny_config(oracle={"samples": 50})))
    assert [d.epsilon for d in decisions] == [0.5, 0.1, 0.01]
    assert all(d.bounded for d in decisions)


@pytest.mark.parametrize("points, low, high", [(2, 2.09, 2.11), (64, 1.0, 1.1)])
def test_oracle_grid_points_set_the_resolution(points, low, high):
    config = parse_config(tiny_config(
        family={"kind": "rules", "rules": {"1": {"kind": "constant", "value": 1.0},
                                           "2": {"kind": "constant", "value": 2.0}}},
        tolerances={"tol": 0.001, "eps_grid": [0.6]},
        oracle={"samples": 50, "grid_points": points},
    ))
    [decision] = run_oracle(config)
    assert decision.bounded
    assert low <= decision.bound <= high


def test_grid_points_reach_the_verdicts(partition_config):
    partition_config["oracle"] = {"samples": 100, "grid_points": 16}
    report = run_partition(parse_config(partition_config))
    remark = next(v for v in report.verdicts if v.name == "remark_main")
    assert remark.parameters["grid_points"] == 16


class TestSuite:
    def test_unreadable_config_does_not_stop_the_others(self, tmp_path):
        configs = tmp_path / "configs"
        configs.mkdir()
        (configs / "broken.json").write_text("{")
        (configs / "tiny.json").write_text(json.dumps(tiny_config()))
        result = run_suite(configs, jobs=2, output_dir=tmp_path / "out")
        assert [(e.config_file, e.status) for e in result.entries] == [("broken.json", "error"), ("tiny.json", "pass")]
        assert result.exit_code == 2
        assert result.passed == 1
        suite = json.loads((tmp_path / "out" / "suite.json").read_text())
        assert suite["exit_code"] == 2
        assert (tmp_path / "out" / "tiny" / "report.json").exists()

    def test_failed_run(self, tmp_path):
        (tmp_path / "a.json").write_text(json.dumps(tiny_config()))
        (tmp_path / "b.json").write_text(json.dumps(tiny_config(name="b", expect={"finite_set": []})))
        result = run_suite(tmp_path)
        assert [e.status for e in result.entries] == ["pass", "fail"]
        assert result.exit_code == 1

    def test_empty_directory(self, tmp_path):
        result = run_suite(tmp_path)
        assert result.entries == []
        assert result.exit_code == 0


@pytest.mark.slow
def test_antithetic_slln_run():
    config = parse_config({
        "name": "antithetic",
        "kind": "slln",
        "seed": 404,
        "generator": {"kind": "correlated_variance", "mean": 1.0, "variance": 0.25, "correlation": "antithetic",
                      "c": 1.0, "length": 1024, "paths": 200},
        "oracle": {"samples": 100},
        "expect": {"slln_branch": "finite"},
    })
    report = run_slln(config)
    assert report.error is None
    assert [v.name for v in report.verdicts] == ["slln_regime", "variance_condition", "slln_empirical",
                                                 "expected_branch"]
    assert report.passed
    assert report.series["paths"].shape[1] == 1024
