import csv
import json
import math

import numpy as np
import pytest

from cesaro_lab.exporters import CSVExporter, JSONExporter, MarkdownExporter, SuiteExporter, plain
from cesaro_lab.models import (
    BoundednessCertificate,
    EquivalentMeasure,
    HullKind,
    LimitProfile,
    Partition,
    Provenance,
    RunReport,
    Verdict,
    VerdictStatus,
)


@pytest.fixture
def report():
    measure = EquivalentMeasure(labels=(1, 2, 3), weights=(0.5, 0.125, 0.125))
    report = RunReport(
        name="unit",
        kind="partition",
        config={"seed": 1},
        seed=1,
        version="0.1.0",
        partition=Partition(frozenset({1, 2}), frozenset({3}), Provenance.EXACT, bounds={1: 1.0, 2: 2.0}),
        cesaro_partition=Partition(
            frozenset({1, 2}), frozenset({3}), Provenance.EXACT, bounds={1: 1.0, 2: 2.0}, hull=HullKind.CESARO
        ),
        limit_profile=LimitProfile(labels=(1, 2, 3), limits=(1.0, None, math.inf), tol=1e-3, stability_span=32,
                                   window_length=64),
        certificate=BoundednessCertificate(
            measure=measure, bounded_atoms=frozenset({1, 2}), l1_bound=1.0, checked_sup=0.75, argmax_position=3,
            provenance=Provenance.EXACT, seed=1,
        ),
        verdicts=[
            Verdict("prop_main", VerdictStatus.PASS, details={"J_b": [1, 2]}, narrative="sets agree"),
            Verdict("subwindow", VerdictStatus.FAIL, parameters={"tol": 1e-3}, narrative="halves disagree"),
        ],
        summaries={"window": {"length": 64}},
        timings={"total_seconds": 0.5},
        series={
            "cesaro": np.array([[1.0, 0.5, 1.0], [1.0, 0.25, 1.5]]),
            "envelope": np.array([[1.0, 2.0], [1.0, 2.5]]),
        },
        series_keys={"cesaro": [1, 2, 3], "envelope": [0.5, 0.1]},
        expected={"subwindow": "fail"},
    )
    return report


def test_plain_converts_special_values():
    assert plain({1: frozenset({3, 2}), "x": (np.int64(4), np.float64(math.inf), math.nan)}) == {
        "1": [2, 3],
        "x": [4, "inf", "nan"],
    }
    assert plain(VerdictStatus.PASS) == "pass"
    assert plain(np.array([True, False])) == [True, False]


class TestJSONExporter:
    def test_document(self, report, tmp_path):
        path = tmp_path / "report.json"
        JSONExporter(report).export(path)
        data = json.loads(path.read_text())

        assert data["metadata"] == {"name": "unit", "kind": "partition", "seed": 1, "version": "0.1.0"}
        assert data["passed"] is True
        assert data["partition"]["J_b"] == [1, 2]
        assert data["cesaro_partition"]["hull"] == "C_bar"
        assert data["limit_profile"]["limits"] == {"1": 1.0, "2": "no_limit", "3": "inf"}
        assert data["certificate"]["Q"] == pytest.approx([2 / 3, 1 / 6, 1 / 6])
        assert data["certificate"]["J_u"] == [3]
        assert [v["status"] for v in data["verdicts"]] == ["pass", "fail"]
        assert data["verdicts"][1]["expected"] == "fail"
        assert data["narrative"] == {"prop_main": "sets agree", "subwindow": "halves disagree"}

    def test_only_timings_vary(self, report):
        first = JSONExporter(report).verdict_section()
        report.timings = {"total_seconds": 9.0}
        assert JSONExporter(report).verdict_section() == first
        assert "timings" not in json.loads(first)

    def test_missing_sections_are_null(self):
        data = json.loads(JSONExporter(RunReport("bare", "slln", {}, 0, "0.1.0", error="stage 'x' failed")).render())
        assert data["partition"] is None
        assert data["certificate"] is None
        assert data["passed"] is False


def test_suite_exporter(tmp_path):
    path = tmp_path / "suite.json"
    entries = [{"config": "a.json", "status": "pass"}, {"config": "b.json", "status": "error"}]
    SuiteExporter(entries, 2).export(path)
    data = json.loads(path.read_text())
    assert data["exit_code"] == 2
    assert data["total"] == 2
    assert data["passed"] == 1


class TestCSVExporter:
    def test_long_format(self, report, tmp_path):
        written = CSVExporter(report).export(tmp_path)
        assert sorted(p.name for p in written) == ["envelopes.csv", "trajectories.csv"]

        with (tmp_path / "trajectories.csv").open() as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["k", "atom", "value"]
        assert rows[1:4] == [["1", "1", "1.0"], ["1", "2", "0.5"], ["1", "3", "1.0"]]
        assert len(rows) == 1 + 6

        with (tmp_path / "envelopes.csv").open() as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["k", "epsilon", "value"]
        assert rows[-1] == ["2", "0.1", "2.5"]

    def test_path_series(self, tmp_path):
        report = RunReport("paths", "slln", {}, 0, "0.1.0", series={"paths": np.array([[1.0, 2.0], [3.0, 4.0]])})
        CSVExporter(report).export(tmp_path)
        with (tmp_path / "slln_trajectories.csv").open() as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["path", "n", "value"]
        assert rows[-1] == ["2", "2", "4.0"]


class TestMarkdownExporter:
    def test_sections(self, report, tmp_path):
        path = tmp_path / "report.md"
        MarkdownExporter(report).export(path)
        text = path.read_text()
        assert text.startswith("# unit")
        assert "**Outcome:** PASSED" in text
        assert "| C | [1, 2] | [3] | exact |" in text
        assert "| 2 | no limit |" in text
        assert "| 3 | inf |" in text
        assert "**subwindow**: FAIL (expected fail)" in text

    def test_aborted_run(self):
        report = RunReport("bare", "slln", {}, 0, "0.1.0", error="stage 'generate' failed")
        text = MarkdownExporter(report)._generate_markdown()
        assert "> Run aborted: stage 'generate' failed" in text
        assert "## Partition" not in text
