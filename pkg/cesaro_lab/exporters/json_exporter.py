"""JSON report exporter."""

import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from ..models import (
    BoundednessCertificate,
    LimitProfile,
    Partition,
    RunReport,
    Verdict,
)


def plain(value: Any) -> Any:
    """JSON-safe copy: sets sorted, enums by value, infinities as strings."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (set, frozenset)):
        return sorted(plain(v) for v in value)
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


class JSONExporter:
    """Exports a run report to JSON; only the timings block varies between identical runs."""

    def __init__(self, report: RunReport):
        self.report = report

    def export(self, output_path: Path) -> None:
        output_path.write_text(self.render(), encoding="utf-8")

    def render(self) -> str:
        return json.dumps(self._generate_json(), indent=2, sort_keys=True)

    def verdict_section(self) -> str:
        """Canonical text of everything but the timings block."""
        data = self._generate_json()
        data.pop("timings")
        return json.dumps(data, indent=2, sort_keys=True)

    def _generate_json(self) -> Dict[str, Any]:
        report = self.report
        return {
            "metadata": {
                "name": report.name,
                "kind": report.kind,
                "seed": report.seed,
                "version": report.version,
            },
            "config": plain(report.config),
            "passed": report.passed,
            "error": report.error,
            "partition": self._serialize_partition(report.partition),
            "cesaro_partition": self._serialize_partition(report.cesaro_partition),
            "limit_profile": self._serialize_limit_profile(report.limit_profile),
            "certificate": self._serialize_certificate(report.certificate),
            "verdicts": [self._serialize_verdict(v) for v in report.verdicts],
            "narrative": {v.name: v.narrative for v in report.verdicts},
            "summaries": plain(report.summaries),
            "timings": plain(report.timings),
        }

    def _serialize_partition(self, part: Optional[Partition]) -> Optional[Dict[str, Any]]:
        if part is None:
            return None
        return {
            "hull": part.hull.value,
            "J_b": sorted(part.bounded_atoms),
            "J_u": sorted(part.unbounded_atoms),
            "bounds": {str(label): plain(bound) for label, bound in sorted(part.bounds.items())},
            "provenance": part.provenance.value,
            "probed_atoms": sorted(part.probed_atoms),
        }

    def _serialize_limit_profile(self, profile: Optional[LimitProfile]) -> Optional[Dict[str, Any]]:
        if profile is None:
            return None
        return {
            "limits": {
                str(label): ("no_limit" if value is None else plain(value))
                for label, value in zip(profile.labels, profile.limits)
            },
            "finite_set": sorted(profile.finite_set),
            "infinite_set": sorted(profile.infinite_set),
            "no_limit": sorted(profile.no_limit_set),
            "tol": profile.tol,
            "stability_span": profile.stability_span,
            "window_length": profile.window_length,
        }

    def _serialize_certificate(
        self, cert: Optional[BoundednessCertificate]
    ) -> Optional[Dict[str, Any]]:
        if cert is None:
            return None
        measure = cert.measure
        return {
            "atoms": list(measure.labels),
            "J_b": sorted(cert.bounded_atoms),
            "J_u": sorted(set(measure.labels) - set(cert.bounded_atoms)),
            "q": plain(measure.weights),
            "K": plain(measure.normalizer),
            "Q": plain(measure.atom_probabilities),
            "l1_bound": plain(cert.l1_bound),
            "checked_sup": plain(cert.checked_sup),
            "argmax_position": cert.argmax_position,
            "provenance": cert.provenance.value,
            "hull": cert.hull.value,
            "seed": cert.seed,
        }

    def _serialize_verdict(self, verdict: Verdict) -> Dict[str, Any]:
        return {
            "name": verdict.name,
            "status": verdict.status.value,
            "expected": self.report.expected.get(verdict.name, "pass"),
            "provenance": verdict.provenance.value,
            "parameters": plain(verdict.parameters),
            "details": plain(verdict.details),
        }


class SuiteExporter:
    """Aggregate ``suite.json`` for a directory run."""

    def __init__(self, entries: List[Dict[str, Any]], exit_code: int):
        self.entries = entries
        self.exit_code = exit_code

    def export(self, output_path: Path) -> None:
        data = {
            "exit_code": self.exit_code,
            "total": len(self.entries),
            "passed": sum(1 for entry in self.entries if entry["status"] == "pass"),
            "runs": plain(self.entries),
        }
        output_path.write_text(json.dumps(data, indent=2, sort_keys=True), encoding="utf-8")
