"""Markdown narrative exporter."""

from pathlib import Path
from typing import Any, Dict, List

from jinja2 import Environment, StrictUndefined

from ..models import RunReport

REPORT_TEMPLATE = """\
# {{ report.name }}

**Kind:** {{ report.kind }}
**Seed:** {{ report.seed }}
**Version:** {{ report.version }}
**Outcome:** {{ "PASSED" if report.passed else "FAILED" }}
{% if report.error %}

> Run aborted: {{ report.error }}
{% endif %}
{% if partitions %}

## Partition

| Hull | J_b | J_u | Provenance |
|------|-----|-----|------------|
{% for row in partitions -%}
| {{ row.hull }} | {{ row.bounded }} | {{ row.unbounded }} | {{ row.provenance }} |
{% endfor %}
{% endif %}
{% if limits %}

## Cesàro limits

| Atom | Limit |
|------|-------|
{% for label, value in limits -%}
| {{ label }} | {{ value }} |
{% endfor %}
{% endif %}
{% if certificate %}

## Certificate

Q-expectation of the bounded part peaks at {{ "%.6g"|format(certificate.checked_sup) }}
(k = {{ certificate.argmax_position }}) against the bound {{ "%.6g"|format(certificate.l1_bound) }}.
{% endif %}

## Verdicts

{% for verdict in verdicts -%}
- **{{ verdict.name }}**: {{ verdict.status }}{% if verdict.expected != "pass" %} (expected {{ verdict.expected }}){% endif %}, {{ verdict.provenance }}. {{ verdict.narrative }}
{% endfor %}
"""


class MarkdownExporter:
    """Human-readable companion of the JSON report."""

    def __init__(self, report: RunReport):
        self.report = report
        self.environment = Environment(
            undefined=StrictUndefined, trim_blocks=True, keep_trailing_newline=True
        )

    def export(self, output_path: Path) -> None:
        output_path.write_text(self._generate_markdown(), encoding="utf-8")

    def _generate_markdown(self) -> str:
        template = self.environment.from_string(REPORT_TEMPLATE)
        return template.render(
            report=self.report,
            partitions=self._partition_rows(),
            limits=self._limit_rows(),
            certificate=self.report.certificate,
            verdicts=self._verdict_rows(),
        )

    def _partition_rows(self) -> List[Dict[str, Any]]:
        rows = []
        for part in (self.report.partition, self.report.cesaro_partition):
            if part is None:
                continue
            rows.append({
                "hull": part.hull.value,
                "bounded": sorted(part.bounded_atoms),
                "unbounded": sorted(part.unbounded_atoms),
                "provenance": part.provenance.value,
            })
        return rows

    def _limit_rows(self) -> List[Any]:
        profile = self.report.limit_profile
        if profile is None:
            return []
        return [
            (label, "no limit" if value is None else f"{value:.6g}")
            for label, value in zip(profile.labels, profile.limits)
        ]

    def _verdict_rows(self) -> List[Dict[str, str]]:
        return [
            {
                "name": verdict.name,
                "status": verdict.status.value.upper(),
                "expected": self.report.expected.get(verdict.name, "pass"),
                "provenance": verdict.provenance.value,
                "narrative": verdict.narrative,
            }
            for verdict in self.report.verdicts
        ]
