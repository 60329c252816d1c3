"""Report exporters."""

from .csv_exporter import CSVExporter
from .json_exporter import JSONExporter, SuiteExporter, plain
from .markdown_exporter import MarkdownExporter

__all__ = ["CSVExporter", "JSONExporter", "MarkdownExporter", "SuiteExporter", "plain"]
