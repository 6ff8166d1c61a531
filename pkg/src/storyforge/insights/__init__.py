"""Offline analysis: engagement reports and corpus validation."""

from .corpus import CorpusSummary, FileResult, validate_corpus
from .reports import (
    InsightsError,
    behavior_categories,
    creation_heatmap,
    load_category_mapping,
    load_exports,
    reading_by_hour,
    render_table,
)

__all__ = [
    "CorpusSummary",
    "FileResult",
    "validate_corpus",
    "InsightsError",
    "behavior_categories",
    "creation_heatmap",
    "load_category_mapping",
    "load_exports",
    "reading_by_hour",
    "render_table",
]
