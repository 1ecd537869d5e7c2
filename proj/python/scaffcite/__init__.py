"""Multitask citation-intent classification toolkit.

The heavy lifting lives in the compiled extension; this package re-exports
its operations: tokenization, citation-marker detection and stripping,
section-title normalization, crowd-annotation aggregation, evaluation
metrics, gradient checking, and checkpoint-backed prediction.
"""

from scaffcite._core import (
    Model,
    ScaffciteError,
    aggregate_annotations,
    classification_report,
    detect_citation_markers,
    gradcheck,
    macro_f1,
    normalize_section_title,
    qualify_annotator,
    strip_citation_markers,
    tokenize,
)

__all__ = [
    "Model",
    "ScaffciteError",
    "aggregate_annotations",
    "classification_report",
    "detect_citation_markers",
    "gradcheck",
    "macro_f1",
    "normalize_section_title",
    "qualify_annotator",
    "strip_citation_markers",
    "tokenize",
]

__version__ = "0.1.0"
