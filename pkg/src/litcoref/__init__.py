"""Coreference resolution toolkit for long literary documents."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    Chain,
    Document,
    Mention,
    PipelineConfig,
    Token,
    compute_nesting_levels,
    validate_document,
)
