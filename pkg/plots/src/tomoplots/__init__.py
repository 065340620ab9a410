"""Static figures from tomonet benchmark reports."""

from .figures import (
    ESTIMATOR_STYLES,
    FigureSpec,
    figure_accuracy,
    figure_positivity,
    figure_timing,
    load_merged,
    render,
)
from .reader import KINDS, Report, SCHEMA_VERSION, read_report

__version__ = "0.1.0"

__all__ = [
    "ESTIMATOR_STYLES",
    "FigureSpec",
    "KINDS",
    "Report",
    "SCHEMA_VERSION",
    "figure_accuracy",
    "figure_positivity",
    "figure_timing",
    "load_merged",
    "read_report",
    "render",
    "__version__",
]
