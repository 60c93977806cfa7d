"""Figure rendering for recourse-costs experiment reports."""

from .render import KINDS, FigureSpec, SchemaError, aggregate, read_report, render

__version__ = "0.1.0"

__all__ = ["KINDS", "FigureSpec", "SchemaError", "aggregate", "read_report", "render"]
