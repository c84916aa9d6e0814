"""Figure front end for ddkit ensemble scan tables."""

from .render import CSV_COLUMNS, PlotSpec, SchemaError, build_figure, load_table, render

__version__ = "0.1.0"

__all__ = [
    "CSV_COLUMNS",
    "PlotSpec",
    "SchemaError",
    "build_figure",
    "load_table",
    "render",
]
