"""Figure rendering for the balescu CLI's table outputs."""

from .render import FigureSpec, SchemaError, load_manifest, load_table, render

__version__ = "0.1.0"
