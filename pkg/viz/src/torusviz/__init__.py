"""Figure generation for torusflow CLI outputs."""

from .io import SchemaError
from .render import PlotJob, render, torus_embedding

__version__ = "0.1.0"
