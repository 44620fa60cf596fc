"""Figure rendering for safebandit campaign CSV outputs."""

from .render import PlotSpec, SchemaError, plot_regret, plot_sharpness

__version__ = "0.1.0"
