"""shrinklab: numerical workbench for graphical self-shrinking surfaces in R^4."""

__version__ = "0.1.0"
