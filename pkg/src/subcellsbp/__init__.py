"""Sub-cell summation-by-parts operators and conservative, energy-stable
overset-grid solvers for one-dimensional hyperbolic conservation laws."""

__version__ = "0.1.0"
