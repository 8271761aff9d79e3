"""Exponential functionals of Lévy processes: densities, range tests and simulation."""

__version__ = "0.1.0"
