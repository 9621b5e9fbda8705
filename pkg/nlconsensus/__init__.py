"""Nonlinear consensus protocols on weighted digraphs: simulation and certification."""

__version__ = "0.1.0"
