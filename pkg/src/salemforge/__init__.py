"""Exact search for Salem-type isometries of even hyperbolic lattices."""

__version__ = "0.1.0"
