"""Numerical verification toolkit for decay of compressible viscous heat-conducting flows in critical Besov spaces."""

__version__ = "0.1.0"
