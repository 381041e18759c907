"""Exact symbolic checks for the dispersionless integrable hierarchy of
genus-zero topological field theory and for finite-dimensional BV
homotopy transfer."""

from .kernels import IMPLEMENTATION as KERNELS

__version__ = "0.1.0"
