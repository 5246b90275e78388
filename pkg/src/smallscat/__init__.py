"""Numerical laboratory for building a target Schrodinger potential out of
many small ball scatterers and checking that the many-body field converges
to the effective-medium field as the scatterer radius shrinks."""

from .kernels import BACKEND

__all__ = ["BACKEND"]
__version__ = "0.1.0"
