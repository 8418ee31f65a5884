"""Numerical toolkit for the two-dimensional Yang-Mills measure with U(1), SU(2) and SO(3)."""

__version__ = "0.1.0"

from .groups import ConjClass, GroupElement, GroupId, Irrep  # noqa: E402,F401
from .surface import PathWord, SurfaceGraph  # noqa: E402,F401
