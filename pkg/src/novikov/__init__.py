"""Exact Ext computations and the algebraic Novikov spectral sequence.

The package computes Ext groups over truncated Brown-Peterson style Hopf
algebroids and the dual Steenrod algebra using truncated cobar complexes
in exact arithmetic, runs the algebraic Novikov spectral sequence under
two different constructions of the filtration, and serves interactive
spectral sequence chart sessions over HTTP.
"""

__version__ = "0.1.0"

from . import errors
from .errors import NovikovError

__all__ = ["errors", "NovikovError", "__version__"]
