"""Exact free field realizations of affine sl(n+1) on polynomial Fock spaces.

Everything is exact rational arithmetic.  The hot loops live in a compiled
engine (``_ckernels``) with a pure-Python fallback chosen at import time; see
:mod:`wakimoto_fock.kernels`.
"""

from .algebra import FockPoly, Params, Weight, X, Y, format_poly, parse_poly, weight_of
from .kernels import IMPLEMENTATION
from .oscillator import Osc, apply_oscillator, build_b_matrix, ccr_check, det_b
from .realization import Current, E, F, H, apply_current, current_plan, vacuum_eigenvalues
from .report import Report

__version__ = "0.1.0"

__all__ = [
    "IMPLEMENTATION",
    "FockPoly",
    "Params",
    "Weight",
    "X",
    "Y",
    "format_poly",
    "parse_poly",
    "weight_of",
    "Osc",
    "apply_oscillator",
    "build_b_matrix",
    "ccr_check",
    "det_b",
    "Current",
    "E",
    "F",
    "H",
    "apply_current",
    "current_plan",
    "vacuum_eigenvalues",
    "Report",
]
