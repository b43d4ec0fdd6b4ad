"""Torsion and regulators of finite quotients of free Z[Z^n]-complexes."""

from .laurent import LaurentMatrix, LaurentPoly
from .lattices import Sublattice, TorsionPoint
from .complexes import FreeComplex, build_quotient, validate_complex
from .spectral import bv_identity_check, ray_singer
from .cosets import TorsionCoset, normalize_coset, projector

__all__ = [
    "LaurentMatrix", "LaurentPoly", "Sublattice", "TorsionPoint", "FreeComplex",
    "build_quotient", "validate_complex", "bv_identity_check", "ray_singer",
    "TorsionCoset", "normalize_coset", "projector",
]
__version__ = "0.1.0"
