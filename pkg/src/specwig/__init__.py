"""Spectra of symmetric random matrices built from stationary Gaussian fields."""

from .spectral_measure import (
    Atom,
    AtomSet,
    FourierTable,
    SpectralDensity,
    SpectralMeasure,
    make_density,
)

__version__ = "0.1.0"

__all__ = ["Atom", "AtomSet", "FourierTable", "SpectralDensity", "SpectralMeasure", "make_density"]
