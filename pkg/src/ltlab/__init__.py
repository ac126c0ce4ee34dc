"""Numerical audit bench for spectral bounds of 1D matrix Schrodinger operators."""

__version__ = "0.1.0"

from . import (  # noqa: E402
    birman_schwinger,
    bounds,
    fractional,
    multidim,
    potentials,
    reports,
    scattering,
    spectral1d,
)
from .potentials import SampledPotential, build_family
from .reports import BoundReport, BoundSpec
from .spectral1d import NegativeSpectrum, negative_spectrum, refined_negative_spectrum

__all__ = [
    "__version__",
    "BoundReport",
    "BoundSpec",
    "NegativeSpectrum",
    "SampledPotential",
    "birman_schwinger",
    "bounds",
    "build_family",
    "fractional",
    "multidim",
    "negative_spectrum",
    "potentials",
    "refined_negative_spectrum",
    "reports",
    "scattering",
    "spectral1d",
]
