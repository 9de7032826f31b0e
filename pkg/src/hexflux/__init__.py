"""Spectral theory of the honeycomb lattice and hexagonal quantum graph in a magnetic field."""

from .errors import (ConfigError, DomainError, GapTrackingError, HexfluxError, InvalidFluxError,
                     NotInGapError, NumericContractError)
from .intervals import IntervalSet, hausdorff_distance, measure
from .lattice import (BandStructure, Flux, band_structure, build_bloch, dirac_check, eigenvalues,
                      jacobi_bloch, reduce_flux, spectrum)

__version__ = "0.1.0"

__all__ = [
    "BandStructure", "ConfigError", "DomainError", "Flux", "GapTrackingError", "HexfluxError",
    "IntervalSet", "InvalidFluxError", "NotInGapError", "NumericContractError", "band_structure",
    "build_bloch", "dirac_check", "eigenvalues", "hausdorff_distance", "jacobi_bloch", "measure",
    "reduce_flux", "spectrum",
]
