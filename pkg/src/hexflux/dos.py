"""Regularized traces, smoothed densities of states and integrated densities.

Per-area traces use hexagon area ``3 sqrt(3) / 2`` (edge length 1), so one
unit cell carries ``2 / (3 sqrt 3)`` states per band per unit area and the
full two-band density is ``4 / (3 sqrt 3)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, NotInGapError
from .lattice import BandStructure, Flux, spectrum
from .semiclassics import LandauLadder

CELL_WEIGHT = 2.0 / (3.0 * math.sqrt(3.0))
TOTAL_DENSITY = 2.0 * CELL_WEIGHT


def gaussian(x, sigma: float):
    return np.exp(-0.5 * (np.asarray(x) / sigma) ** 2) / (math.sqrt(2.0 * math.pi) * sigma)


def trace_functional(b: BandStructure, f: Callable, transform: Callable | None = None) -> float:
    """``tr^ f(t^h)``: Brillouin-zone average of ``sum_j f(E_j(k))`` per unit area.

    ``transform`` maps tight-binding energies to another energy variable
    (e.g. quantum-graph energies) and returns ``(x, mask)``; masked-out
    states contribute nothing.
    """
    e = b.energies
    if transform is None:
        vals = f(e)
    else:
        x, mask = transform(e)
        vals = np.where(mask, f(np.where(mask, x, 0.0)), 0.0)
    n_points = e.shape[0] * e.shape[1]
    return float(CELL_WEIGHT * np.sum(vals) / (b.flux.q * n_points))


@dataclass
class DOSProfile:
    mu: np.ndarray
    rho: np.ndarray
    source: str
    sigma: float
    p: int | None = None
    q: int | None = None
    warnings: list = field(default_factory=list)

    def rows(self):
        for m, r in zip(self.mu, self.rho):
            yield {"mu": float(m), "rho": float(r), "source": self.source,
                   "sigma": self.sigma, "p": self.p, "q": self.q}


def dos_smoothed(source: BandStructure | LandauLadder, mu_grid, sigma: float,
                 transform: Callable | None = None, chunk: int = 64) -> DOSProfile:
    """Gaussian-smoothed density of states on ``mu_grid``.

    Band structures give the exact-bands profile through :func:`trace_functional`;
    ladders give ``(2h / (3 sqrt3 pi)) sum_n G_sigma(mu - z_n)``.
    """
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    mu = np.asarray(mu_grid, dtype=float)
    notes = []
    if mu.size > 1 and sigma < np.min(np.diff(mu)):
        msg = f"sigma={sigma} is below the mu-grid spacing; profile is aliased"
        warnings.warn(msg)
        notes.append(msg)
    if isinstance(source, LandauLadder):
        z = source.energies()
        rho = source.weight * gaussian(mu[:, None] - z[None, :], sigma).sum(axis=1)
        return DOSProfile(mu, rho, "landau-sum", sigma, warnings=notes)
    e = source.energies.reshape(-1)
    weight = CELL_WEIGHT / (source.flux.q * source.grid_shape[0] * source.grid_shape[1])
    if transform is not None:
        x, mask = transform(e)
        e = x[mask]
    rho = np.empty_like(mu)
    for i in range(0, mu.size, chunk):
        rho[i:i + chunk] = weight * gaussian(mu[i:i + chunk, None] - e[None, :], sigma).sum(axis=1)
    return DOSProfile(mu, rho, "exact-bands", sigma, source.flux.p, source.flux.q, notes)


def band_count(flux: Flux, mu: float, n: int = 24, spec=None) -> int:
    """Signed number of bands between the Dirac energy 0 and ``mu`` (in a gap)."""
    spec = spec if spec is not None else spectrum(flux, n)
    if mu == 0.0:
        return 0
    hit = spec.locate(mu)
    if hit is not None:
        raise NotInGapError(mu, hit)
    edges = np.asarray(spec.meta["bands"])
    q = flux.q
    pos, neg = edges[q:], edges[:q]
    if mu > 0:
        return int(np.sum(pos[:, 1] < mu))
    return -int(np.sum(neg[:, 0] > mu))


def ids(flux: Flux, mu: float, n: int = 24, spec=None) -> float:
    """Trace of the Fermi projection onto ``[0, mu)`` (negative for ``mu < 0``)."""
    return CELL_WEIGHT * band_count(flux, mu, n, spec) / flux.q
