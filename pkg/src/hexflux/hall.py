"""Gap labels from the trace formula, Streda Hall conductivity and the coloured butterfly.

In a gap at flux ``p/q`` with ``j`` bands between the Dirac energy and the gap,
``tr(P) = (2/(3 sqrt3)) j / q = (2/(3 sqrt3)) (gamma1 + gamma2 p/q)``.
The Streda value ``(3 sqrt3 / 2) d tr(P)/dh`` then equals ``gamma2 / 2 pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dos import CELL_WEIGHT, band_count
from .errors import DomainError, GapTrackingError, NotInGapError
from .intervals import IntervalSet
from .io import SweepTable
from .lattice import TWO_PI, Flux, as_flux, spectrum
from .rational import flux_of, flux_pair

STRICT_GAP = 1e-8
HALL_COLUMNS = ["p", "q", "gap_lo", "gap_hi", "j", "gamma1", "gamma2", "resolved"]


@dataclass(frozen=True)
class GapLabel:
    flux: Flux
    gap: tuple[float, float]
    j: int
    gamma1: int
    gamma2: int

    @property
    def trace(self) -> float:
        """``(2/(3 sqrt3)) (gamma1 + gamma2 p/q)``."""
        return CELL_WEIGHT * (self.gamma1 + self.gamma2 * self.flux.p / self.flux.q)


def canonical_label(p: int, q: int, j: int) -> tuple[int, int]:
    """Solve ``gamma1 q + gamma2 p = j`` with ``|gamma2| <= q/2`` (ties positive)."""
    if q == 1:
        return j, 0
    g2 = (j * pow(p, -1, q)) % q
    if 2 * g2 > q:
        g2 -= q
    g1, rem = divmod(j - g2 * p, q)
    assert rem == 0
    return g1, g2


def _gap_containing(spec: IntervalSet, mu: float):
    """Open gap ``(lo, hi)`` of ``spec`` containing ``mu``; unbounded sides use +-inf."""
    hit = spec.locate(mu)
    if hit is not None:
        raise NotInGapError(mu, hit)
    lo = max((b for _, b in spec if b < mu), default=-math.inf)
    hi = min((a for a, _ in spec if a > mu), default=math.inf)
    return lo, hi


def gap_label(flux, mu: float, n: int = 24, spec: IntervalSet | None = None) -> GapLabel:
    flux = as_flux(flux)
    spec = spec if spec is not None else spectrum(flux, n)
    gap = _gap_containing(spec, mu)
    j = band_count(flux, mu, n, spec)
    g1, g2 = canonical_label(flux.p, flux.q, j)
    return GapLabel(flux, gap, j, g1, g2)


def _overlap(a, b) -> float:
    return min(a[1], b[1]) - max(a[0], b[0])


def streda(mu: float, h: float, dh: float | None = None, q_max: int = 200, n: int = 24,
           return_details: bool = False):
    """``2 pi c_H / 2 pi``: Streda value ``(3 sqrt3/2) d ids/dh`` at fixed ``mu``.

    The two fluxes are the Farey neighbours of ``h/2pi`` of order ``q_max``
    (or approximants of ``h +- dh``). The gap containing ``mu`` is tracked
    by interval overlap; if ``mu`` leaves the gap, :class:`GapTrackingError`.
    """
    lo, hi = flux_pair(h, dh, q_max)
    if lo <= 0 or hi >= 1:
        raise DomainError("Streda difference needs fluxes strictly inside (0, 1)")
    centre = Fraction(h / TWO_PI).limit_denominator(q_max)
    ref_gap = None
    if lo < centre < hi:
        try:
            ref_gap = _gap_containing(spectrum(flux_of(centre), n), mu)
        except NotInGapError as err:
            raise GapTrackingError(f"mu={mu} is not in a gap at flux {centre}: {err}") from err
    labels = []
    for a in (lo, hi):
        f = flux_of(a)
        spec = spectrum(f, n)
        try:
            lab = gap_label(f, mu, n, spec)
        except NotInGapError as err:
            raise GapTrackingError(f"gap containing mu={mu} closes at flux {a}") from err
        if ref_gap is not None:
            cands = [(-math.inf, spec.hull[0])] + spec.gaps() + [(spec.hull[1], math.inf)]
            best = max(cands, key=lambda g: _overlap(g, ref_gap))
            if not best[0] <= mu <= best[1]:
                raise GapTrackingError(f"gap at flux {a} best matching the reference gap misses mu={mu}")
        labels.append(lab)
    ids_lo = CELL_WEIGHT * labels[0].j / lo.denominator
    ids_hi = CELL_WEIGHT * labels[1].j / hi.denominator
    value = (3.0 * math.sqrt(3.0) / 2.0) * (ids_hi - ids_lo) / (TWO_PI * float(hi - lo))
    if return_details:
        return value, labels
    return value


def _column(p: int, q: int, n: int, mu_grid):
    f = Flux(p, q)
    spec = spectrum(f, n)
    rows = []
    for g_lo, g_hi in spec.gaps():
        mid = 0.5 * (g_lo + g_hi)
        resolved = g_hi - g_lo > STRICT_GAP
        j = band_count(f, mid, n, spec)
        g1, g2 = canonical_label(p, q, j)
        mus = [None] if mu_grid is None else [m for m in mu_grid if g_lo < m < g_hi]
        for m in mus:
            row = [p, q, g_lo, g_hi, j, g1, g2, resolved]
            rows.append(row if mu_grid is None else row + [m])
    return rows


def hall_map(q_max: int, mu_grid=None, n: int = 12) -> SweepTable:
    """Interior gaps of every reduced ``p/q`` with ``q <= q_max`` and their labels."""
    if q_max > 60:
        raise DomainError("hall_map is desk scale: q_max <= 60")
    cols = HALL_COLUMNS + ([] if mu_grid is None else ["mu"])
    table = SweepTable(cols, meta={"q_max": q_max, "grid": n, "strict_gap": STRICT_GAP})
    mu_grid = None if mu_grid is None else list(np.asarray(mu_grid, dtype=float))
    for q in range(1, q_max + 1):
        for p in range(q):
            if math.gcd(p, q) != 1:
                continue
            for row in _column(p, q, n, mu_grid):
                table.append(row)
    return table
