"""Spectral measure, Hausdorff continuity in flux and convergent studies.

Reports never assert constants: they tabulate ``q^{1/2} |spec|`` and
``d_H / |h - h'|^{1/4}`` so boundedness can be judged against computed anchors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .intervals import IntervalSet, hausdorff_distance, measure
from .io import SweepTable
from .lattice import TWO_PI, Flux, as_flux, spectrum
from .rational import convergent_fluxes

__all__ = [
    "IntervalSet", "measure", "hausdorff_distance", "ScalingReport", "measure_scaling",
    "continuity_study", "convergent_pairs", "box_counting", "dimension_report", "butterfly",
]

HOLDER_EXPONENT = 0.25


@dataclass
class ScalingReport:
    kind: str
    columns: list[str]
    rows: list[tuple]
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def table(self) -> SweepTable:
        return SweepTable(list(self.columns), list(self.rows), dict(self.meta))


def measure_scaling(qs, refine_tol: float = 1e-9, p: int = 1, n: int = 24) -> ScalingReport:
    """Rows ``(p, q, |spec|, q^{1/2} |spec|)``; zero flux for ``q = 1``."""
    rows = []
    for q in qs:
        f = Flux(0, 1) if q == 1 else Flux(p, q)
        m = measure(spectrum(f, n, refine_tol))
        rows.append((f.p, f.q, m, math.sqrt(f.q) * m))
    return ScalingReport("measure", ["p", "q", "measure", "sqrt_q_measure"], rows,
                         {"refine_tol": refine_tol, "grid": n})


def continuity_study(pairs, refine_tol: float = 1e-9, n: int = 24) -> ScalingReport:
    """Rows ``(p, q, p', q', |h - h'|, d_H, d_H / |h - h'|^{1/4})``.

    Identical fluxes are skipped (the ratio is undefined).
    """
    rows, skipped = [], []
    for a, b in pairs:
        a, b = as_flux(a), as_flux(b)
        dh = TWO_PI * abs(float(a.alpha - b.alpha))
        if dh == 0.0:
            skipped.append((str(a), str(b)))
            continue
        d = hausdorff_distance(spectrum(a, n, refine_tol), spectrum(b, n, refine_tol))
        rows.append((a.p, a.q, b.p, b.q, dh, d, d / dh ** HOLDER_EXPONENT))
    return ScalingReport("continuity", ["p", "q", "p2", "q2", "dh", "d_hausdorff", "ratio"], rows,
                         {"refine_tol": refine_tol, "grid": n, "exponent": HOLDER_EXPONENT,
                          "skipped": skipped})


def convergent_pairs(alpha="golden", q_max: int = 144, n_max: int = 64):
    """Consecutive convergent pairs of ``alpha`` with denominators up to ``q_max``."""
    seq = [f for f in convergent_fluxes(alpha, n_max) if f.q <= q_max]
    return list(zip(seq[:-1], seq[1:]))


def box_counting(s: IntervalSet, eps: float) -> int:
    """Number of grid cells ``[k eps, (k+1) eps)`` meeting ``s``."""
    if eps <= 0:
        raise DomainError("box size must be positive")
    count, last = 0, None
    for a, b in s:
        k0, k1 = math.floor(a / eps), math.floor(b / eps)
        if last is not None and k0 <= last:
            k0 = last + 1
        if k1 >= k0:
            count += k1 - k0 + 1
        last = k1 if last is None else max(last, k1)
    return count


def dimension_report(fluxes, eps=None, refine_tol: float = 1e-9, n: int = 24) -> ScalingReport:
    """Box-counting slope ``-d log N / d log eps`` per flux (reported, never asserted)."""
    eps = np.geomspace(1e-1, 1e-4, 13) if eps is None else np.asarray(eps, dtype=float)
    rows = []
    for f in fluxes:
        f = as_flux(f)
        s = spectrum(f, n, refine_tol)
        counts = np.array([box_counting(s, e) for e in eps], dtype=float)
        slope = -np.polyfit(np.log(eps), np.log(counts), 1)[0]
        rows.append((f.p, f.q, measure(s), float(slope)))
    return ScalingReport("box-dimension", ["p", "q", "measure", "box_dimension"], rows,
                         {"eps": eps.tolist(), "refine_tol": refine_tol, "grid": n})


def butterfly(q_max: int, n: int = 12, refine_tol: float = 1e-9) -> SweepTable:
    """Spectral components ``(p, q, band_lo, band_hi)`` for all reduced ``p/q``, ``q <= q_max``."""
    table = SweepTable(["p", "q", "band_lo", "band_hi"], meta={"q_max": q_max, "grid": n,
                                                               "refine_tol": refine_tol})
    for q in range(1, q_max + 1):
        for p in range(q):
            if math.gcd(p, q) != 1:
                continue
            for lo, hi in spectrum(Flux(p, q), n, refine_tol):
                table.append((p, q, lo, hi))
    return table
