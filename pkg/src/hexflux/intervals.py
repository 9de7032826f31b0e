"""Finite unions of closed intervals on the real line.

Spectra at rational flux are finite unions of bands, so every spectral set in
the package is an :class:`IntervalSet`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

MERGE_TOL = 1e-10


@dataclass(frozen=True)
class IntervalSet:
    """Sorted, pairwise disjoint closed intervals ``[lo, hi]``.

    Construct through :meth:`from_intervals`, which sorts and merges
    intervals closer than ``tol``. ``meta`` carries free-form provenance
    (flux, tolerances, warnings) and does not take part in equality.
    """

    intervals: tuple[tuple[float, float], ...] = ()
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_intervals(cls, pairs: Iterable[Sequence[float]], tol: float = MERGE_TOL,
                       meta: dict | None = None) -> "IntervalSet":
        items = sorted((float(a), float(b)) for a, b in pairs)
        merged: list[list[float]] = []
        for lo, hi in items:
            if hi < lo:
                raise DomainError(f"interval with hi < lo: [{lo}, {hi}]")
            if merged and lo <= merged[-1][1] + tol:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        meta = dict(meta or {})
        meta.setdefault("merge_tol", tol)
        return cls(tuple((lo, hi) for lo, hi in merged), meta)

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(())

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    @property
    def lo(self) -> np.ndarray:
        return np.array([a for a, _ in self.intervals])

    @property
    def hi(self) -> np.ndarray:
        return np.array([b for _, b in self.intervals])

    @property
    def measure(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    @property
    def hull(self) -> tuple[float, float]:
        if not self.intervals:
            raise DomainError("empty set has no hull")
        return self.intervals[0][0], self.intervals[-1][1]

    def gaps(self) -> list[tuple[float, float]]:
        """Open gaps between consecutive intervals, as ``(lo, hi)`` pairs."""
        return [(self.intervals[i][1], self.intervals[i + 1][0])
                for i in range(len(self.intervals) - 1)]

    def contains(self, x, tol: float = 0.0):
        x = np.asarray(x, dtype=float)
        if not self.intervals:
            return np.zeros(x.shape, dtype=bool)
        return self.distance(x) <= tol

    def locate(self, x: float) -> tuple[float, float] | None:
        """Interval containing ``x`` or ``None``."""
        for a, b in self.intervals:
            if a <= x <= b:
                return (a, b)
        return None

    def distance(self, x) -> np.ndarray:
        """Pointwise distance from ``x`` to the set."""
        if not self.intervals:
            raise DomainError("distance to an empty set")
        x = np.asarray(x, dtype=float)
        lo, hi = self.lo, self.hi
        below = np.maximum(lo[None, :] - x[..., None], 0.0)
        above = np.maximum(x[..., None] - hi[None, :], 0.0)
        return np.min(below + above, axis=-1)

    def reflect(self) -> "IntervalSet":
        return IntervalSet.from_intervals([(-b, -a) for a, b in self.intervals],
                                          tol=self.meta.get("merge_tol", MERGE_TOL))

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet.from_intervals(list(self.intervals) + list(other.intervals))

    def issubset(self, other: "IntervalSet", tol: float = 0.0) -> bool:
        for a, b in self.intervals:
            if not any(c - tol <= a and b <= d + tol for c, d in other.intervals):
                return False
        return True

    def to_json(self) -> list[list[float]]:
        return [[a, b] for a, b in self.intervals]


def measure(s: IntervalSet) -> float:
    """Lebesgue measure (total length)."""
    return s.measure


def _directed_hausdorff(a: IntervalSet, b: IntervalSet) -> float:
    # x -> dist(x, b) is piecewise linear; on a it peaks at an endpoint of a
    # or at the midpoint of a gap of b.
    cands = [e for iv in a.intervals for e in iv]
    for g_lo, g_hi in b.gaps():
        mid = 0.5 * (g_lo + g_hi)
        if a.locate(mid) is not None:
            cands.append(mid)
    return float(np.max(b.distance(np.array(cands))))


def hausdorff_distance(a: IntervalSet, b: IntervalSet) -> float:
    """Exact Hausdorff distance between two nonempty interval sets."""
    if not a or not b:
        raise DomainError("Hausdorff distance needs two nonempty sets")
    return max(_directed_hausdorff(a, b), _directed_hausdorff(b, a))
