"""Phase-space area function and leading-order Landau levels.

``F0(s)`` is ``1/(4 pi)`` times the area of the sublevel set
``{(x, xi) in [0, 2pi)^2 : |1 + e^{ix} + e^{i xi}|^2 / 9 <= s}`` (both Dirac
valleys counted). Landau levels solve ``g(z) = |n| h`` with
``g(x) = F0(Delta(x)^2)`` on the monotone branches of ``g`` on either side of
the Dirac energy ``z_D``.

For fixed ``x`` the condition on ``xi`` is ``cos(xi - arg a) <= c(x)`` with
``a = 1 + e^{ix}``, so the inner integral is ``2 arccos(-c)`` in closed form
and ``F0`` reduces to a one-dimensional adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import ndimage
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import DomainError
from .graph import Discriminant, IdentityDiscriminant, default_window

SQRT3 = math.sqrt(3.0)
SMALL_S_SLOPE = 3.0 * SQRT3
VALLEY_MERGE = 1.0 / 9.0
# widest |Delta| window on which g stays smooth (the two valleys merge at s = 1/9)
DEFAULT_DELTA = 1.0 / 3.0


def _inner_length(x: float, s: float) -> float:
    a2 = 2.0 + 2.0 * math.cos(x)
    if a2 <= 1e-300:
        return 2.0 * math.pi if 9.0 * s >= 1.0 else 0.0
    a = math.sqrt(a2)
    c = (9.0 * s - 1.0 - a2) / (2.0 * a)
    return 2.0 * math.acos(min(1.0, max(-1.0, -c)))


def f0(s: float) -> float:
    """Normalized phase-space area ``F0(s)`` for ``s`` in ``[0, 1]``."""
    s = float(s)
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"F0 is defined on [0, 1], got {s}")
    if s == 0.0:
        return 0.0
    if s == 1.0:
        return math.pi
    # kinks of the integrand where c(x) = +-1, i.e. |a| = 1 +- 3 sqrt(s) or 3 sqrt(s) - 1
    r = 3.0 * math.sqrt(s)
    pts = sorted({math.acos(a * a / 2.0 - 1.0) for a in (1.0 + r, 1.0 - r, r - 1.0) if 0.0 < a < 2.0})
    val, _ = quad(_inner_length, 0.0, math.pi, args=(s,), points=pts or None, limit=400,
                  epsabs=1e-14, epsrel=1e-13)
    # integrand is even about x = pi
    return 2.0 * val / (4.0 * math.pi)


@lru_cache(maxsize=8)
def _table(resolution: int):
    s = np.linspace(0.0, 1.0, resolution + 1)
    return s, np.array([f0(x) for x in s])


class AreaFunction:
    """Tabulated ``F0`` with a cubic spline and exact polishing on demand."""

    def __init__(self, resolution: int = 2048):
        self.resolution = resolution
        self.s, self.values = _table(resolution)
        self._spline = CubicSpline(self.s, self.values)

    def __call__(self, s, exact: bool = False):
        if exact:
            return np.vectorize(f0)(s) if np.ndim(s) else f0(s)
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < 0.0) or np.any(s_arr > 1.0):
            raise DomainError("F0 is defined on [0, 1]")
        out = self._spline(s_arr)
        out = np.where(s_arr == 0.0, 0.0, out)
        return float(out) if out.ndim == 0 else out

    def derivative(self, s):
        return self._spline(s, 1)

    def inverse(self, t: float, exact: bool = False) -> float:
        """``s`` with ``F0(s) = t``; ``exact`` polishes against the quadrature."""
        t = float(t)
        if not 0.0 <= t <= math.pi:
            raise DomainError(f"F0 takes values in [0, pi], got {t}")
        if t == 0.0:
            return 0.0
        s = brentq(lambda x: self._spline(x) - t, 0.0, 1.0, xtol=1e-15)
        if exact:
            # secant polish on the exact quadrature, bracketed by the spline error
            lo, hi = max(0.0, s - 1e-6), min(1.0, s + 1e-6)
            if f0(lo) <= t <= f0(hi):
                s = brentq(lambda x: f0(x) - t, lo, hi, xtol=1e-16, rtol=1e-15)
        return float(s)


@lru_cache(maxsize=1)
def default_area() -> AreaFunction:
    return AreaFunction()


def sublevel_components(s: float, n: int = 512) -> int:
    """Number of connected components of the sublevel set on the torus grid."""
    x = 2.0 * math.pi * (np.arange(n) + 0.5) / n
    xx, yy = np.meshgrid(x, x, indexing="ij")
    mask = np.abs(1.0 + np.exp(1j * xx) + np.exp(1j * yy)) ** 2 / 9.0 <= s
    labels, count = ndimage.label(mask)
    if count == 0:
        return 0
    parent = list(range(count + 1))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    # periodic identification of opposite edges
    for a, b in ((labels[0, :], labels[-1, :]), (labels[:, 0], labels[:, -1])):
        for u, v in zip(a, b):
            if u and v:
                parent[find(u)] = find(v)
    return len({find(i) for i in range(1, count + 1)})


# ---------------------------------------------------------------------------

def g_energy(d: Discriminant, x, area: AreaFunction | None = None):
    """``g(x) = F0(Delta(x)^2)``."""
    area = area or default_area()
    delta = np.asarray(d.value(x), dtype=float)
    if np.any(np.abs(delta) > 1.0):
        raise DomainError("g is only defined where |Delta| <= 1 (inside a band)")
    return area(delta ** 2)


@dataclass
class LandauLadder:
    """Landau levels ``n -> z_n`` around one Dirac energy."""

    h: float
    z_dirac: float
    levels: dict[int, float]
    kind: str = "semiclassical"
    v_fermi: float | None = None
    omitted: list[int] = field(default_factory=list)
    branch: tuple[float, float] | None = None

    @property
    def weight(self) -> float:
        """Per-level trace weight ``2h / (3 sqrt3 pi)``."""
        return 2.0 * self.h / (3.0 * SQRT3 * math.pi)

    @property
    def indices(self) -> list[int]:
        return sorted(self.levels)

    def energies(self) -> np.ndarray:
        return np.array([self.levels[n] for n in self.indices])

    def __getitem__(self, n: int) -> float:
        return self.levels[n]


def _dirac_point(d: Discriminant, window) -> float:
    if isinstance(d, IdentityDiscriminant):
        return 0.0
    roots = d.dirac_energies(window)
    if roots.size == 0:
        raise DomainError(f"no zero of Delta in {tuple(window)}")
    return float(roots[0])


def _default_window(d: Discriminant):
    return (-1.0, 1.0) if isinstance(d, IdentityDiscriminant) else default_window(d.potential)


def dirac_window(d: Discriminant, delta: float = DEFAULT_DELTA, window=None, z_dirac=None):
    """``(z_D, x_minus, x_plus, up_sign, branch)``: the piece where ``|Delta| <= delta``.

    ``up_sign`` is the sign of ``Delta`` just above ``z_D``.
    """
    window = window or _default_window(d)
    z = _dirac_point(d, window) if z_dirac is None else float(z_dirac)
    if isinstance(d, IdentityDiscriminant):
        return z, -delta, delta, 1.0, (-1.0, 1.0)
    a, b = d.branch_around(z, window)
    da, db = d.value(np.array([a, b]))
    up_sign = 1.0 if db > da else -1.0
    ends = []
    for end, dend, side in ((a, da, -1.0), (b, db, 1.0)):
        target = math.copysign(min(delta, abs(dend)), dend)
        ends.append(float(d.invert([target], (a, b))[0]))
    return z, ends[0], ends[1], up_sign, (a, b)


def landau_levels(d: Discriminant, h: float, n_max: int, delta: float = DEFAULT_DELTA,
                  window: Sequence[float] | None = None, z_dirac: float | None = None,
                  exact: bool = False, area: AreaFunction | None = None,
                  inverse=None) -> LandauLadder:
    """Leading-order levels ``z_{+-n} = g_{+-}^{-1}(n h)``, ``z_0 = z_D``.

    ``g_+`` is the branch above ``z_D`` in energy. Levels whose ``n h``
    exceeds ``g`` at the edge of the ``|Delta| < delta`` window are omitted
    and listed in ``ladder.omitted``. ``inverse`` optionally replaces the
    Newton inversion of ``Delta`` (e.g. :meth:`Discriminant.inverse_table`).
    """
    if h <= 0:
        raise DomainError("landau_levels needs h > 0")
    area = area or default_area()
    z, x_lo, x_hi, up_sign, branch = dirac_window(d, delta, window, z_dirac)
    g_lo = area(float(d.value(x_lo)) ** 2)
    g_hi = area(float(d.value(x_hi)) ** 2)
    levels = {0: z}
    omitted = []
    targets, keys = [], []
    for n in range(1, n_max + 1):
        t = n * h
        for side, gmax in ((1, g_hi), (-1, g_lo)):
            if t > gmax:
                omitted.append(side * n)
                continue
            root = math.sqrt(area.inverse(t, exact=exact))
            targets.append(side * up_sign * root)
            keys.append(side * n)
    if targets:
        xs = d.invert(np.array(targets), branch) if inverse is None else inverse(np.array(targets))
        levels.update({k: float(x) for k, x in zip(keys, xs)})
    return LandauLadder(h, z, dict(sorted(levels.items())), omitted=sorted(omitted), branch=branch)


def perfect_cone_levels(d: Discriminant, h: float, n_max: int, window=None,
                        z_dirac: float | None = None) -> LandauLadder:
    """Symmetric cone levels ``z_D +- v_F sqrt(|n| h)``, ``v_F = 3^{-3/4} / |Delta'(z_D)|``."""
    window = window or _default_window(d)
    z = _dirac_point(d, window) if z_dirac is None else float(z_dirac)
    dprime = float(d.derivative(z))
    if dprime == 0.0:
        raise DomainError("degenerate cone: Delta'(z_D) = 0")
    v = 3.0 ** -0.75 / abs(dprime)
    levels = {n: z + math.copysign(v * math.sqrt(abs(n) * h), n) if n else z
              for n in range(-n_max, n_max + 1)}
    return LandauLadder(h, z, levels, kind="perfect-cone", v_fermi=v)
