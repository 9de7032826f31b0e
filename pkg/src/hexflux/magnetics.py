"""Grand-canonical potential, magnetization and the de Haas-van Alphen sawtooth.

``Omega_beta(mu, h) = tr(eta(H) f_beta(mu - H))`` with
``f_beta(x) = -log(exp(beta x) + 1) / beta`` and ``f_inf(x) = -max(x, 0)``;
``M = -(3 sqrt3 / 2) dOmega/dh`` by central differences. The sawtooth
approximation is ``M_inf = sigma(g(mu)/h) g(mu) / (pi g'(mu))`` with
``sigma(y) = y - floor(y) - 1/2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .dos import CELL_WEIGHT
from .errors import DomainError
from .graph import Discriminant, IdentityDiscriminant
from .lattice import BandStructure, band_structure
from .rational import flux_of, flux_pair
from .semiclassics import (DEFAULT_DELTA, AreaFunction, LandauLadder, default_area,
                           dirac_window, landau_levels)

M_PREFACTOR = 3.0 * math.sqrt(3.0) / 2.0
METHODS = ("landau-sum", "spectral", "sawtooth")


def f_beta(x, beta: float = math.inf):
    """``-beta^{-1} log(e^{beta x} + 1)``; ``-max(x, 0)`` at ``beta = inf``."""
    x = np.asarray(x, dtype=float)
    if beta <= 0:
        raise DomainError("beta must be positive or inf")
    if math.isinf(beta):
        return -np.maximum(x, 0.0)
    return -np.logaddexp(beta * x, 0.0) / beta


def _smooth_step(t):
    """C-infinity step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def bump(u):
    """Smooth bump equal to 1 on ``|u| <= 1/2`` and 0 on ``|u| >= 1``."""
    return _smooth_step(2.0 * (1.0 - np.abs(np.asarray(u, dtype=float))))


@dataclass
class EtaWindow:
    """``eta(x) = bump(Delta(x) / delta)`` on the Dirac branch piece ``[x_lo, x_hi]``."""

    d: Discriminant
    delta: float
    z_dirac: float
    x_lo: float
    x_hi: float
    _inverse: object = field(default=None, repr=False)

    @classmethod
    def build(cls, d: Discriminant | None = None, delta: float = DEFAULT_DELTA, window=None,
              z_dirac: float | None = None) -> "EtaWindow":
        d = d if d is not None else IdentityDiscriminant()
        if not 0 < delta <= 1:
            raise DomainError("eta window needs 0 < delta <= 1")
        z, lo, hi, _, _ = dirac_window(d, delta, window, z_dirac)
        return cls(d, delta, z, lo, hi)

    @property
    def inverse(self):
        if self._inverse is None:
            self._inverse = self.d.inverse_table(self.x_lo, self.x_hi)
        return self._inverse

    def contains(self, x) -> bool:
        return bool(self.x_lo < x < self.x_hi)

    def weights_tb(self, e):
        """``eta`` expressed in the tight-binding variable ``Delta``."""
        return bump(np.asarray(e, dtype=float) / self.delta)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.x_lo) & (x <= self.x_hi)
        out = np.zeros(x.shape)
        if inside.any():
            out[inside] = self.weights_tb(self.d.value(x[inside]))
        return out


def _check_window(eta: EtaWindow, mu: float):
    if not eta.contains(mu):
        raise DomainError(f"mu={mu} is outside the eta support ({eta.x_lo}, {eta.x_hi})")


def grand_potential(source: BandStructure | LandauLadder, mu: float, beta: float = math.inf,
                    eta: EtaWindow | None = None) -> float:
    """``Omega_beta(mu)`` from a band structure (trace) or a ladder (level sum)."""
    eta = eta or EtaWindow.build()
    _check_window(eta, mu)
    if isinstance(source, LandauLadder):
        z = source.energies()
        return float(source.weight * np.sum(eta(z) * f_beta(mu - z, beta)))
    e = source.energies.reshape(-1)
    keep = np.abs(e) < eta.delta
    x = eta.inverse(e[keep])
    vals = eta.weights_tb(e[keep]) * f_beta(mu - x, beta)
    n_points = source.grid_shape[0] * source.grid_shape[1]
    return float(CELL_WEIGHT * np.sum(vals) / (source.flux.q * n_points))


def _ladder(eta: EtaWindow, h: float, area: AreaFunction | None):
    area = area or default_area()
    n_max = int(area(1.0) / h) + 1
    return landau_levels(eta.d, h, n_max, delta=eta.delta, z_dirac=eta.z_dirac,
                         area=area, inverse=eta.inverse)


def _noise_warning(omega_scale: float, level_tol: float, dh: float, m: float):
    err = M_PREFACTOR * (64 * np.finfo(float).eps * omega_scale + level_tol) / dh
    if err > 1e-3 * max(abs(m), 1e-12):
        warnings.warn(f"dh={dh:g} is close to the noise floor of Omega; "
                      f"estimated derivative error {err:.2e}")
    return err


def magnetization(mu: float, h: float, dh: float | None = 1e-6, beta: float = math.inf,
                  method: str = "landau-sum", d: Discriminant | None = None,
                  delta: float = DEFAULT_DELTA, eta: EtaWindow | None = None, n: int = 12,
                  q_max: int = 200, area: AreaFunction | None = None) -> float:
    """``M_beta(mu, h) = -(3 sqrt3/2) dOmega/dh`` by a central difference.

    ``spectral`` evaluates ``Omega`` on Bloch band structures at rational
    fluxes with denominators at most ``q_max`` (Farey neighbours of ``h/2pi``
    when ``dh`` is None) and divides by their actual spacing.
    """
    if method == "sawtooth":
        return sawtooth_magnetization(d if d is not None else IdentityDiscriminant(), mu, h, area=area)
    if method not in METHODS:
        raise DomainError(f"unknown magnetization method {method!r}")
    eta = eta or EtaWindow.build(d, delta)
    _check_window(eta, mu)
    if method == "landau-sum":
        if dh is None or not 0 < dh < h:
            raise DomainError("landau-sum magnetization needs 0 < dh < h")
        lo, hi = _ladder(eta, h - dh, area), _ladder(eta, h + dh, area)
        om_lo = grand_potential(lo, mu, beta, eta)
        om_hi = grand_potential(hi, mu, beta, eta)
        m = -M_PREFACTOR * (om_hi - om_lo) / (2.0 * dh)
        _noise_warning(max(abs(om_lo), abs(om_hi)), 1e-12 * hi.weight * len(hi.levels), dh, m)
        return float(m)
    a_lo, a_hi = flux_pair(h, dh, q_max)
    om = []
    for a in (a_lo, a_hi):
        b = band_structure(flux_of(a), n)
        om.append(grand_potential(b, mu, beta, eta))
    spacing = 2.0 * math.pi * float(a_hi - a_lo)
    return float(-M_PREFACTOR * (om[1] - om[0]) / spacing)


def sawtooth(y):
    """``sigma(y) = y - floor(y) - 1/2``."""
    y = np.asarray(y, dtype=float)
    return y - np.floor(y) - 0.5


def g_and_slope(d: Discriminant, mu: float, area: AreaFunction | None = None):
    """``g(mu) = F0(Delta(mu)^2)`` and ``g'(mu)``."""
    area = area or default_area()
    delta, dprime = d(mu)
    if abs(delta) > 1.0:
        raise DomainError(f"mu={mu} is outside the bands (|Delta| > 1)")
    s = delta * delta
    return float(area(s)), float(area.derivative(s) * 2.0 * delta * dprime)


def sawtooth_magnetization(d: Discriminant, mu: float, h, area: AreaFunction | None = None):
    """Leading sawtooth term ``sigma(g/h) g / (pi g')``; vectorized over ``h``."""
    g, gp = g_and_slope(d, mu, area)
    if gp == 0.0:
        raise DomainError("g'(mu) = 0: mu sits at the Dirac energy, sawtooth is degenerate")
    out = sawtooth(g / np.asarray(h, dtype=float)) * g / (math.pi * gp)
    return float(out) if np.ndim(out) == 0 else out


def sawtooth_zero_crossings(d: Discriminant, mu: float, inv_h_range, n_grid: int = 4001,
                            area: AreaFunction | None = None) -> np.ndarray:
    """Continuous zero crossings of ``M_inf`` as a function of ``1/h``.

    Jumps (where ``g/h`` is an integer) also flip the sign and are skipped:
    a crossing is kept only where ``|M_inf|`` is small on both sides.
    """
    lo, hi = map(float, inv_h_range)
    g, gp = g_and_slope(d, mu, area)
    amp = abs(g / (math.pi * gp))
    u = np.linspace(lo, hi, n_grid)
    m = sawtooth_magnetization(d, mu, 1.0 / u, area)
    roots = []
    for i in np.nonzero(np.sign(m[:-1]) * np.sign(m[1:]) < 0)[0]:
        if max(abs(m[i]), abs(m[i + 1])) > 0.25 * amp:
            continue
        roots.append(brentq(lambda v: sawtooth_magnetization(d, mu, 1.0 / v, area), u[i], u[i + 1],
                            xtol=1e-14, rtol=1e-15))
    return np.array(roots)


@dataclass
class MagnetizationCurve:
    h: np.ndarray
    M: np.ndarray
    mu: float
    beta: float
    method: str
    meta: dict = field(default_factory=dict)

    def rows(self):
        for hv, mv in zip(self.h, self.M):
            yield {"h": float(hv), "M": float(mv), "method": self.method,
                   "mu": self.mu, "beta": self.beta}


def magnetization_curve(mu: float, hs, method: str = "sawtooth", d: Discriminant | None = None,
                        beta: float = math.inf, dh: float | None = 1e-6,
                        delta: float = DEFAULT_DELTA, n: int = 12, q_max: int = 200) -> MagnetizationCurve:
    hs = np.asarray(hs, dtype=float)
    d = d if d is not None else IdentityDiscriminant()
    meta = {"dh": dh, "delta": delta, "grid": n, "q_max": q_max}
    if method == "sawtooth":
        return MagnetizationCurve(hs, sawtooth_magnetization(d, mu, hs), mu, beta, method, meta)
    eta = EtaWindow.build(d, delta)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        m = np.array([magnetization(mu, h, dh, beta, method, eta=eta, n=n, q_max=q_max) for h in hs])
    meta["warnings"] = sorted({str(w.message) for w in caught})
    return MagnetizationCurve(hs, m, mu, beta, method, meta)
