"""Quantum-graph side: edge discriminant, Dirichlet levels and spectral pullback.

For a symmetric edge potential ``V`` the magnetic quantum-graph Hamiltonian has
continuous spectrum ``Delta^{-1}(spec t^h)`` where ``Delta(lam) = y_lam(1)``
and ``y_lam`` solves ``-y'' + V y = lam y`` with ``y(0) = 1, y'(0) = 0``.
The Dirichlet eigenvalues of a single edge are infinitely degenerate flat
levels. The graph Laplacian itself is never assembled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator
from scipy.optimize import brentq

from .errors import ConfigError, DomainError, NumericContractError
from .intervals import IntervalSet
from .lattice import Flux, spectrum

RTOL = 1e-10
ATOL = 1e-12
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class EdgePotential:
    """Edge potential ``V(x)`` on ``[0, 1]``, symmetric about ``x = 1/2``."""

    kind: str
    params: dict = field(default_factory=dict)
    func: Callable = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        xs = np.linspace(0.0, 1.0, 1001)
        v = np.asarray(self(xs), dtype=float)
        if np.abs(v - v[::-1]).max() > SYMMETRY_TOL * max(1.0, np.abs(v).max()):
            raise DomainError(f"potential {self.kind} is not symmetric about the edge centre")

    def __call__(self, x):
        if self.func is None:
            return np.zeros_like(np.asarray(x, dtype=float))
        return self.func(x)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    @classmethod
    def zero(cls) -> "EdgePotential":
        return cls("zero", {})

    @classmethod
    def mathieu(cls, amplitude: float = 20.0, frequency: int = 1) -> "EdgePotential":
        a, f = float(amplitude), frequency
        if float(f) != int(f):
            raise DomainError("Mathieu frequency must be an integer for a symmetric edge potential")
        f = int(f)
        return cls("mathieu", {"amplitude": a, "frequency": f},
                   lambda x: a * np.cos(2.0 * math.pi * f * np.asarray(x, dtype=float)))

    @classmethod
    def table(cls, samples: Sequence[float]) -> "EdgePotential":
        """Samples on ``[0, 1/2]`` at equal spacing, mirrored onto ``[1/2, 1]``."""
        vals = np.asarray(samples, dtype=float)
        if vals.size < 2:
            raise ConfigError("table potential needs at least two samples")
        interp = PchipInterpolator(np.linspace(0.0, 0.5, vals.size), vals)

        def func(x):
            x = np.asarray(x, dtype=float)
            return interp(np.minimum(x, 1.0 - x))

        return cls("table", {"samples": vals.tolist()}, func)

    @classmethod
    def from_spec(cls, spec) -> "EdgePotential":
        """Build from a config dict or a ``"kind[:amplitude]"`` string."""
        if spec is None:
            return cls.zero()
        if isinstance(spec, str):
            kind, _, arg = spec.partition(":")
            spec = {"type": kind}
            if arg:
                spec["amplitude"] = float(arg)
        kind = spec.get("type")
        if kind == "zero":
            return cls.zero()
        if kind == "mathieu":
            return cls.mathieu(spec.get("amplitude", 20.0), spec.get("frequency", 1))
        if kind == "table":
            return cls.table(spec["samples"])
        raise ConfigError(f"unknown potential type {kind!r}")

    def to_spec(self) -> dict:
        return {"type": self.kind, **self.params}


def _integrate(potential: EdgePotential, lam: np.ndarray, y0: float, dy0: float,
               rtol: float, atol: float) -> np.ndarray:
    """Solve the edge ODE and its lambda-variation for every entry of ``lam``.

    Returns ``(y(1), dy/dlam(1))`` as an array of shape ``(2, n)``.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    n = lam.size
    state0 = np.zeros((4, n))
    state0[0] = y0
    state0[1] = dy0

    def rhs(x, s):
        y, yp, w, wp = s.reshape(4, n)
        c = potential(x) - lam
        return np.concatenate([yp, c * y, wp, c * w - y])

    sol = solve_ivp(rhs, (0.0, 1.0), state0.ravel(), method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise NumericContractError(f"edge ODE integration failed: {sol.message}")
    end = sol.y[:, -1].reshape(4, n)
    return np.stack([end[0], end[2]])


class Discriminant:
    """Evaluator for ``Delta(lam)`` and ``Delta'(lam)`` of a symmetric edge potential."""

    def __init__(self, potential: EdgePotential | None = None, rtol: float = RTOL, atol: float = ATOL):
        self.potential = potential if potential is not None else EdgePotential.zero()
        self.rtol = rtol
        self.atol = atol

    def __call__(self, lam):
        """Return ``(Delta, Delta')``, scalars for scalar input."""
        out = _integrate(self.potential, lam, 1.0, 0.0, self.rtol, self.atol)
        if np.ndim(lam) == 0:
            return float(out[0, 0]), float(out[1, 0])
        return out[0], out[1]

    def value(self, lam):
        return self(lam)[0]

    def derivative(self, lam):
        return self(lam)[1]

    def dirichlet_value(self, lam):
        """``u_lam(1)`` for ``u(0) = 0, u'(0) = 1`` and its lambda-derivative."""
        out = _integrate(self.potential, lam, 0.0, 1.0, self.rtol, self.atol)
        if np.ndim(lam) == 0:
            return float(out[0, 0]), float(out[1, 0])
        return out[0], out[1]

    # -- branch structure -------------------------------------------------

    def critical_points(self, window: Sequence[float], n_grid: int = 2001) -> np.ndarray:
        """Zeros of ``Delta'`` strictly inside ``window``."""
        lo, hi = map(float, window)
        grid = np.linspace(lo, hi, n_grid)
        dp = self.derivative(grid)
        roots = []
        for i in np.nonzero(np.sign(dp[:-1]) * np.sign(dp[1:]) < 0)[0]:
            roots.append(brentq(lambda x: self.derivative(x), grid[i], grid[i + 1], xtol=1e-13))
        roots += [float(x) for x in grid[1:-1][dp[1:-1] == 0.0]]
        return np.array(sorted(roots))

    def branches(self, window: Sequence[float]) -> list[tuple[float, float]]:
        lo, hi = map(float, window)
        cuts = [lo, *self.critical_points(window), hi]
        return [(a, b) for a, b in zip(cuts[:-1], cuts[1:]) if b > a]

    def invert(self, values, branch: Sequence[float], xtol: float = 1e-13, max_iter: int = 80):
        """Solve ``Delta(x) = v`` on a monotone branch, vectorized over ``values``.

        Values outside the branch image raise :class:`DomainError`. Safeguarded
        Newton iteration inside a shrinking bracket.
        """
        a, b = map(float, branch)
        values = np.atleast_1d(np.asarray(values, dtype=float))
        da, db = self.value(np.array([a, b]))
        lo_img, hi_img = min(da, db), max(da, db)
        if np.any(values < lo_img - 1e-14) or np.any(values > hi_img + 1e-14):
            raise DomainError("value outside the image of the branch")
        increasing = db > da
        left = np.full(values.shape, a)
        right = np.full(values.shape, b)
        x = a + (b - a) * ((values - da) / (db - da) if db != da else 0.5)
        x = np.clip(x, a, b)
        # endpoint targets are returned exactly
        at_a = np.abs(values - da) <= 1e-15
        at_b = np.abs(values - db) <= 1e-15
        done = at_a | at_b
        x[at_a], x[at_b] = a, b
        for _ in range(max_iter):
            act = ~done
            if not act.any():
                break
            fx, fpx = self(x[act])
            r = fx - values[act]
            # maintain bracket: sign(r) tells which side the root is on
            above = (r > 0) == increasing
            ra, rb = left[act], right[act]
            rb = np.where(above, x[act], rb)
            ra = np.where(above, ra, x[act])
            with np.errstate(divide="ignore", invalid="ignore"):
                xn = x[act] - r / fpx
            bad = ~np.isfinite(xn) | (xn <= ra) | (xn >= rb)
            xn = np.where(bad, 0.5 * (ra + rb), xn)
            conv = (np.abs(xn - x[act]) <= xtol) | (rb - ra <= xtol) | (r == 0)
            left[act], right[act] = ra, rb
            x[act] = xn
            idx = np.nonzero(act)[0]
            done[idx[conv]] = True
        if not done.all():
            raise NumericContractError("discriminant inversion did not converge")
        return x

    def inverse_table(self, x_lo: float, x_hi: float, n: int = 513):
        """Hermite interpolant of ``Delta^{-1}`` on a monotone piece ``[x_lo, x_hi]``.

        Uses ``dx/dDelta = 1/Delta'`` at Chebyshev nodes; cheap enough for
        millions of band energies. ``Delta'`` must not vanish on the piece.
        """
        t = 0.5 * (1.0 - np.cos(np.linspace(0.0, np.pi, n)))
        x = x_lo + (x_hi - x_lo) * t
        v, dv = self(x)
        if np.any(dv == 0.0) or not (np.all(np.diff(v) > 0) or np.all(np.diff(v) < 0)):
            raise DomainError("inverse_table needs a strictly monotone piece")
        order = np.argsort(v)
        return CubicHermiteSpline(v[order], x[order], 1.0 / dv[order], extrapolate=False)

    def dirac_energies(self, window: Sequence[float]) -> np.ndarray:
        """Zeros of ``Delta`` in ``window`` (preimages of the Dirac energy 0)."""
        roots = []
        for a, b in self.branches(window):
            da, db = self.value(np.array([a, b]))
            if min(da, db) <= 0.0 <= max(da, db):
                roots.append(float(self.invert([0.0], (a, b))[0]))
        return np.unique(np.array(roots))

    def branch_around(self, z: float, window: Sequence[float]) -> tuple[float, float]:
        for a, b in self.branches(window):
            if a <= z <= b:
                return (a, b)
        raise DomainError(f"{z} is not inside {tuple(window)}")


class IdentityDiscriminant(Discriminant):
    """``Delta(x) = x``: tight-binding energies read directly as energies."""

    def __init__(self):
        super().__init__(EdgePotential.zero())

    def __call__(self, lam):
        lam_arr = np.asarray(lam, dtype=float)
        if lam_arr.ndim == 0:
            return float(lam_arr), 1.0
        return lam_arr.copy(), np.ones_like(lam_arr)

    def critical_points(self, window, n_grid: int = 0) -> np.ndarray:
        return np.array([])

    def invert(self, values, branch, xtol: float = 0.0, max_iter: int = 0):
        values = np.atleast_1d(np.asarray(values, dtype=float))
        a, b = branch
        if np.any(values < a) or np.any(values > b):
            raise DomainError("value outside the branch")
        return values.copy()


def default_window(potential: EdgePotential) -> tuple[float, float]:
    """``[min V, max V + pi^2]``: holds the lowest band, hence the first Dirac energy."""
    v = np.asarray(potential(np.linspace(0.0, 1.0, 1001)), dtype=float)
    return float(v.min()), float(v.max() + math.pi ** 2)


def discriminant(potential: EdgePotential, lam):
    """``(Delta(lam), Delta'(lam))`` for a symmetric edge potential."""
    return Discriminant(potential)(lam)


# ---------------------------------------------------------------------------

def dirichlet_spectrum(potential: EdgePotential, window: Sequence[float], n_grid: int = 801):
    """Single-edge Dirichlet eigenvalues in ``window``.

    Returns ``(eigenvalues, warnings)``. A doubled scan is compared against
    the first to flag roots that a coarse grid may have missed.
    """
    d = Discriminant(potential)
    lo, hi = map(float, window)

    def scan(n):
        grid = np.linspace(lo, hi, n)
        u, _ = d.dirichlet_value(grid)
        return grid, u

    grid, u = scan(n_grid)
    roots = []
    for i in range(len(grid) - 1):
        if u[i] == 0.0:
            roots.append(float(grid[i]))
        elif u[i] * u[i + 1] < 0:
            roots.append(brentq(lambda x: d.dirichlet_value(x)[0], grid[i], grid[i + 1], xtol=1e-13))
    if u[-1] == 0.0:
        roots.append(float(grid[-1]))
    warnings = []
    grid2, u2 = scan(2 * n_grid - 1)
    count2 = int(np.sum(u2[:-1] * u2[1:] < 0) + np.sum(u2 == 0.0))
    if count2 != len(roots):
        warnings.append(f"scan refinement changed the root count ({len(roots)} -> {count2}); "
                        "window may be too coarse")
    return np.array(roots), warnings


def pullback(d: Discriminant, s: IntervalSet, window: Sequence[float], tol: float = 1e-10) -> IntervalSet:
    """``Delta^{-1}(s) ∩ window`` computed branch by branch."""
    if s and (s.hull[0] < -1.0 - 1e-12 or s.hull[1] > 1.0 + 1e-12):
        raise DomainError("pullback expects a subset of [-1, 1]")
    pieces = []
    for a, b in d.branches(window):
        da, db = d.value(np.array([a, b]))
        img_lo, img_hi = min(da, db), max(da, db)
        targets, idx = [], []
        for lo, hi in s:
            lo_c, hi_c = max(lo, img_lo), min(hi, img_hi)
            if lo_c <= hi_c:
                targets += [lo_c, hi_c]
                idx.append(len(targets) - 2)
        if not targets:
            continue
        xs = d.invert(np.array(targets), (a, b))
        for i in idx:
            x0, x1 = sorted((xs[i], xs[i + 1]))
            pieces.append((x0, x1))
    return IntervalSet.from_intervals(pieces, tol=tol, meta={"window": list(map(float, window))})


@dataclass
class GraphSpectrum:
    continuous: IntervalSet
    dirichlet: np.ndarray
    flagged: bool
    window: tuple[float, float]
    band_preimages: list = field(default_factory=list, repr=False)
    warnings: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"window": list(self.window), "continuous": self.continuous.to_json(),
                "dirichlet": [float(x) for x in self.dirichlet],
                "dirichlet_infinitely_degenerate": self.flagged, "warnings": list(self.warnings)}


def hb_spectrum(potential: EdgePotential, flux: Flux, window: Sequence[float], n: int = 24) -> GraphSpectrum:
    """Quantum-graph spectrum in ``window``: pulled-back bands plus Dirichlet levels."""
    d = Discriminant(potential)
    tb = spectrum(flux, n)
    bands = [IntervalSet.from_intervals([iv]) for iv in tb.meta["bands"]]
    pre = [pullback(d, b, window) for b in bands]
    continuous = IntervalSet.from_intervals([iv for p in pre for iv in p],
                                            meta={"p": flux.p, "q": flux.q})
    dirichlet, warns = dirichlet_spectrum(potential, window)
    return GraphSpectrum(continuous, dirichlet, not flux.is_zero, (float(window[0]), float(window[1])),
                         pre, warns + list(tb.meta.get("warnings", [])))
