"""Magnetic Bloch matrices of the honeycomb tight-binding operator.

At flux ``h = 2*pi*p/q`` the operator

    t^h = 1/3 [[0, 1 + tau0 + tau1], [(1 + tau0 + tau1)^*, 0]]

is reduced by Floquet-Bloch theory to ``2q x 2q`` matrices ``[[0, D], [D^*, 0]]``
with ``D(k) = (I + e^{i k1} S + e^{i k2} Lambda) / 3``, ``S`` the cyclic shift
and ``Lambda = diag(e^{i h m})``. The eigenvalues are ``+-`` the singular
values of ``D``; computing them through an SVD keeps energies near the Dirac
point accurate to machine precision in absolute terms.

``D(k)`` is ``2*pi/q``-periodic in both quasimomenta, so grids are laid over
the reduced zone ``[0, 2*pi/q)^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidFluxError, NumericContractError
from .intervals import IntervalSet

TWO_PI = 2.0 * math.pi
HERMITIAN_TOL = 1e-12

# |dk|^2 = dk^T K_METRIC dk, the reciprocal metric scaled so that the
# zero-flux cone has the area-equivalent slope 3^(-3/4).
K_METRIC = np.array([[1.0, -0.5], [-0.5, 1.0]]) / math.sqrt(3.0)


@dataclass(frozen=True, order=True)
class Flux:
    """Rational flux ``h = 2*pi*p/q`` per hexagon, canonically reduced."""

    p: int
    q: int

    def __post_init__(self):
        if self.q < 1 or math.gcd(self.p, self.q) != 1 or not 0 <= self.p < self.q:
            raise InvalidFluxError(f"flux {self.p}/{self.q} is not in canonical form; use reduce_flux")

    @property
    def h(self) -> float:
        return TWO_PI * self.p / self.q

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.p, self.q)

    @property
    def is_zero(self) -> bool:
        return self.p == 0

    def reflected(self) -> "Flux":
        return reduce_flux(self.q - self.p, self.q)

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


def reduce_flux(p: int, q: int) -> Flux:
    """Reduce ``p/q`` to lowest terms with ``0 <= p/q < 1``."""
    if q == 0:
        raise InvalidFluxError("flux denominator must be nonzero")
    frac = Fraction(int(p), int(q))
    frac -= math.floor(frac)
    return Flux(frac.numerator, frac.denominator)


def as_flux(value) -> Flux:
    if isinstance(value, Flux):
        return value
    if isinstance(value, Fraction):
        return reduce_flux(value.numerator, value.denominator)
    if isinstance(value, tuple):
        return reduce_flux(*value)
    if isinstance(value, str):
        return as_flux(Fraction(value))
    raise InvalidFluxError(f"cannot interpret {value!r} as a rational flux")


# ---------------------------------------------------------------------------
# Bloch matrices

def bloch_block(flux: Flux, k1, k2) -> np.ndarray:
    """Off-diagonal block ``D(k)``, vectorized over broadcastable ``k1, k2``.

    Returns an array of shape ``broadcast(k1, k2).shape + (q, q)``.
    """
    q = flux.q
    k1, k2 = np.broadcast_arrays(np.asarray(k1, dtype=float), np.asarray(k2, dtype=float))
    m = np.arange(q)
    out = np.zeros(k1.shape + (q, q), dtype=complex)
    out[..., m, m] = 1.0 + np.exp(1j * (k2[..., None] + flux.h * m))
    # S e_m = e_{m+1}: entries (m+1, m)
    out[..., (m + 1) % q, m] += np.exp(1j * k1)[..., None]
    return out / 3.0


def bloch_block_alt(flux: Flux, k1, k2) -> np.ndarray:
    """Alternative gauge with the clock phases on ``tau0``: ``(I + e^{ik1} C + e^{ik2} S^{-1})/3``."""
    q = flux.q
    k1, k2 = np.broadcast_arrays(np.asarray(k1, dtype=float), np.asarray(k2, dtype=float))
    m = np.arange(q)
    out = np.zeros(k1.shape + (q, q), dtype=complex)
    out[..., m, m] = 1.0 + np.exp(1j * (k1[..., None] + flux.h * m))
    # S^{-1} e_m = e_{m-1}
    out[..., (m - 1) % q, m] += np.exp(1j * k2)[..., None]
    return out / 3.0


@dataclass(frozen=True)
class BlochMatrix:
    flux: Flux
    k: tuple[float, float]
    matrix: np.ndarray = field(repr=False)

    @property
    def block(self) -> np.ndarray:
        q = self.flux.q
        return self.matrix[:q, q:]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def build_bloch(flux: Flux, k: Sequence[float]) -> BlochMatrix:
    """Hermitian ``2q x 2q`` Bloch matrix ``[[0, D], [D^*, 0]]`` at quasimomentum ``k``."""
    k1, k2 = float(k[0]), float(k[1])
    d = bloch_block(flux, k1, k2)
    q = flux.q
    mat = np.zeros((2 * q, 2 * q), dtype=complex)
    mat[:q, q:] = d
    mat[q:, :q] = d.conj().T
    return BlochMatrix(flux, (k1, k2), mat)


def eigenvalues(m: BlochMatrix | np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian Bloch matrix.

    Chiral (block off-diagonal) input is diagonalized through the singular
    values of its block, anything else through ``eigvalsh``.
    """
    mat = m.matrix if isinstance(m, BlochMatrix) else np.asarray(m)
    scale = max(1.0, float(np.abs(mat).max()))
    if np.abs(mat - mat.conj().T).max() > HERMITIAN_TOL * scale:
        raise NumericContractError("eigenvalues: input is not Hermitian within tolerance")
    n = mat.shape[0]
    if n % 2 == 0:
        q = n // 2
        if not np.abs(mat[:q, :q]).any() and not np.abs(mat[q:, q:]).any():
            sv = np.linalg.svd(mat[:q, q:], compute_uv=False)[::-1]
            return np.concatenate([-sv[::-1], sv])
    return np.linalg.eigvalsh(mat)


def positive_sheets(flux: Flux, k1, k2) -> np.ndarray:
    """Ascending singular values of ``D(k)``: the ``q`` nonnegative energy sheets."""
    return np.linalg.svd(bloch_block(flux, k1, k2), compute_uv=False)[..., ::-1]


def jacobi_bloch(flux: Flux, k: Sequence[float]) -> np.ndarray:
    """q-periodic Jacobi matrix on the Bloch fiber at ``k``.

    Diagonal ``2 cos(k2 + m h)``, hopping ``1 + e^{i(k2 + m h)}`` from ``m`` to
    ``m + 1`` with the wraparound hop carrying ``e^{-i q k1}``. With this
    phase ``spec J(k) = spec(9 D(k) D(k)^* - 3)`` at every ``k``.
    """
    q, h = flux.q, flux.h
    k1, k2 = float(k[0]), float(k[1])
    m = np.arange(q)
    hop = 1.0 + np.exp(1j * (k2 + m * h))
    hop[q - 1] *= np.exp(-1j * q * k1)
    t = np.zeros((q, q), dtype=complex)
    np.add.at(t, (m, (m + 1) % q), hop)
    return np.diag(2.0 * np.cos(k2 + m * h)).astype(complex) + t + t.conj().T


# ---------------------------------------------------------------------------
# Band structures and spectra

def reduced_grid(flux: Flux, n1: int, n2: int | None = None, offset: float = 0.0):
    n2 = n1 if n2 is None else n2
    period = TWO_PI / flux.q
    k1 = period * (np.arange(n1) + offset) / n1
    k2 = period * (np.arange(n2) + offset) / n2
    return k1, k2


@dataclass
class BandStructure:
    """Energy sheets on a regular grid over the reduced zone.

    ``energies[i1, i2, j]`` is the j-th ascending eigenvalue at ``(k1[i1], k2[i2])``.
    """

    flux: Flux
    k1: np.ndarray
    k2: np.ndarray
    energies: np.ndarray = field(repr=False)

    @property
    def n_bands(self) -> int:
        return self.energies.shape[-1]

    @property
    def grid_shape(self) -> tuple[int, int]:
        return self.energies.shape[:2]

    def sheet(self, j: int) -> np.ndarray:
        return self.energies[..., j]

    def flat(self) -> np.ndarray:
        return self.energies.reshape(-1, self.n_bands)


def band_structure(flux: Flux, n1: int, n2: int | None = None, offset: float = 0.0) -> BandStructure:
    n2 = n1 if n2 is None else n2
    if n1 < 3 or n2 < 3:
        raise ValueError("band_structure needs at least 3 points per direction")
    k1, k2 = reduced_grid(flux, n1, n2, offset)
    sv = positive_sheets(flux, k1[:, None], k2[None, :])
    energies = np.concatenate([-sv[..., ::-1], sv], axis=-1)
    return BandStructure(flux, k1, k2, energies)


class _SheetCache:
    """Memoized positive sheets at single quasimomenta, evaluated in batches."""

    def __init__(self, flux: Flux):
        self.flux = flux
        self.store: dict[tuple[float, float], np.ndarray] = {}

    def fill(self, points) -> None:
        todo = sorted({(float(a), float(b)) for a, b in points} - self.store.keys())
        if todo:
            arr = np.array(todo)
            vals = positive_sheets(self.flux, arr[:, 0], arr[:, 1])
            self.store.update(zip(todo, vals))

    def __getitem__(self, k) -> np.ndarray:
        return self.store[(float(k[0]), float(k[1]))]


_STENCIL = np.array([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1], [1, -1], [-1, 1]], dtype=float)


def _pattern_refine(cache: _SheetCache, tasks, step: float, tol: float, min_step: float = 1e-13,
                    max_iter: int = 400):
    """Joint compass search for local extrema of several sheets.

    ``tasks`` holds ``(j, sign, k0)`` triples; each minimizes ``sign * sheet_j``.
    A task stops once its centre beats every stencil neighbour and the
    stencil spread is below ``tol``. The search only compares values, so
    sheets that are monotone functions of one another walk identical paths
    and share cached evaluations. Returns ``[(value, converged, spread)]``.
    """
    centers = [np.asarray(k0, dtype=float) for _, _, k0 in tasks]
    steps = [step] * len(tasks)
    active = list(range(len(tasks)))
    results: list = [None] * len(tasks)
    cache.fill(centers)
    for _ in range(max_iter):
        if not active:
            break
        cache.fill([centers[t] + steps[t] * d for t in active for d in _STENCIL])
        still = []
        for t in active:
            j, sign, _ = tasks[t]
            fc = sign * cache[centers[t]][j]
            nbrs = [centers[t] + steps[t] * d for d in _STENCIL]
            vals = np.array([sign * cache[x][j] for x in nbrs])
            best = int(np.argmin(vals))
            if vals[best] < fc:
                centers[t] = nbrs[best]
                still.append(t)
                continue
            spread = float(vals.max() - fc)
            if spread <= tol or steps[t] < min_step:
                results[t] = (sign * fc, True, spread)
            else:
                steps[t] *= 0.5
                still.append(t)
        active = still
    for t in active:
        j, sign, _ = tasks[t]
        nbrs = [centers[t] + steps[t] * d for d in _STENCIL]
        spread = float(np.ptp([cache[x][j] for x in nbrs]))
        results[t] = (cache[centers[t]][j], False, spread)
    return results


def band_edges(flux: Flux, n: int = 24, refine_tol: float = 1e-9, offset: float = 0.0):
    """Per-band ``[min_k E_j, max_k E_j]`` for all ``2q`` bands, ascending.

    Grid scan over the reduced zone followed by a local refinement of each
    extremum. Returns ``(edges, warnings)`` with ``edges`` of shape ``(2q, 2)``.
    """
    if n < 8:
        raise ValueError("spectrum scan needs n >= 8")
    k1, k2 = reduced_grid(flux, n, n, offset)
    sv = positive_sheets(flux, k1[:, None], k2[None, :]).reshape(n * n, flux.q)
    kk = np.stack(np.meshgrid(k1, k2, indexing="ij"), axis=-1).reshape(n * n, 2)
    cache = _SheetCache(flux)
    tasks, slots = [], []
    for j in range(flux.q):
        tasks.append((j, 1.0, kk[np.argmin(sv[:, j])]))
        slots.append((j, 0))
        tasks.append((j, -1.0, kk[np.argmax(sv[:, j])]))
        slots.append((j, 1))
    refined = _pattern_refine(cache, tasks, 0.5 * (k1[1] - k1[0]), refine_tol)
    warnings: list[str] = []
    pos = np.empty((flux.q, 2))
    pos[:, 0] = sv.min(axis=0)
    pos[:, 1] = sv.max(axis=0)
    for (j, col), (val, ok, spread) in zip(slots, refined):
        if col == 0:
            pos[j, 0] = min(pos[j, 0], val) - (0.0 if ok else spread)
        else:
            pos[j, 1] = max(pos[j, 1], val) + (0.0 if ok else spread)
        if not ok:
            warnings.append(f"band {j} {('min', 'max')[col]}: refinement did not converge, "
                            f"widened by {spread:.3g}")
    pos[:, 0] = np.maximum(pos[:, 0], 0.0)
    edges = np.concatenate([-pos[::-1, ::-1], pos], axis=0)
    return edges, warnings


def spectrum(flux: Flux, n: int = 24, refine_tol: float = 1e-9, offset: float = 0.0) -> IntervalSet:
    """Spectrum of ``t^h`` at rational flux as a merged :class:`IntervalSet`.

    ``meta['bands']`` keeps the unmerged per-band intervals.
    """
    edges, warnings = _cached_edges(flux, n, refine_tol, offset)
    meta = {"p": flux.p, "q": flux.q, "grid": n, "refine_tol": refine_tol,
            "offset": offset, "bands": [list(e) for e in edges], "warnings": list(warnings)}
    return IntervalSet.from_intervals(edges, meta=meta)


@lru_cache(maxsize=512)
def _cached_edges(flux: Flux, n: int, refine_tol: float, offset: float):
    # sweeps (Streda pairs, Hall maps) revisit the same fluxes
    edges, warnings = band_edges(flux, n, refine_tol, offset)
    return tuple(map(tuple, edges.tolist())), tuple(warnings)


# ---------------------------------------------------------------------------
# Dirac points

@dataclass
class DiracReport:
    flux: Flux
    k_star: tuple[float, float]
    gap: float
    v_fit: float
    fit_residual: float
    anisotropy: float
    v_formula: float
    found: bool
    message: str = ""


def _metric_directions(n_dirs: int) -> np.ndarray:
    """Unit vectors in the ``K_METRIC`` norm, in (k1, k2) coordinates."""
    chol = np.linalg.cholesky(K_METRIC)
    theta = TWO_PI * np.arange(n_dirs) / n_dirs
    u = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    return np.linalg.solve(chol.T, u.T).T


def k_norm(dk) -> np.ndarray:
    dk = np.asarray(dk, dtype=float)
    return np.sqrt(np.einsum("...i,ij,...j->...", dk, K_METRIC, dk))


def v_formula_value(flux: Flux, k: Sequence[float]) -> float:
    """Literal product formula ``3^{3/4} q (3^{q-1} prod_{j=q+2}^{2q} t_j)^{-1}``.

    ``t_j`` are the ascending Bloch eigenvalues at ``k``, 1-indexed. The
    product is empty for ``q = 1``.
    """
    q = flux.q
    ev = eigenvalues(build_bloch(flux, k))
    prod = float(np.prod(ev[q + 1:2 * q]))
    return 3.0 ** 0.75 * q / (3.0 ** (q - 1) * prod)


def dirac_check(flux: Flux, n: int = 48, radii: Sequence[float] = (0.02, 0.04, 0.08),
                tol: float = 1e-8, n_dirs: int = 16) -> DiracReport:
    """Locate the zero-energy touching point and measure its cone slope.

    ``v_fit`` is the least-squares slope through the origin of the
    ring-averaged lowest positive energy against ``|dk|`` (norm from
    ``K_METRIC``). ``fit_residual`` is the largest relative deviation of the
    ring averages from the fitted line; ``anisotropy`` is the largest relative
    spread inside a ring (trigonal warping), reported but not part of the fit.
    """
    if n < 32:
        raise ValueError("dirac_check needs n >= 32")
    k1, k2 = reduced_grid(flux, n, n)
    sv0 = positive_sheets(flux, k1[:, None], k2[None, :])[..., 0]
    i1, i2 = np.unravel_index(np.argmin(sv0), sv0.shape)
    k0 = np.array([k1[i1], k2[i2]])
    step = 0.5 * (k1[1] - k1[0])
    simplex = np.array([k0, k0 + [step, 0.0], k0 + [0.0, step]])
    res = minimize(lambda k: positive_sheets(flux, k[0], k[1])[0], k0, method="Nelder-Mead",
                   options={"xatol": 1e-14, "fatol": 1e-16, "initial_simplex": simplex,
                            "maxiter": 4000, "maxfev": 8000})
    if res.fun <= sv0[i1, i2]:
        k_star, gap = np.asarray(res.x, dtype=float), float(res.fun)
    else:
        k_star, gap = k0, float(sv0[i1, i2])

    radii = np.asarray(radii, dtype=float)
    dirs = _metric_directions(n_dirs)
    dk = radii[:, None, None] * dirs[None, :, :]
    pts = k_star + dk
    e = positive_sheets(flux, pts[..., 0], pts[..., 1])[..., 0]
    ring = e.mean(axis=1)
    v_fit = float(np.dot(ring, radii) / np.dot(radii, radii))
    residual = float(np.max(np.abs(ring - v_fit * radii) / (v_fit * radii)))
    anisotropy = float(np.max(np.ptp(e, axis=1) / ring))

    found = gap < tol
    msg = "" if found else "no Dirac point found at this resolution"
    return DiracReport(flux, (float(k_star[0]), float(k_star[1])), gap, v_fit, residual,
                       anisotropy, v_formula_value(flux, k_star), found, msg)
