"""Finite periodic samples of the disordered honeycomb operator.

Cells ``(x, y)`` of an ``L x L`` torus carry two sublattice sites. With
``(tau0 psi)(x, y) = psi(x - 1, y)`` and ``(tau1 psi)(x, y) = e^{i h x} psi(x, y - 1)``
(so ``tau1 tau0 = e^{ih} tau0 tau1``) the operator is::

    H = [[-kappa V1 / 3, T / 3], [T^* / 3, -kappa V2 / 3]],  T = 1 + tau0 + tau1.

The flux phase is ``L``-periodic only when ``q`` divides ``L``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError
from .intervals import IntervalSet, hausdorff_distance
from .lattice import TWO_PI, Flux, as_flux, positive_sheets, spectrum

DISTRIBUTIONS = ("uniform", "bernoulli")
MAX_L = 64
SUPPORT = 1.0


def _row_stream(seed: int, x: int, size: int) -> np.ndarray:
    # one Philox stream per row; counter word 1 addresses the row so rows never overlap
    bg = np.random.Philox(key=seed, counter=[0, x, 0, 0])
    return np.random.Generator(bg).random(size)


@dataclass
class DisorderSample:
    L: int
    flux: Flux
    kappa: float
    seed: int
    distribution: str
    v1: np.ndarray
    v2: np.ndarray
    boundary: str = "periodic"

    @property
    def sup_norm(self) -> float:
        return float(max(np.abs(self.v1).max(), np.abs(self.v2).max()))


def sample_disorder(L: int, distribution: str = "uniform", seed: int = 0, flux=Flux(0, 1),
                    kappa: float = 0.0) -> DisorderSample:
    """i.i.d. field ``V^{(s)}(x, y)`` with support in ``[-1, 1]``.

    The value at ``(x, y, s)`` is draw ``2y + s`` of the row-``x`` stream, so it
    does not depend on ``L`` or on evaluation order.
    """
    if L < 4:
        raise DomainError("sample_disorder needs L >= 4")
    if distribution not in DISTRIBUTIONS:
        raise ConfigError(f"unsupported distribution {distribution!r}; use one of {DISTRIBUTIONS}")
    if kappa < 0:
        raise DomainError("kappa must be nonnegative")
    if seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    flux = as_flux(flux)
    u = np.stack([_row_stream(seed, x, 2 * L) for x in range(L)]).reshape(L, L, 2)
    if distribution == "uniform":
        v = 2.0 * u - 1.0
    else:
        v = np.where(u < 0.5, -1.0, 1.0)
    return DisorderSample(L, flux, float(kappa), int(seed), distribution, v[..., 0], v[..., 1])


def hopping_block(L: int, flux: Flux) -> np.ndarray:
    """Dense ``L^2 x L^2`` matrix of ``T = 1 + tau0 + tau1``; index ``x L + y``."""
    if L % flux.q:
        raise DomainError(f"q={flux.q} must divide L={L} for periodic flux phases")
    n = L * L
    idx = np.arange(n).reshape(L, L)
    xs = np.repeat(np.arange(L), L)
    t = np.zeros((n, n), dtype=complex)
    t[np.arange(n), np.arange(n)] = 1.0
    t[idx.ravel(), np.roll(idx, 1, axis=0).ravel()] += 1.0
    t[idx.ravel(), np.roll(idx, 1, axis=1).ravel()] += np.exp(1j * flux.h * xs)
    return t


def hamiltonian(s: DisorderSample) -> np.ndarray:
    if s.L > MAX_L:
        n = 2 * s.L * s.L
        raise DomainError(f"L={s.L} exceeds the dense limit {MAX_L}: the matrix would be "
                          f"{n} x {n} ({16 * n * n / 2 ** 30:.1f} GiB complex)")
    t = hopping_block(s.L, s.flux) / 3.0
    n = s.L * s.L
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    h[:n, n:] = t
    h[n:, :n] = t.conj().T
    h[np.arange(n), np.arange(n)] = -s.kappa * s.v1.ravel() / 3.0
    h[n + np.arange(n), n + np.arange(n)] = -s.kappa * s.v2.ravel() / 3.0
    return h


def disordered_spectrum(s: DisorderSample, vectors: bool = False):
    """Sorted eigenvalues (and eigenvectors as columns if ``vectors``)."""
    h = hamiltonian(s)
    if vectors:
        return np.linalg.eigh(h)
    return np.linalg.eigvalsh(h)


def folded_bloch_eigenvalues(flux: Flux, L: int) -> np.ndarray:
    """Clean finite-torus eigenvalues from Bloch sheets on the discrete ``k`` lattice."""
    if L % flux.q:
        raise DomainError(f"q={flux.q} must divide L={L}")
    k1 = TWO_PI * np.arange(L // flux.q) / L
    k2 = TWO_PI * np.arange(L) / L
    kk1, kk2 = np.meshgrid(k1, k2, indexing="ij")
    sv = positive_sheets(flux, kk1, kk2).reshape(-1)
    return np.sort(np.concatenate([-sv, sv]))


def point_set(e) -> IntervalSet:
    return IntervalSet.from_intervals([(x, x) for x in np.asarray(e, dtype=float)])


def ipr(vector) -> float:
    """``sum |psi_i|^4`` of a normalized vector; renormalizes with a warning."""
    v = np.asarray(vector)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise DomainError("ipr of the zero vector")
    if abs(norm - 1.0) > 1e-10:
        warnings.warn(f"vector norm {norm:.6g} != 1; renormalizing")
        v = v / norm
    return float(np.sum(np.abs(v) ** 4))


@dataclass
class PersistenceReport:
    flux: Flux
    kappa: float
    L: int
    seeds: list[int]
    gaps: list[dict]
    rows: list[tuple] = field(default_factory=list)
    hausdorff: list[float] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return sum(g["intruders"] for g in self.gaps)


RUN_COLUMNS = ["energy", "ipr", "seed", "kappa", "p", "q", "L"]


def gap_persistence(flux, kappa: float, seeds, L: int, distribution: str = "uniform",
                    kappa_max: float = 0.5, n: int = 24) -> PersistenceReport:
    """Intruders in clean gaps shrunk by ``kappa ||V||/3`` and IPR contrast per gap.

    Clean gaps come from the Bloch spectrum of ``flux``; ``band`` states lie
    within ``kappa`` of a band, ``margin`` states sit inside the unshrunk gap.
    """
    flux = as_flux(flux)
    if kappa > kappa_max:
        raise ConfigError(f"kappa={kappa} exceeds kappa_max={kappa_max}")
    clean = spectrum(flux, n)
    clean_finite = point_set(folded_bloch_eigenvalues(flux, L))
    shrink = kappa * SUPPORT / 3.0
    gaps = [{"gap_lo": lo, "gap_hi": hi, "shrunk_lo": lo + shrink, "shrunk_hi": hi - shrink,
             "intruders": 0, "margin_ipr": [], "band_ipr": []} for lo, hi in clean.gaps()]
    rows, dists = [], []
    for seed in seeds:
        s = sample_disorder(L, distribution, seed, flux, kappa)
        e, vec = disordered_spectrum(s, vectors=True)
        iprs = np.sum(np.abs(vec) ** 4, axis=0)
        dists.append(hausdorff_distance(point_set(e), clean_finite))
        rows.extend((float(x), float(r), seed, kappa, flux.p, flux.q, L) for x, r in zip(e, iprs))
        band_mask = clean.distance(e) <= kappa
        for g in gaps:
            inside = (e > g["gap_lo"]) & (e < g["gap_hi"])
            g["intruders"] += int(np.sum((e > g["shrunk_lo"]) & (e < g["shrunk_hi"])))
            g["margin_ipr"].extend(iprs[inside].tolist())
            near = band_mask & ((np.abs(e - g["gap_lo"]) <= kappa) | (np.abs(e - g["gap_hi"]) <= kappa))
            g["band_ipr"].extend(iprs[near & ~inside].tolist())
    for g in gaps:
        m, b = g.pop("margin_ipr"), g.pop("band_ipr")
        g["n_margin"] = len(m)
        g["median_ipr_margin"] = float(np.median(m)) if m else None
        g["median_ipr_band"] = float(np.median(b)) if b else None
    return PersistenceReport(flux, kappa, L, list(seeds), gaps, rows, dists)
