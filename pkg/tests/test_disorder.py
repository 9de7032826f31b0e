import numpy as np
import pytest

from hexflux.disorder import (MAX_L, disordered_spectrum, folded_bloch_eigenvalues, gap_persistence,
                              hamiltonian, hopping_block, ipr, point_set, sample_disorder)
from hexflux.errors import ConfigError, DomainError
from hexflux.intervals import hausdorff_distance
from hexflux.lattice import Flux


def test_field_support_and_determinism():
    a = sample_disorder(12, seed=3)
    b = sample_disorder(12, seed=3)
    np.testing.assert_array_equal(a.v1, b.v1)
    assert a.sup_norm <= 1.0
    c = sample_disorder(12, seed=4)
    assert not np.array_equal(a.v1, c.v1)


def test_field_is_independent_of_L():
    small = sample_disorder(8, seed=7)
    big = sample_disorder(16, seed=7)
    np.testing.assert_array_equal(small.v1, big.v1[:8, :8])
    np.testing.assert_array_equal(small.v2, big.v2[:8, :8])


def test_uniform_mean_and_bernoulli_values():
    s = sample_disorder(64, seed=11)
    vals = np.concatenate([s.v1.ravel(), s.v2.ravel()])
    assert abs(vals.mean()) < 3 * np.sqrt(1 / 3 / vals.size)
    b = sample_disorder(8, "bernoulli", seed=1)
    assert set(np.unique(b.v1)) <= {-1.0, 1.0}


def test_sample_validation():
    with pytest.raises(ConfigError):
        sample_disorder(8, "gaussian")
    with pytest.raises(DomainError):
        sample_disorder(3)
    with pytest.raises(DomainError):
        sample_disorder(8, kappa=-0.1)
    with pytest.raises(DomainError):
        hopping_block(10, Flux(1, 3))


def test_dense_size_guard():
    s = sample_disorder(MAX_L + 1, seed=0)
    with pytest.raises(DomainError, match="GiB"):
        hamiltonian(s)


def test_magnetic_commutation():
    # tau1 tau0 = e^{ih} tau0 tau1 on the torus when q | L
    f, L = Flux(1, 3), 6
    t = hopping_block(L, f)
    idx = np.arange(L * L).reshape(L, L)
    tau0 = np.zeros_like(t)
    tau0[idx.ravel(), np.roll(idx, 1, axis=0).ravel()] = 1.0
    tau1 = t - np.eye(L * L) - tau0
    np.testing.assert_allclose(tau1 @ tau0, np.exp(1j * f.h) * tau0 @ tau1, atol=1e-13)


@pytest.mark.parametrize("p,q,L", [(0, 1, 12), (1, 3, 12), (1, 2, 8)])
def test_clean_limit_is_bloch_folding(p, q, L):
    s = sample_disorder(L, flux=Flux(p, q), kappa=0.0)
    np.testing.assert_allclose(disordered_spectrum(s), folded_bloch_eigenvalues(Flux(p, q), L), atol=1e-10)


def test_chirality_broken_by_disorder():
    clean = disordered_spectrum(sample_disorder(8, flux=Flux(1, 2)))
    np.testing.assert_allclose(clean, -clean[::-1], atol=1e-12)
    dirty = disordered_spectrum(sample_disorder(8, flux=Flux(1, 2), kappa=0.3, seed=2))
    assert np.abs(dirty + dirty[::-1]).max() > 1e-3


@pytest.mark.parametrize("kappa", [0.1, 0.4])
def test_weyl_bound(kappa):
    f, L = Flux(1, 3), 12
    clean = disordered_spectrum(sample_disorder(L, flux=f))
    dirty = disordered_spectrum(sample_disorder(L, flux=f, kappa=kappa, seed=5))
    assert np.abs(dirty - clean).max() <= kappa / 3 + 1e-12
    d = hausdorff_distance(point_set(dirty), point_set(clean))
    assert d <= kappa / 3 + 1e-12


def test_ipr_examples():
    assert ipr(np.ones(16) / 4) == pytest.approx(1 / 16)
    e = np.zeros(5)
    e[2] = 1.0
    assert ipr(e) == 1.0
    with pytest.warns(UserWarning):
        assert ipr(2 * e) == 1.0
    with pytest.raises(DomainError):
        ipr(np.zeros(3))


def test_plane_wave_ipr():
    L = 12
    k1, k2 = 2 * np.pi * 1 / L, 2 * np.pi * 5 / L
    x, y = np.meshgrid(np.arange(L), np.arange(L), indexing="ij")
    u = np.exp(1j * (k1 * x + k2 * y)).ravel()
    tau = 1 + np.exp(-1j * k1) + np.exp(-1j * k2)
    psi = np.concatenate([u, np.conj(tau) / abs(tau) * u]) / np.sqrt(2 * L * L)
    h = hamiltonian(sample_disorder(L))
    np.testing.assert_allclose(h @ psi, abs(tau) / 3 * psi, atol=1e-13)
    assert ipr(psi) == pytest.approx(1 / (2 * L * L))


def test_gap_persistence_small():
    rep = gap_persistence(Flux(1, 3), 0.1, [0, 1], 12)
    assert rep.violations == 0
    assert len(rep.rows) == 2 * 2 * 144
    assert all(d <= 0.1 / 3 + 1e-12 for d in rep.hausdorff)
    assert len(rep.gaps) == 4
    clean = gap_persistence(Flux(1, 3), 0.0, [0], 12)
    assert clean.hausdorff[0] == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(ConfigError):
        gap_persistence(Flux(1, 3), 0.6, [0], 12)
