import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hexflux.errors import DomainError
from hexflux.graph import Discriminant, IdentityDiscriminant
from hexflux.magnetics import (M_PREFACTOR, EtaWindow, bump, f_beta, g_and_slope, grand_potential,
                               magnetization, magnetization_curve, sawtooth,
                               sawtooth_magnetization, sawtooth_zero_crossings)
from hexflux.semiclassics import LandauLadder, default_area, landau_levels


def test_f_beta_limits():
    x = np.array([-1.0, -0.1, 0.0, 0.2, 1.0])
    np.testing.assert_array_equal(f_beta(x), [0.0, 0.0, 0.0, -0.2, -1.0])
    np.testing.assert_allclose(f_beta(x, 1e6), f_beta(x), atol=1e-6)
    with pytest.raises(DomainError):
        f_beta(x, 0.0)


@given(st.floats(-3, 3), st.floats(0.1, 100), st.floats(1, 10))
def test_f_beta_monotone(x, beta, factor):
    assert f_beta(x, beta) <= f_beta(x, beta * factor) + 1e-15
    assert f_beta(x, beta * factor) <= f_beta(x) + 1e-15
    assert f_beta(x + 0.1, beta) <= f_beta(x, beta)


def test_bump_profile():
    u = np.linspace(-1.5, 1.5, 601)
    b = bump(u)
    assert np.all((b >= 0) & (b <= 1))
    assert np.all(b[np.abs(u) <= 0.5] == 1.0)
    assert np.all(b[np.abs(u) >= 1.0] == 0.0)
    np.testing.assert_allclose(b, b[::-1], atol=1e-14)


def test_eta_window():
    eta = EtaWindow.build(Discriminant(), 1 / 3)
    assert eta.z_dirac == pytest.approx(math.pi ** 2 / 4)
    assert eta(eta.z_dirac) == 1.0
    assert eta(eta.x_lo - 0.1) == 0.0
    with pytest.raises(DomainError):
        EtaWindow.build(delta=1.5)


def test_grand_potential_single_level():
    eta = EtaWindow.build()
    ladder = LandauLadder(h=0.1, z_dirac=0.0, levels={0: 0.0})
    assert grand_potential(ladder, 0.05, eta=eta) == pytest.approx(-ladder.weight * 0.05)
    assert grand_potential(ladder, -0.05, eta=eta) == 0.0
    with pytest.raises(DomainError):
        grand_potential(ladder, 0.9, eta=eta)


def _closed_form_m(mu, h, delta):
    """``-(3 sqrt3/2) dOmega/dh`` of the truncated level sum, differentiated by hand."""
    area = default_area()
    w = 2 * h / (3 * math.sqrt(3) * math.pi)
    ladder = landau_levels(IdentityDiscriminant(), h, 200, delta=delta)
    eta = lambda z: float(bump(z / delta))  # noqa: E731
    deta = lambda z: float(bump((z + 1e-7) / delta) - bump((z - 1e-7) / delta)) / 2e-7  # noqa: E731
    total_s, total_d = 0.0, 0.0
    for n, z in ladder.levels.items():
        if z >= mu:
            continue
        total_s += eta(z) * (mu - z)
        if n == 0:
            continue
        dz = math.copysign(abs(n) / (2 * abs(z) * float(area.derivative(z * z))), n)
        total_d += (deta(z) * (mu - z) - eta(z)) * dz
    domega = -(w / h) * total_s - w * total_d
    return -M_PREFACTOR * domega


@pytest.mark.parametrize("mu,q", [(0.1, 55), (-0.12, 89), (0.2, 34)])
def test_landau_sum_matches_closed_form(mu, q):
    h = 2 * math.pi / q
    got = magnetization(mu, h, dh=1e-6)
    assert got == pytest.approx(_closed_form_m(mu, h, 1 / 3), rel=1e-5, abs=1e-9)


def test_temperature_convergence():
    h = 2 * math.pi / 55
    m_inf = magnetization(0.1, h)
    errs = [abs(magnetization(0.1, h, beta=b) - m_inf) for b in (50.0, 200.0, 800.0)]
    assert errs[0] > errs[1] > errs[2]


def test_method_validation():
    with pytest.raises(DomainError):
        magnetization(0.1, 0.1, method="bogus")
    with pytest.raises(DomainError):
        magnetization(0.1, 0.1, dh=0.2)
    with pytest.raises(DomainError):
        magnetization(0.9, 0.1)


def test_noise_floor_warning():
    with pytest.warns(UserWarning, match="noise floor"):
        magnetization(0.1, 2 * math.pi / 55, dh=1e-14)


def test_sawtooth_shape():
    np.testing.assert_allclose(sawtooth([0.0, 0.25, 0.5, 0.999999]), [-0.5, -0.25, 0.0, 0.499999])
    d = IdentityDiscriminant()
    g, gp = g_and_slope(d, 0.3)
    # zero exactly at half-integer g/h, jump of g/(pi g') at integers
    assert sawtooth_magnetization(d, 0.3, g / 4.5) == pytest.approx(0.0, abs=1e-12)
    amp = g / (math.pi * gp)
    jump = sawtooth_magnetization(d, 0.3, g / (4 + 1e-9)) - sawtooth_magnetization(d, 0.3, g / (4 - 1e-9))
    assert abs(jump) == pytest.approx(abs(amp), rel=1e-6)


def test_sawtooth_sign_change_at_crossing():
    d = IdentityDiscriminant()
    g, _ = g_and_slope(d, 0.3)
    hc = g / 5.5
    a = sawtooth_magnetization(d, 0.3, hc * (1 - 1e-4))
    b = sawtooth_magnetization(d, 0.3, hc * (1 + 1e-4))
    assert a * b < 0


def test_sawtooth_degenerate_at_dirac():
    with pytest.raises(DomainError):
        sawtooth_magnetization(IdentityDiscriminant(), 0.0, 0.1)
    with pytest.raises(DomainError):
        g_and_slope(IdentityDiscriminant(), 1.5)


@pytest.mark.parametrize("mu", [math.pi ** 2 / 4 + 0.3, math.pi ** 2 / 4 - 0.3])
def test_zero_crossings_spacing(mu):
    d = Discriminant()
    g, _ = g_and_slope(d, mu)
    roots = sawtooth_zero_crossings(d, mu, (2.0, 200.0))
    assert len(roots) > 3
    np.testing.assert_allclose(np.diff(roots), 1 / g, atol=1e-6)


def test_graph_sawtooth_asymmetric():
    d = Discriminant()
    z = math.pi ** 2 / 4
    hs = np.linspace(0.05, 0.3, 50)
    up = sawtooth_magnetization(d, z + 0.3, hs)
    down = sawtooth_magnetization(d, z - 0.3, hs)
    assert np.abs(up - down).max() > 1e-3


def test_spectral_agrees_with_landau_sum():
    # tight-binding, mu = 0.1: both methods differ by the next-order term only
    for q in (34, 55):
        h = 2 * math.pi / q
        a = magnetization(0.1, h)
        b = magnetization(0.1, h, dh=None, method="spectral")
        assert abs(a - b) <= 2e-3


def test_spectral_graph_loose_agreement():
    d = Discriminant()
    mu, h = math.pi ** 2 / 4 + 0.2, 2 * math.pi / 34
    a = magnetization(mu, h, d=d)
    b = magnetization(mu, h, dh=None, method="spectral", d=d)
    assert a * b > 0 and abs(a - b) <= 5e-3


def test_magnetization_curve_rows():
    curve = magnetization_curve(0.2, [0.05, 0.1], method="sawtooth")
    rows = list(curve.rows())
    assert rows[0]["method"] == "sawtooth" and len(rows) == 2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ls = magnetization_curve(0.2, [2 * math.pi / 55], method="landau-sum")
    assert ls.M.shape == (1,) and isinstance(ls.meta["warnings"], list)
