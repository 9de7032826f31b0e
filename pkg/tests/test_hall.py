import math

import pytest
from hypothesis import given, strategies as st

from hexflux.dos import ids
from hexflux.errors import DomainError, GapTrackingError, NotInGapError
from hexflux.hall import canonical_label, gap_label, hall_map, streda
from hexflux.lattice import Flux, spectrum


def test_canonical_label_examples():
    assert canonical_label(1, 3, 3) == (1, 0)
    assert canonical_label(1, 3, 1) == (0, 1)
    assert canonical_label(1, 3, 2) == (1, -1)
    assert canonical_label(1, 2, 1) == (0, 1)  # tie resolved to the positive side
    assert canonical_label(0, 1, 2) == (2, 0)


@given(st.integers(2, 80).flatmap(
    lambda q: st.tuples(st.integers(1, q - 1).filter(lambda p: math.gcd(p, q) == 1), st.just(q))),
       st.integers(-200, 200))
def test_canonical_label_properties(pq, j):
    p, q = pq
    g1, g2 = canonical_label(p, q, j)
    assert g1 * q + g2 * p == j
    assert -q / 2 < g2 <= q / 2


def test_gap_label_and_trace_identity():
    f = Flux(1, 3)
    spec = spectrum(f)
    for lo, hi in spec.gaps():
        mu = 0.5 * (lo + hi)
        lab = gap_label(f, mu, spec=spec)
        assert lab.trace == pytest.approx(ids(f, mu, spec=spec), abs=1e-12)
        assert lab.gap == (lo, hi)
    top = gap_label(f, 0.95, spec=spec)
    assert (top.j, top.gamma1, top.gamma2) == (3, 1, 0)
    assert top.gap[1] == math.inf
    with pytest.raises(NotInGapError):
        gap_label(f, 0.5, spec=spec)


def test_landau_gap_labels_count_bands():
    # the gap above level n at flux 1/q holds 2n + 1 bands above the Dirac energy
    f = Flux(1, 41)
    spec = spectrum(f)
    pos = [g for g in spec.gaps() if g[0] > 0][:6]
    labels = [gap_label(f, 0.5 * sum(g), spec=spec) for g in pos]
    # even j are the small gaps splitting a level into its two bands
    above = [lab for lab in labels if lab.j % 2][:3]
    assert [(lab.gamma1, lab.gamma2) for lab in above] == [(0, 1), (0, 3), (0, 5)]
    assert all(lab.gap[1] - lab.gap[0] > 1e-3 for lab in above)


def test_streda_first_gaps_at_1_13():
    f = Flux(1, 13)
    gaps = [g for g in spectrum(f).gaps() if g[0] > 0]
    first = 0.5 * sum(gaps[0])
    assert 2 * math.pi * streda(first, f.h) == pytest.approx(1.0, abs=1e-2)
    assert 2 * math.pi * streda(-first, f.h) == pytest.approx(-1.0, abs=1e-2)


def test_streda_affine_ids():
    # ids is affine in alpha on the tracked gap: three fluxes are collinear
    f = Flux(1, 13)
    gap = [g for g in spectrum(f).gaps() if g[0] > 0][0]
    mu = 0.5 * sum(gap)
    value, (lab_lo, lab_hi) = streda(mu, f.h, return_details=True)
    a_lo, a_hi = lab_lo.flux.p / lab_lo.flux.q, lab_hi.flux.p / lab_hi.flux.q
    i_lo, i_c, i_hi = lab_lo.trace, ids(f, mu), lab_hi.trace
    s1 = (i_c - i_lo) / (1 / 13 - a_lo)
    s2 = (i_hi - i_c) / (a_hi - 1 / 13)
    assert s1 == pytest.approx(s2, rel=1e-9)
    assert value == pytest.approx(s1 * 3 * math.sqrt(3) / 2 / (2 * math.pi), rel=1e-9)
    assert lab_lo.gamma2 == lab_hi.gamma2 == 1


def test_streda_errors():
    f = Flux(1, 13)
    band = spectrum(f).intervals[-1]
    with pytest.raises(GapTrackingError):
        streda(0.5 * sum(band), f.h)
    with pytest.raises(DomainError):
        streda(0.1, 1e-6, q_max=20)


def test_hall_map_small():
    table = hall_map(5)
    assert table.columns[:3] == ["p", "q", "gap_lo"]
    rows = [dict(zip(table.columns, r)) for r in table.rows]
    assert not [r for r in rows if r["q"] == 1]
    for r in rows:
        assert r["gamma1"] * r["q"] + r["gamma2"] * r["p"] == r["j"]
        lab = gap_label(Flux(r["p"], r["q"]), 0.5 * (r["gap_lo"] + r["gap_hi"]))
        assert (lab.gamma1, lab.gamma2) == (r["gamma1"], r["gamma2"])
    # p -> q - p mirrors the butterfly: same gaps, gamma2 flips sign except at the tie q/2
    by = {(r["p"], r["q"], round(r["gap_lo"], 9)): r for r in rows}
    for (p, q, lo), r in by.items():
        m = by[(q - p, q, lo)]
        assert m["j"] == r["j"]
        if 2 * r["gamma2"] != q:
            assert m["gamma2"] == -r["gamma2"]
    with pytest.raises(DomainError):
        hall_map(61)


def test_hall_map_with_mu_grid():
    table = hall_map(3, mu_grid=[0.35, 0.7])
    assert table.columns[-1] == "mu"
    mus = sorted(r[-1] for r in table.rows if r[0] == 1 and r[1] == 3)
    assert mus == [0.35, 0.7]
