import math

import numpy as np
import pytest

from hexflux.errors import DomainError
from hexflux.fractal import (IntervalSet, box_counting, butterfly, continuity_study, convergent_pairs,
                             dimension_report, hausdorff_distance, measure, measure_scaling)
from hexflux.lattice import Flux, spectrum
from oracles import chambers_spectrum, sampled_hausdorff

FROZEN_DH_5_7 = 0.07756667975589204  # sampled oracle, 1e5 points per set


def test_hausdorff_against_sampling_oracle():
    d = hausdorff_distance(spectrum(Flux(1, 5)), spectrum(Flux(1, 7)))
    assert d == pytest.approx(FROZEN_DH_5_7, abs=1e-4)
    est = sampled_hausdorff(chambers_spectrum(1, 5), chambers_spectrum(1, 7), n=20_000)
    assert d == pytest.approx(est, abs=5e-4)


def test_measure_scaling_report():
    rep = measure_scaling([1, 2, 3, 5])
    m = rep.column("measure")
    assert m[0] == pytest.approx(2.0, abs=1e-8)
    assert np.all(np.diff(m) < 0)
    assert rep.columns == ["p", "q", "measure", "sqrt_q_measure"]
    np.testing.assert_allclose(rep.column("sqrt_q_measure"), np.sqrt(rep.column("q")) * m)
    table = rep.table()
    assert len(table.rows) == 4


def test_continuity_study_skips_identical():
    rep = continuity_study([(Flux(1, 3), Flux(1, 3)), (Flux(1, 3), Flux(2, 5))])
    assert rep.meta["skipped"] == [("1/3", "1/3")]
    assert len(rep.rows) == 1
    row = dict(zip(rep.columns, rep.rows[0]))
    assert row["dh"] == pytest.approx(2 * math.pi / 15)
    assert row["ratio"] == pytest.approx(row["d_hausdorff"] / row["dh"] ** 0.25)


def test_golden_pairs_trend():
    pairs = convergent_pairs("golden", 144)
    assert pairs[0] == (Flux(1, 2), Flux(2, 3))
    assert pairs[-1][1] == Flux(89, 144)
    d = continuity_study(pairs).column("d_hausdorff")
    # shrinking Hausdorff distance along convergents (Cantor limit)
    assert np.all(np.diff(d) < 0)
    m = [measure(spectrum(b)) for _, b in pairs]
    assert np.all(np.diff(m) < 0)


def test_box_counting():
    assert box_counting(IntervalSet.from_intervals([(0.0, 1.0)]), 0.1) == 11
    assert box_counting(IntervalSet.from_intervals([(0.0, 0.05), (0.07, 0.08)]), 0.1) == 1
    assert box_counting(IntervalSet.from_intervals([(0.0, 0.0), (0.5, 0.5)]), 0.1) == 2
    with pytest.raises(DomainError):
        box_counting(IntervalSet.from_intervals([(0, 1)]), 0.0)


def test_dimension_report_bounds():
    rep = dimension_report([Flux(0, 1), Flux(34, 55)])
    dims = rep.column("box_dimension")
    assert dims[0] == pytest.approx(1.0, abs=0.02)
    assert 0.0 < dims[1] < 1.0


def test_butterfly_symmetry():
    table = butterfly(4)
    rows = table.rows
    assert {(r[0], r[1]) for r in rows} == {(0, 1), (1, 2), (1, 3), (2, 3), (1, 4), (3, 4)}
    for q, p in [(3, 1), (4, 1)]:
        a = sorted((r[2], r[3]) for r in rows if r[:2] == (p, q))
        b = sorted((r[2], r[3]) for r in rows if r[:2] == (q - p, q))
        np.testing.assert_allclose(a, b, atol=1e-9)


def test_holder_ratio_bounded_above():
    # d_H <= C |h - h'|^{1/4}: the ratio stays below 3x its median and below its first value
    r = continuity_study(convergent_pairs("golden", 144)).column("ratio")
    assert np.all(r <= 3 * np.median(r))
    assert np.all(r <= r[0] + 1e-12)
