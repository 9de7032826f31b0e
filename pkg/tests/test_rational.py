import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hexflux.errors import DomainError
from hexflux.lattice import Flux
from hexflux.rational import convergent_fluxes, farey_neighbors, flux_pair


def test_farey_neighbors_known():
    assert farey_neighbors(Fraction(1, 41), 200) == (Fraction(4, 165), Fraction(4, 163))
    assert farey_neighbors(Fraction(1, 2), 5) == (Fraction(2, 5), Fraction(3, 5))
    assert farey_neighbors(Fraction(0), 7) == (Fraction(-1, 7), Fraction(1, 7))
    with pytest.raises(DomainError):
        farey_neighbors(Fraction(1, 3), 0)


@given(st.integers(2, 60).flatmap(lambda q: st.tuples(st.integers(1, q - 1), st.just(q))),
       st.integers(60, 300))
def test_farey_neighbors_of_member(pq, n):
    x = Fraction(*pq)
    lo, hi = farey_neighbors(x, n)
    assert lo < x < hi
    assert lo.denominator <= n and hi.denominator <= n
    assert x.numerator * lo.denominator - lo.numerator * x.denominator == 1
    assert hi.numerator * x.denominator - x.numerator * hi.denominator == 1


@given(st.floats(0.001, 0.999), st.integers(5, 200))
def test_farey_neighbors_bracket(x, n):
    lo, hi = farey_neighbors(x, n)
    assert lo < Fraction(x) < hi
    if Fraction(x).limit_denominator(10 ** 15).denominator > n:
        # consecutive in the Farey sequence
        assert hi.numerator * lo.denominator - lo.numerator * hi.denominator == 1


def test_flux_pair():
    lo, hi = flux_pair(2 * math.pi / 41, None)
    assert (lo, hi) == (Fraction(4, 165), Fraction(4, 163))
    lo, hi = flux_pair(2 * math.pi / 41, 0.01, q_max=200)
    assert lo < Fraction(1, 41) < hi
    with pytest.raises(DomainError):
        flux_pair(2 * math.pi / 41, 1e-12, q_max=50)


def test_golden_convergents():
    seq = convergent_fluxes("golden", 8)
    assert [f.q for f in seq] == [2, 3, 5, 8, 13, 21, 34, 55]
    assert [f.p for f in seq] == [1, 2, 3, 5, 8, 13, 21, 34]
    assert not seq.terminated
    assert seq.alpha.startswith("0.618033988749")


def test_silver_and_rational_convergents():
    assert [f.q for f in convergent_fluxes("silver", 4)] == [2, 5, 12, 29]
    seq = convergent_fluxes(Fraction(3, 8), 10)
    assert seq.terminated
    assert seq.fluxes[-1] == Flux(3, 8)
    with pytest.raises(DomainError):
        convergent_fluxes(Fraction(3, 2), 3)
