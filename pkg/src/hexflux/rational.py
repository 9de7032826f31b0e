"""Rational flux bookkeeping: Farey neighbours and continued-fraction convergents."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import DomainError
from .lattice import TWO_PI, Flux, reduce_flux


def farey_neighbors(x, q_max: int) -> tuple[Fraction, Fraction]:
    """Closest fractions ``a/b < x < c/d`` with denominators at most ``q_max``.

    If ``x`` itself is a fraction with denominator ``<= q_max`` its two
    neighbours in the Farey sequence of order ``q_max`` are returned.
    """
    if q_max < 1:
        raise DomainError("q_max must be positive")
    x = Fraction(x) if not isinstance(x, float) else Fraction(x).limit_denominator(10 ** 15)
    base = math.floor(x)
    y = x - base
    lo, hi = Fraction(0, 1), Fraction(1, 1)
    if y == 0:
        return base - Fraction(1, q_max), base + Fraction(1, q_max)
    # Stern-Brocot descent restricted to denominators <= q_max
    while True:
        m = Fraction(lo.numerator + hi.numerator, lo.denominator + hi.denominator)
        if m.denominator > q_max:
            break
        if y < m:
            hi = m
        elif y > m:
            lo = m
        else:
            p, q = m.numerator, m.denominator
            inv = pow(p, -1, q) if q > 1 else 0
            b = inv + q * ((q_max - inv) // q) if q > 1 else q_max
            lo = Fraction((p * b - 1) // q, b)
            d = (-inv) % q if q > 1 else q_max
            d = d + q * ((q_max - d) // q) if q > 1 else q_max
            hi = Fraction((p * d + 1) // q, d)
            break
    return base + lo, base + hi


def flux_pair(h: float, dh: float | None, q_max: int = 200):
    """Rational fluxes ``(alpha_minus, alpha_plus)`` bracketing ``alpha = h / 2 pi``.

    With ``dh=None`` the Farey neighbours of the best approximant of order
    ``q_max`` are used; otherwise the best approximants of ``(h +- dh) / 2 pi``.
    """
    alpha = Fraction(h / TWO_PI).limit_denominator(q_max)
    if dh is None:
        return farey_neighbors(alpha, q_max)
    lo = Fraction((h - dh) / TWO_PI).limit_denominator(q_max)
    hi = Fraction((h + dh) / TWO_PI).limit_denominator(q_max)
    if lo == hi:
        raise DomainError(f"dh={dh} is below the resolution of fluxes with q <= {q_max}")
    return lo, hi


def flux_of(a: Fraction) -> Flux:
    return reduce_flux(a.numerator, a.denominator)


@dataclass
class ConvergentSequence:
    alpha: str
    fluxes: list[Flux]
    terminated: bool

    def __iter__(self):
        return iter(self.fluxes)

    def __len__(self):
        return len(self.fluxes)


NAMED_TARGETS = {
    "golden": lambda: (mpmath.sqrt(5) - 1) / 2,
    "silver": lambda: mpmath.sqrt(2) - 1,
}


def convergent_fluxes(alpha, n: int, dps: int = 60) -> ConvergentSequence:
    """First ``n`` continued-fraction convergents of ``alpha`` in ``(0, 1)``.

    Convergents ``0/1`` and ``1/1`` (zero flux) are skipped. ``alpha`` may
    be a Fraction, an mpmath number, a decimal string or a name from
    ``NAMED_TARGETS``; irrationals are held at ``dps`` digits. A rational
    ``alpha`` ends the sequence early and sets ``terminated``.
    """
    with mpmath.workdps(dps):
        if isinstance(alpha, str) and alpha in NAMED_TARGETS:
            alpha = NAMED_TARGETS[alpha]()
        if isinstance(alpha, Fraction):
            x = mpmath.mpf(alpha.numerator) / alpha.denominator
            exact = alpha
        else:
            x = mpmath.mpf(alpha)
            exact = None
        if not 0 < x < 1:
            raise DomainError("alpha must lie in (0, 1)")
        tol = mpmath.mpf(10) ** (-(dps - 10))
        p0, q0, p1, q1 = 0, 1, 1, 0
        out: list[Flux] = []
        terminated = False
        rest = exact if exact is not None else x
        while len(out) < n:
            a = int(math.floor(rest)) if exact is not None else int(mpmath.floor(rest))
            p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
            if 0 < p1 < q1:
                out.append(Flux(p1, q1))
            frac = rest - a
            if (exact is not None and frac == 0) or (exact is None and abs(frac) < tol):
                terminated = True
                break
            rest = 1 / frac
        return ConvergentSequence(mpmath.nstr(x, 20), out, terminated)
