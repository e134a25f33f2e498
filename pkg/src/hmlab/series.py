"""Certified evaluation of ``sum_m f(floor(m*theta + alpha)) * beta^(-m)``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .exact import Enclosure, QuadraticReal, RealScalar, format_scalar, is_exact, quad, refine
from .floorseq import FloorSequence, IntPolynomial

FieldElement = Union[Fraction, QuadraticReal]


class DivergentSpec(ValueError):
    pass


@dataclass(frozen=True)
class SeriesSpec:
    f: IntPolynomial
    theta: RealScalar
    alpha: RealScalar
    beta: FieldElement

    def __post_init__(self):
        if self.f.degree < 1:
            raise ValueError("f must be non-constant")
        if not isinstance(self.beta, (int, Fraction, QuadraticReal)):
            raise TypeError("beta must be rational or real quadratic")
        if abs(self.beta) <= 1:
            raise DivergentSpec("|beta| must exceed 1")
        if isinstance(self.theta, (int, Fraction)):
            raise ValueError("theta must be irrational")
        for name, v in (("theta", self.theta), ("alpha", self.alpha)):
            if is_exact(v) and not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1)")

    def to_json(self) -> dict:
        return {"f": str(self.f), "theta": format_scalar(self.theta),
                "alpha": format_scalar(self.alpha), "beta": format_scalar(self.beta)}


def inverse_modulus_bound(beta) -> Fraction:
    """Rational ``q`` with ``1/|beta| <= q < 1``."""
    if isinstance(beta, (int, Fraction)):
        return 1 / abs(Fraction(beta))
    lo = refine(abs(beta), 64).lo
    p = 64
    while lo <= 1:
        p *= 2
        lo = refine(abs(beta), p).lo
    return 1 / lo


@dataclass(frozen=True)
class TailMajorant:
    """Bounds ``sum_{m > M} C (m + 1 + shift)^D q^m`` via the ratio test."""

    C: int
    D: int
    q: Fraction
    shift: int = 0

    def term(self, m: int) -> Fraction:
        return self.C * (m + 1 + self.shift) ** self.D * self.q**m

    def ratio(self, M: int) -> Fraction:
        # sup of term(m+1)/term(m) over m > M
        return self.q * Fraction(M + 3 + self.shift, M + 2 + self.shift) ** self.D

    def min_index(self) -> int:
        M = 0
        while self.ratio(M) >= 1:
            M = 2 * M + 1
        return M

    def bound(self, M: int) -> Fraction:
        """Upper bound on the tail beyond ``M``; decreasing in ``M`` past :meth:`min_index`."""
        rho = self.ratio(M)
        if rho >= 1:
            raise ValueError(f"ratio test fails at M={M}")
        return self.term(M + 1) / (1 - rho)

    def index_for(self, target: Fraction) -> int:
        """Least admissible ``M`` with ``bound(M) <= target``."""
        lo = self.min_index()
        if self.bound(lo) <= target:
            return lo
        hi = max(2 * lo, 1)
        while self.bound(hi) > target:
            lo, hi = hi, 2 * hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.bound(mid) <= target:
                hi = mid
            else:
                lo = mid
        return hi


def u_majorant(f: IntPolynomial, beta, shift: int = 0, scale: int = 1) -> TailMajorant:
    """``|u_m| <= sum|f_i| (m+1)^deg``, since ``0 <= floor(m theta + alpha) <= m``."""
    return TailMajorant(scale * f.coefficient_bound(), f.degree, inverse_modulus_bound(beta), shift)


@dataclass(frozen=True)
class SeriesValue:
    spec: SeriesSpec
    precision: int
    enclosure: Enclosure
    tail_M: int
    exact_partial: bool

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "precision": self.precision,
            "enclosure": {"lo": _fmt(self.enclosure.lo, self.precision),
                          "hi": _fmt(self.enclosure.hi, self.precision)},
            "tail_M": self.tail_M,
        }


def _fmt(x: Fraction, p: int) -> str:
    import mpmath

    digits = int(p * 0.30103) + 5
    with mpmath.workdps(digits + 10):
        return mpmath.nstr(mpmath.mpf(x.numerator) / x.denominator, digits)


def partial_sum(u, beta, M: int):
    """``sum_{m <= M} u_m beta^(-m)`` exactly (Horner in the field of beta)."""
    if isinstance(beta, (int, Fraction)):
        b = Fraction(beta)
        num, den = b.numerator, b.denominator
        # sum u_m (den/num)^m = (sum u_m den^m num^(M-m)) / num^M
        acc = 0
        for m in range(M + 1):
            acc = acc * num + int(u[m]) * den**m
        return Fraction(acc, num**M)
    # integer Horner: x = 1/beta = (p + q sqrt d)/c, acc = (A + B sqrt d)/c^k
    x, d = beta.inverse(), beta.d
    c = math.lcm(x.a.denominator, x.b.denominator)
    p, q = int(x.a * c), int(x.b * c)
    A, B = 0, 0
    for m in range(M, -1, -1):
        A, B = A * p + B * q * d, A * q + B * p
        A += int(u[m]) * c ** (M - m + 1)
    den = c ** (M + 1)
    return quad(Fraction(A, den), Fraction(B, den), d)


def eval_series(spec: SeriesSpec, p: int, source: FloorSequence | None = None) -> SeriesValue:
    """Enclosure of the series value with width ``<= 2^-p``.

    For rational beta the partial sum is exact and the enclosure is
    ``S_M -+ R(M)``.  Otherwise ``S_M`` is refined to ``2^-(p+4)`` and the
    radius grows by ``2^-(p+3)``; both choices keep enclosures nested as ``p``
    increases.
    """
    if p < 8:
        raise ValueError("precision must be at least 8 bits")
    src = source or FloorSequence(spec.f, spec.theta, spec.alpha)
    maj = u_majorant(spec.f, spec.beta)
    M = maj.index_for(Fraction(1, 2 ** (p + 3)))
    R = maj.bound(M)
    S = partial_sum(src.values(0, M), spec.beta, M)
    if isinstance(S, QuadraticReal):
        e = refine(S, p + 4)
        slack = Fraction(1, 2 ** (p + 3))
        enc = Enclosure(e.lo - R - slack, e.hi + R + slack)
        exact = False
    else:
        enc = Enclosure(S - R, S + R)
        exact = True
    return SeriesValue(spec, p, enc, M, exact)
