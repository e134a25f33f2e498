"""Places, absolute values and heights over Q and real quadratic fields.

Normalised absolute values ``|a|_v`` carry fractional exponents (``1/d`` for
a field of degree ``d``), so everything here works with ``|a|_v ** d``
instead, which is an exact element of the field: ``|sigma_v(a)|`` at a real
place and ``N(p) ** -ord_p(a)`` at a finite one.  Products of these powers
give the product formula and ``H(a) ** d`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import mpmath
from sympy import factorint, sqrt_mod

from .exact import QuadraticReal, refine

FieldElement = Union[Fraction, QuadraticReal]

# real quadratic fields Q(sqrt d), d < 100 squarefree, with class number 1
CLASS_NUMBER_ONE = frozenset({
    2, 3, 5, 6, 7, 11, 13, 14, 17, 19, 21, 22, 23, 29, 31, 33, 37, 38, 41, 43,
    46, 47, 53, 57, 59, 61, 62, 67, 69, 71, 73, 77, 83, 86, 89, 93, 94, 97,
})


class UnsupportedField(ValueError):
    pass


class HeightOne(ValueError):
    pass


def field_of(*xs) -> int:
    """``1`` for Q, else the ``d`` of the common field ``Q(sqrt d)``."""
    d = 1
    for x in xs:
        if isinstance(x, QuadraticReal):
            if d not in (1, x.d):
                raise ValueError(f"mixed fields Q(sqrt {d}) and Q(sqrt {x.d})")
            d = x.d
        elif not isinstance(x, (int, Fraction)):
            raise TypeError(f"not a field element: {x!r}")
    return d


def _check_field(d: int) -> None:
    if d != 1 and d not in CLASS_NUMBER_ONE:
        raise UnsupportedField(f"Q(sqrt {d}) is outside the class-number-one whitelist")


def _coords(x, d: int) -> tuple[Fraction, Fraction]:
    if isinstance(x, QuadraticReal):
        return x.a, x.b
    return Fraction(x), Fraction(0)


def norm(x, d: int) -> Fraction:
    if d == 1:
        return Fraction(x)
    a, b = _coords(x, d)
    return a * a - d * b * b


def conj(x, d: int):
    if isinstance(x, QuadraticReal):
        return x.conjugate()
    return Fraction(x)


def _vp(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    n, k = abs(n), 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def _vp_frac(x: Fraction, p: int) -> int:
    return _vp(x.numerator, p) - _vp(x.denominator, p)


def _padic_sqrt(d: int, p: int, k: int) -> int:
    """A root of ``s^2 = d`` modulo ``p^k`` (``d`` a nonzero square mod p, or 1 mod 8 for p=2).

    The canonical root is the one with the smaller residue mod p (odd p), or
    ``s = 1 mod 4`` (p = 2).
    """
    if p == 2:
        s, j = 1, 3
        while j < k:
            if (s * s - d) % 2 ** (j + 1):
                s += 2 ** (j - 1)
            j += 1
        s %= 2**k
        if s % 4 != 1:
            s = (-s) % 2**k
        return s
    s0 = min(sqrt_mod(d % p, p, all_roots=True))
    s, mod = s0, p
    while mod < p**k:
        mod = min(mod * mod, p**k)
        s = (s - (s * s - d) * pow(2 * s, -1, mod)) % mod
    return s


def prime_kind(p: int, d: int) -> str:
    disc = d if d % 4 == 1 else 4 * d
    if disc % p == 0:
        return "ramified"
    if p == 2:
        return "split" if d % 8 == 1 else "inert"
    return "split" if pow(d % p, (p - 1) // 2, p) == 1 else "inert"


@dataclass(frozen=True, order=True)
class Place:
    """A place of Q or Q(sqrt d).

    Archimedean places have ``p = 0`` and ``branch`` +1 (identity embedding) or
    -1 (conjugate).  Finite places record the rational prime ``p``, its
    splitting ``kind`` and, for split primes, which of the two primes above p
    (``branch`` +1 for ``sqrt d -> s``, -1 for ``sqrt d -> -s``).
    """

    p: int
    branch: int
    kind: str
    d: int

    @property
    def archimedean(self) -> bool:
        return self.p == 0

    @property
    def norm(self) -> int:
        if self.archimedean:
            raise ValueError("archimedean place has no norm")
        return self.p**2 if self.kind == "inert" else self.p

    @property
    def label(self) -> str:
        if self.archimedean:
            return "inf" if self.d == 1 else ("inf+" if self.branch > 0 else "inf-")
        if self.d == 1 or self.kind in ("inert", "ramified"):
            return f"{self.p}"
        return f"{self.p}{'+' if self.branch > 0 else '-'}"


def archimedean_places(d: int) -> tuple[Place, ...]:
    if d == 1:
        return (Place(0, 1, "real", 1),)
    return (Place(0, 1, "real", d), Place(0, -1, "real", d))


def places_above(p: int, d: int) -> tuple[Place, ...]:
    if d == 1:
        return (Place(p, 1, "rational", 1),)
    kind = prime_kind(p, d)
    if kind == "split":
        return (Place(p, 1, kind, d), Place(p, -1, kind, d))
    return (Place(p, 1, kind, d),)


def _integral(x, d: int) -> tuple[int, int, int]:
    """``x = (X + Y sqrt d) / c`` with integers ``X, Y`` and ``c >= 1``."""
    a, b = _coords(x, d)
    c = math.lcm(a.denominator, b.denominator)
    return int(a * c), int(b * c), c


def ord_at(place: Place, x) -> int:
    """``ord_p(x)`` for a nonzero field element."""
    if place.archimedean:
        raise ValueError("ord is defined at finite places only")
    d, p = place.d, place.p
    if x == 0:
        raise ValueError("ord of zero")
    if d == 1:
        return _vp_frac(Fraction(x), p)
    X, Y, c = _integral(x, d)
    e = 2 if place.kind == "ramified" else 1
    oc = e * _vp(c, p)
    if place.kind == "ramified":
        return _vp(X * X - d * Y * Y, p) - oc
    if place.kind == "inert":
        if d % 4 == 1:
            # integral basis 1, (1+sqrt d)/2: X + Y sqrt d = (X - Y) + 2Y omega
            u, v = X - Y, 2 * Y
        else:
            u, v = X, Y
        vals = [_vp(t, p) for t in (u, v) if t]
        return min(vals) - oc
    # split: embed into Z_p via sqrt d -> +-s
    nv = _vp(X * X - d * Y * Y, p)
    k = nv + 3
    s = _padic_sqrt(d, p, k)
    if place.branch < 0:
        s = -s
    t = (X + Y * s) % p**k
    return _vp(t, p) - oc if t else k - oc


def embed(place: Place, x):
    """Image of ``x`` under the real embedding of an archimedean place."""
    return x if place.branch > 0 else conj(x, place.d)


def abs_pow(place: Place, x):
    """``|x|_v ** [K:Q]``, exactly."""
    if x == 0:
        return Fraction(0)
    if place.archimedean:
        return abs(embed(place, x))
    return Fraction(place.norm) ** (-ord_at(place, x))


def _abs_pow_float(place: Place, x) -> mpmath.mpf:
    v = abs_pow(place, x)
    if isinstance(v, QuadraticReal):
        e = refine(v, 96)
        return mpmath.mpf(e.mid.numerator) / e.mid.denominator
    return mpmath.mpf(v.numerator) / v.denominator


def degree(d: int) -> int:
    return 1 if d == 1 else 2


def primes_of(x, d: int) -> set[int]:
    """Rational primes below the finite places where ``ord(x) != 0``."""
    X, Y, c = _integral(x, d)
    n = X * X - d * Y * Y if d != 1 else X
    out = set(factorint(abs(n))) | set(factorint(c))
    out.discard(1)
    return out


def support(xs: Iterable, d: int) -> tuple[Place, ...]:
    """Finite places where some nonzero element of ``xs`` has nonzero ord."""
    xs = [x for x in xs if x != 0]
    primes = set()
    for x in xs:
        primes |= primes_of(x, d)
    out = []
    for p in sorted(primes):
        for pl in places_above(p, d):
            if any(ord_at(pl, x) != 0 for x in xs):
                out.append(pl)
    return tuple(out)


def product_formula(x) -> bool:
    """``prod_v |x|_v = 1`` over every place of the field, checked exactly."""
    d = field_of(x)
    _check_field(d)
    if x == 0:
        raise ValueError("product formula needs a nonzero element")
    prod = Fraction(1)
    for pl in archimedean_places(d) + support([x], d):
        prod = abs_pow(pl, x) * prod
    return prod == 1


@dataclass(frozen=True)
class HeightValue:
    """``H = power ** (1/degree)`` with ``power`` exact."""

    power: FieldElement
    degree: int

    @property
    def value(self) -> mpmath.mpf:
        if isinstance(self.power, QuadraticReal):
            e = refine(self.power, 128)
            v = mpmath.mpf(e.mid.numerator) / e.mid.denominator
        else:
            v = mpmath.mpf(self.power.numerator) / self.power.denominator
        return mpmath.root(v, self.degree)

    def log(self) -> mpmath.mpf:
        return mpmath.log(self.value)

    def exact(self) -> Optional[Fraction]:
        """The height itself if it is rational."""
        if isinstance(self.power, QuadraticReal):
            return None
        if self.degree == 1:
            return self.power
        num, den = self.power.numerator, self.power.denominator
        rn, rd = math.isqrt(num), math.isqrt(den)
        return Fraction(rn, rd) if rn * rn == num and rd * rd == den else None


def height(point: Sequence, d: Optional[int] = None) -> HeightValue:
    """Absolute Weil height of the projective point ``[x_0 : ... : x_m]``."""
    if all(x == 0 for x in point):
        raise ValueError("height of the zero vector")
    d = field_of(*point) if d is None else d
    _check_field(d)
    total = Fraction(1)
    for pl in archimedean_places(d) + support(point, d):
        total = max(abs_pow(pl, x) for x in point) * total
    return HeightValue(total, degree(d))


def is_s_integer(x, places: Iterable[Place]) -> bool:
    """``|x|_v <= 1`` at every finite place not in ``places``."""
    if x == 0:
        return True
    d = field_of(x)
    inside = set(places)
    return all(ord_at(pl, x) >= 0 for pl in support([x], d) if pl not in inside)


def _root_upper(v, k: int, bits: int = 64) -> Fraction:
    """Rational upper bound on ``v ** (1/k)`` for ``k`` in {1, 2}; exact when possible."""
    if k == 1:
        if isinstance(v, QuadraticReal):
            return refine(v, bits).hi
        return Fraction(v)
    if isinstance(v, Fraction):
        rn, rd = math.isqrt(v.numerator), math.isqrt(v.denominator)
        if rn * rn == v.numerator and rd * rd == v.denominator:
            return Fraction(rn, rd)
    hi = refine(v, bits).hi
    scale = 4**bits
    return Fraction(math.isqrt(math.ceil(hi * scale)) + 1, 2**bits)


@dataclass(frozen=True)
class PlaceSet:
    d: int
    beta: FieldElement
    archimedean: tuple[Place, ...]
    finite: tuple[Place, ...]
    kappa: Fraction
    deg_beta: int

    @property
    def places(self) -> tuple[Place, ...]:
        return self.archimedean + self.finite

    @property
    def size(self) -> int:
        return len(self.places)

    @property
    def degree(self) -> int:
        return degree(self.d)

    def beta_abs(self) -> dict:
        return {pl.label: abs_pow(pl, self.beta) for pl in self.places}

    def to_json(self) -> dict:
        return {
            "field": "Q" if self.d == 1 else f"Q(sqrt {self.d})",
            "places": [pl.label for pl in self.places],
            "kappa": str(self.kappa),
            "deg_beta": self.deg_beta,
            "beta_abs_pow": {k: str(v) for k, v in self.beta_abs().items()},
        }


def build_places(beta) -> PlaceSet:
    d = field_of(beta)
    _check_field(d)
    if abs(beta) <= 1:
        raise ValueError("|beta| must exceed 1")
    arch = archimedean_places(d)
    fin = support([beta], d)
    D = degree(d)
    kappa = max(_root_upper(abs_pow(pl, beta), D) for pl in arch + fin)
    return PlaceSet(d, beta, arch, fin, max(kappa, Fraction(2)), D if isinstance(beta, QuadraticReal) else 1)


# ---------------------------------------------------------------------------
# Laurent polynomials and the gap criterion


@dataclass(frozen=True)
class LaurentPoly:
    terms: tuple[tuple[int, FieldElement], ...]

    def __post_init__(self):
        acc: dict = {}
        for e, c in self.terms:
            acc[int(e)] = acc.get(int(e), 0) + c
        object.__setattr__(self, "terms", tuple(sorted((e, c) for e, c in acc.items() if c != 0)))

    @classmethod
    def from_dense(cls, coeffs: Sequence, shift: int = 0) -> "LaurentPoly":
        return cls(tuple((i + shift, Fraction(c)) for i, c in enumerate(coeffs)))

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        return LaurentPoly(self.terms + other.terms)

    def __call__(self, x):
        return sum((c * x**e for e, c in self.terms), Fraction(0))

    def split(self, d0: int, d1: int) -> tuple["LaurentPoly", "LaurentPoly"]:
        if any(d0 < e < d1 for e, _ in self.terms):
            raise ValueError(f"f has monomials strictly between {d0} and {d1}")
        return (LaurentPoly(tuple(t for t in self.terms if t[0] <= d0)),
                LaurentPoly(tuple(t for t in self.terms if t[0] >= d1)))

    @property
    def is_zero(self) -> bool:
        return not self.terms


@dataclass(frozen=True)
class GapReport:
    k: int
    gap: int
    gap_ok: bool
    f_root: bool
    g_root: Optional[bool]
    h_root: Optional[bool]
    blocks: int

    @property
    def consistent(self) -> bool:
        return not (self.gap_ok and self.f_root) or bool(self.g_root and self.h_root)


def gap_split_check(f: LaurentPoly, beta, d0: int, d1: int) -> GapReport:
    """Check ``d1 - d0 > log(k H(f)) / log H(beta)`` and, if so, the common-root conclusion.

    The log inequality is decided as ``H(beta)^(D(d1-d0)) > k^D H(f)^D`` in
    exact arithmetic, with ``D`` the degree of the common field.
    """
    if f.is_zero:
        raise ValueError("f must be nonzero")
    if d1 <= d0:
        raise ValueError("need d0 < d1")
    g, h = f.split(d0, d1)
    k = len(f.terms) - 1
    d = field_of(beta, *(c for _, c in f.terms))
    _check_field(d)
    hb = height([Fraction(1), beta], d)
    if hb.power == 1:
        raise HeightOne("H(beta) = 1, the gap criterion is unusable")
    f_root = f(beta) == 0
    blocks = int(not g.is_zero) + int(not h.is_zero)
    if blocks < 2:
        return GapReport(k, d1 - d0, False, f_root, None, None, blocks)
    hf = height([c for _, c in f.terms], d)
    D = degree(d)
    gap_ok = hb.power ** (d1 - d0) > Fraction(k) ** D * hf.power
    g_root = g(beta) == 0
    h_root = h(beta) == 0
    return GapReport(k, d1 - d0, gap_ok, f_root, g_root, h_root, blocks)
