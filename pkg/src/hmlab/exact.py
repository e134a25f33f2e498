"""Exact and rigorously enclosed real arithmetic.

Three kinds of real scalar are supported:

* ``fractions.Fraction`` for rationals,
* :class:`QuadraticReal` for ``a + b*sqrt(d)`` with rational ``a, b``,
* :class:`EnclosureStream` for anything else, given as a map from a
  precision ``p`` to an :class:`Enclosure` of width at most ``2**-p``.

Floors and fractional-part comparisons are decided exactly for the first
two kinds and by refinement (up to a precision cap) for streams.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

P_MAX = 4096


class PrecisionExhausted(ArithmeticError):
    """Raised when an enclosure at the precision cap still straddles a decision point."""


class Order(enum.Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    UNDECIDED = "undecided"


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected a rational, got {type(x).__name__}")


def _squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(k, d)`` with ``n == k*k*d`` and ``d`` squarefree."""
    k, d, p = 1, 1, 2
    rest = n
    while p * p <= rest:
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        k *= p ** (e // 2)
        if e % 2:
            d *= p
        p += 1 if p == 2 else 2
    return k, d * rest


@dataclass(frozen=True, slots=True)
class QuadraticReal:
    """The real number ``a + b*sqrt(d)`` with ``d`` squarefree and ``b != 0``.

    Use :func:`quad` to build one; it canonicalises ``d`` and collapses
    ``b == 0`` to a ``Fraction``.
    """

    a: Fraction
    b: Fraction
    d: int

    # -- construction helpers -------------------------------------------------
    def _lift(self, other) -> "QuadraticReal | None":
        if isinstance(other, QuadraticReal):
            if other.d != self.d:
                raise ValueError(f"mixed fields Q(sqrt {self.d}) and Q(sqrt {other.d})")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadraticReal(Fraction(other), Fraction(0), self.d)
        return None

    # -- arithmetic --------------------------------------------------------------
    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return quad(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticReal(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return quad(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return quad(self.a * o.a + self.d * self.b * o.b, self.a * o.b + self.b * o.a, self.d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return self.inverse() ** (-e)
        result: QuadraticReal | Fraction = Fraction(1)
        base: QuadraticReal | Fraction = self
        while e:
            if e & 1:
                result = base * result
            e >>= 1
            if e:
                base = base * base
        return result

    def conjugate(self) -> "QuadraticReal":
        return QuadraticReal(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.d * self.b * self.b

    def inverse(self) -> "QuadraticReal":
        n = self.norm()
        return QuadraticReal(self.a / n, -self.b / n, self.d)

    # -- order ------------------------------------------------------------------
    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == sb or sa == 0:
            return sb
        # opposite signs: compare a^2 with d b^2 (never equal, d squarefree)
        return sa if self.a * self.a > self.d * self.b * self.b else sb

    def _cmp(self, other) -> int:
        o = self._lift(other)
        if o is None:
            raise TypeError
        diff = self - o
        return diff.sign() if isinstance(diff, QuadraticReal) else (diff > 0) - (diff < 0)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if isinstance(other, QuadraticReal):
            return (self.a, self.b, self.d) == (other.a, other.b, other.d)
        return False

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- integer part -------------------------------------------------------------
    def __floor__(self) -> int:
        # a + b sqrt d = (P + s*sqrt(N)) / Q with Q > 0 and N = (B^2) d not a square
        q = math.lcm(self.a.denominator, self.b.denominator)
        p = self.a.numerator * (q // self.a.denominator)
        bb = self.b.numerator * (q // self.b.denominator)
        root = math.isqrt(bb * bb * self.d)
        if bb > 0:
            return (p + root) // q
        return (p - root - 1) // q

    def __ceil__(self) -> int:
        return math.floor(self) + 1

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __repr__(self) -> str:
        return f"QuadraticReal({self.a}, {self.b}, {self.d})"

    def __str__(self) -> str:
        return f"{self.a}{'+' if self.b > 0 else '-'}{abs(self.b)}*sqrt({self.d})"


def quad(a, b, d: int) -> QuadraticReal | Fraction:
    """Canonical ``a + b*sqrt(d)``; a ``Fraction`` whenever the value is rational."""
    a, b = _as_fraction(a), _as_fraction(b)
    if d < 0:
        raise ValueError("only real quadratic fields are supported")
    if b == 0 or d == 0:
        return a
    k, d0 = _squarefree_split(d)
    if d0 == 1:
        return a + b * k
    return QuadraticReal(a, b * k, d0)


def sqrt_of(d: int) -> QuadraticReal | Fraction:
    return quad(0, 1, d)


# ---------------------------------------------------------------------------
# Enclosures


@dataclass(frozen=True, slots=True)
class Enclosure:
    """Closed interval ``[lo, hi]`` with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "Enclosure":
        x = _as_fraction(x)
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        if isinstance(x, Enclosure):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, QuadraticReal):
            return x >= self.lo and x <= self.hi
        return self.lo <= x <= self.hi

    def intersects(self, other: "Enclosure") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersect(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(max(self.lo, other.lo), min(self.hi, other.hi))

    def __add__(self, other):
        if isinstance(other, Enclosure):
            return Enclosure(self.lo + other.lo, self.hi + other.hi)
        other = _as_fraction(other)
        return Enclosure(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __neg__(self):
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Enclosure):
            c = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
            return Enclosure(min(c), max(c))
        other = _as_fraction(other)
        if other >= 0:
            return Enclosure(self.lo * other, self.hi * other)
        return Enclosure(self.hi * other, self.lo * other)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Enclosure":
        if e == 0:
            return Enclosure.point(1)
        if e % 2 == 1 or self.lo >= 0:
            return Enclosure(self.lo**e, self.hi**e)
        if self.hi <= 0:
            return Enclosure(self.hi**e, self.lo**e)
        return Enclosure(Fraction(0), max(self.lo**e, self.hi**e))

    def magnitude(self) -> Fraction:
        return max(abs(self.lo), abs(self.hi))

    def mignitude(self) -> Fraction:
        if self.lo <= 0 <= self.hi:
            return Fraction(0)
        return min(abs(self.lo), abs(self.hi))

    def dyadic(self, p: int) -> "Enclosure":
        """Round outward to endpoints with denominator ``2**p``."""
        s = 1 << p
        return Enclosure(Fraction(math.floor(self.lo * s), s), Fraction(math.ceil(self.hi * s), s))

    def __repr__(self) -> str:
        return f"Enclosure({float(self.lo)!r}, {float(self.hi)!r})"


class EnclosureStream:
    """A real number given by a function ``p -> Enclosure`` of width ``<= 2**-p``.

    Results are cached and intersected with earlier ones, so the returned
    enclosures are nested across increasing precision.
    """

    __slots__ = ("_fn", "_cache", "label")

    def __init__(self, fn: Callable[[int], Enclosure], label: str = "stream"):
        self._fn = fn
        self._cache: dict[int, Enclosure] = {}
        self.label = label

    def refine(self, p: int) -> Enclosure:
        if p < 1:
            raise ValueError("precision must be >= 1")
        if p in self._cache:
            return self._cache[p]
        enc = self._fn(p)
        if enc.width > Fraction(1, 1 << p):
            raise ValueError(f"stream {self.label} returned width {float(enc.width)} at p={p}")
        for q, prev in self._cache.items():
            if q < p:
                enc = enc.intersect(prev)
        self._cache[p] = enc
        return enc

    @classmethod
    def from_iv(cls, expr: Callable, label: str = "iv") -> "EnclosureStream":
        """Wrap an ``mpmath.iv`` expression, ``expr(iv) -> mpi``, evaluated at rising precision."""
        from mpmath import iv

        def fn(p: int) -> Enclosure:
            guard = 32
            while True:
                saved = iv.prec
                iv.prec = p + guard
                try:
                    # read endpoints before restoring: constants such as iv.pi are lazy
                    lo, hi = (_raw_mpf_to_fraction(r) for r in expr(iv)._mpi_)
                finally:
                    iv.prec = saved
                if hi - lo <= Fraction(1, 1 << p):
                    return Enclosure(lo, hi)
                guard *= 2
                if guard > 8 * P_MAX:
                    raise PrecisionExhausted(f"{label}: iv evaluation does not converge")

        return cls(fn, label)

    @classmethod
    def from_scalar(cls, x) -> "EnclosureStream":
        return cls(lambda p: refine(x, p), label=str(x))

    def __repr__(self) -> str:
        return f"EnclosureStream({self.label})"


def _raw_mpf_to_fraction(raw) -> Fraction:
    sign, man, exp, _ = raw
    if not man and exp:
        raise PrecisionExhausted("interval evaluation produced a non-finite endpoint")
    v = Fraction(int(man) << exp) if exp >= 0 else Fraction(int(man), 1 << -exp)
    return -v if sign else v


RealScalar = Union[Fraction, QuadraticReal, EnclosureStream]


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, QuadraticReal))


def refine(x: RealScalar, p: int) -> Enclosure:
    """Enclosure of ``x`` with width at most ``2**-p``; width 0 for rationals."""
    if p < 1:
        raise ValueError("precision must be >= 1")
    if isinstance(x, (int, Fraction)):
        return Enclosure.point(x)
    if isinstance(x, QuadraticReal):
        # k extra bits absorb the factor |b|
        k = p + max(abs(x.b).numerator.bit_length() - abs(x.b).denominator.bit_length() + 1, 0) + 1
        s = math.isqrt(x.d << (2 * k))
        lo_r, hi_r = Fraction(s, 1 << k), Fraction(s + 1, 1 << k)
        if x.b > 0:
            return Enclosure(x.a + x.b * lo_r, x.a + x.b * hi_r)
        return Enclosure(x.a + x.b * hi_r, x.a + x.b * lo_r)
    if isinstance(x, EnclosureStream):
        return x.refine(p)
    raise TypeError(f"not a real scalar: {x!r}")


def _common_field(*xs) -> bool:
    ds = {x.d for x in xs if isinstance(x, QuadraticReal)}
    return len(ds) <= 1 and all(is_exact(x) for x in xs)


def floor_exact(x) -> int:
    return math.floor(x)


def frac(x):
    """Fractional part of an exact scalar."""
    return x - math.floor(x)


def _floor_enclosed(make: Callable[[int], Enclosure], p_max: int) -> int:
    p = 64
    while True:
        enc = make(p)
        k = math.floor(enc.lo)
        if enc.hi < k + 1:
            return k
        if enc.lo == enc.hi:
            return k
        if p >= p_max:
            raise PrecisionExhausted(f"enclosure {enc!r} straddles {k + 1} at {p} bits")
        p = min(2 * p, p_max)


def floor_linear(m: int, theta: RealScalar, alpha: RealScalar, p_max: int = P_MAX) -> int:
    """Exact ``floor(m*theta + alpha)``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    if _common_field(theta, alpha):
        return math.floor(m * theta + alpha)
    extra = max(m, 1).bit_length() + 1
    return _floor_enclosed(lambda p: refine(theta, p + extra) * m + refine(alpha, p + 1), p_max)


def floor_of(x: RealScalar, p_max: int = P_MAX) -> int:
    if is_exact(x):
        return math.floor(x)
    return _floor_enclosed(lambda p: refine(x, p), p_max)


def frac_condition(m: int, theta: RealScalar, alpha: RealScalar, t: RealScalar,
                   p_max: int = P_MAX) -> Order:
    """Compare ``{m*theta + alpha} + {t}`` with 1."""
    if _common_field(theta, alpha, t):
        s = frac(m * theta + alpha) + frac(t)
        return Order.LESS if s < 1 else Order.GREATER if s > 1 else Order.EQUAL
    try:
        k1 = floor_linear(m, theta, alpha, p_max)
        k2 = floor_of(t, p_max)
    except PrecisionExhausted:
        return Order.UNDECIDED
    extra = max(m, 1).bit_length() + 2
    p = 64
    while True:
        enc = refine(theta, p + extra) * m + refine(alpha, p + 2) + refine(t, p + 2) - (k1 + k2)
        if enc.hi < 1:
            return Order.LESS
        if enc.lo > 1:
            return Order.GREATER
        if enc.lo == enc.hi == 1:
            return Order.EQUAL
        if p >= p_max:
            return Order.UNDECIDED
        p = min(2 * p, p_max)


def to_float_bound(x: RealScalar, p: int = 80) -> tuple[float, float]:
    """``(value, err)`` with ``|x - value| <= err`` rigorously (``err`` rounded up)."""
    enc = refine(x, p)
    mid = enc.mid
    v = float(mid)
    e = abs(Fraction(v) - mid) + enc.width / 2
    ef = float(e)
    if Fraction(ef) < e:
        ef = math.nextafter(ef, math.inf)
    return v, ef


# ---------------------------------------------------------------------------
# Parsing


def parse_rational(s: str) -> Fraction:
    s = s.strip()
    if not s:
        raise ValueError("empty rational")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed rational {s!r}") from exc


def parse_scalar(text: str) -> RealScalar:
    """Parse ``rat:p/q``, ``quad:a,b,d`` (``a + b*sqrt d``) or ``dec:<digits>``."""
    kind, sep, body = text.partition(":")
    if not sep:
        raise ValueError(f"scalar {text!r} lacks a kind prefix (rat:, quad:, dec:)")
    if kind == "rat":
        return parse_rational(body)
    if kind == "dec":
        try:
            from decimal import Decimal, InvalidOperation

            return Fraction(Decimal(body.strip()))
        except (InvalidOperation, ValueError) as exc:
            raise ValueError(f"malformed decimal {body!r}") from exc
    if kind == "quad":
        parts = body.split(",")
        if len(parts) != 3:
            raise ValueError(f"quad scalar needs a,b,d; got {body!r}")
        a, b = parse_rational(parts[0]), parse_rational(parts[1])
        try:
            d = int(parts[2])
        except ValueError as exc:
            raise ValueError(f"malformed radicand {parts[2]!r}") from exc
        if d < 1:
            raise ValueError("radicand must be a positive integer")
        return quad(a, b, d)
    raise ValueError(f"unknown scalar kind {kind!r}")


def format_scalar(x) -> str:
    if isinstance(x, (int, Fraction)):
        return f"rat:{Fraction(x)}"
    if isinstance(x, QuadraticReal):
        return f"quad:{x.a},{x.b},{x.d}"
    return repr(x)
