"""Continued fractions, convergents and the index selection behind the shifts r_n."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import kernels
from .exact import (
    P_MAX,
    Enclosure,
    EnclosureStream,
    PrecisionExhausted,
    QuadraticReal,
    RealScalar,
    frac,
    is_exact,
    refine,
    to_float_bound,
)


class InsufficientQuotients(ValueError):
    pass


@dataclass(frozen=True)
class ContinuedFraction:
    quotients: tuple[int, ...]
    source: Optional[RealScalar] = None
    periodic_tail: Optional[tuple[int, int]] = None

    def __post_init__(self):
        if not self.quotients:
            raise ValueError("empty continued fraction")
        if any(a < 1 for a in self.quotients[1:]):
            raise ValueError("partial quotients a_i (i >= 1) must be positive")
        if self.periodic_tail is not None:
            start, period = self.periodic_tail
            qs = self.quotients
            if any(qs[i] != qs[i - period] for i in range(start + period, len(qs))):
                raise ValueError("quotients violate the declared periodic tail")

    def __len__(self):
        return len(self.quotients)

    def __getitem__(self, i):
        return self.quotients[i]

    @property
    def N(self) -> int:
        """Index of the last computed quotient."""
        return len(self.quotients) - 1


@dataclass(frozen=True)
class ConvergentTable:
    rows: tuple[tuple[int, int, int], ...]

    def p(self, n: int) -> int:
        return self.rows[n][1]

    def q(self, n: int) -> int:
        return self.rows[n][2]

    def __len__(self):
        return len(self.rows)

    def denominators(self) -> list[int]:
        return [r[2] for r in self.rows]


def _require_irrational_unit(theta) -> None:
    if isinstance(theta, (int, Fraction)):
        raise ValueError("theta must be irrational; rationals have finite expansions")
    if isinstance(theta, QuadraticReal) and not (0 < theta < 1):
        raise ValueError("theta must lie in (0, 1)")


def expand(theta: RealScalar, N: int, p_max: int = P_MAX) -> ContinuedFraction:
    """Quotients ``a_0 = 0, a_1, ..., a_N`` of ``theta`` in (0, 1)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    _require_irrational_unit(theta)
    if isinstance(theta, QuadraticReal):
        return _expand_quadratic(theta, N)
    if isinstance(theta, EnclosureStream):
        return _expand_stream(theta, N, p_max)
    raise TypeError(f"unsupported scalar {theta!r}")


def _expand_quadratic(theta: QuadraticReal, N: int, extra: int = 256) -> ContinuedFraction:
    qs: list[int] = []
    seen: dict[QuadraticReal, int] = {}
    x = theta
    tail = None
    # keep going past N (up to `extra` steps) so the periodic tail is still found
    while len(qs) <= N + extra:
        if x in seen:
            tail = (seen[x], len(qs) - seen[x])
            break
        seen[x] = len(qs)
        a = math.floor(x)
        qs.append(a)
        x = 1 / (x - a)
    if tail is not None:
        while len(qs) <= N:
            qs.append(qs[len(qs) - tail[1]])
    return ContinuedFraction(tuple(qs[: N + 1]), theta, tail)


def _expand_stream(theta: EnclosureStream, N: int, p_max: int) -> ContinuedFraction:
    p = 64
    while True:
        enc = refine(theta, p)
        qs = _quotients_from_enclosure(enc, N)
        if len(qs) == N + 1:
            return ContinuedFraction(tuple(qs), theta, None)
        if p >= p_max:
            raise PrecisionExhausted(f"only {len(qs) - 1} quotients decidable at {p} bits")
        p = min(2 * p, p_max)


def _quotients_from_enclosure(enc: Enclosure, N: int) -> list[int]:
    lo, hi = enc.lo, enc.hi
    a0 = math.floor(lo)
    if math.floor(hi) != a0 or hi == a0 + 1:
        return []
    qs = [a0]
    lo, hi = lo - a0, hi - a0
    while len(qs) <= N:
        if lo <= 0:
            break
        ylo, yhi = 1 / hi, 1 / lo
        a = math.floor(ylo)
        if math.floor(yhi) != a or yhi == a + 1:
            break
        qs.append(a)
        lo, hi = ylo - a, yhi - a
    return qs


def convergents(cf: ContinuedFraction) -> ConvergentTable:
    rows = []
    p2, p1 = 0, 1
    q2, q1 = 1, 0
    for n, a in enumerate(cf.quotients):
        p, q = a * p1 + p2, a * q1 + q2
        rows.append((n, p, q))
        p2, p1, q2, q1 = p1, p, q1, q
    return ConvergentTable(tuple(rows))


def check_table(cf: ContinuedFraction, table: ConvergentTable) -> bool:
    """Recurrences, determinant identity and monotone denominators, row by row."""
    # seeds p_{-2}/q_{-2} = 0/1 and p_{-1}/q_{-1} = 1/0
    prev = {-2: (0, 1), -1: (1, 0)}
    prev.update({n: (p, q) for n, p, q in table.rows})
    ok = True
    for n, p, q in table.rows:
        (p1, q1), (p2, q2) = prev[n - 1], prev[n - 2]
        ok &= p == cf[n] * p1 + p2 and q == cf[n] * q1 + q2
        ok &= p * q1 - p1 * q == (-1) ** (n - 1)
        if n >= 2:
            ok &= q > q1
    return ok


# ---------------------------------------------------------------------------
# approximation inequalities


@dataclass(frozen=True)
class ApproxBoundReport:
    n: int
    lower: Fraction
    value: object
    upper: Fraction
    passed: Optional[bool]

    @property
    def decided(self) -> bool:
        return self.passed is not None


def check_approx_bounds(cf: ContinuedFraction, table: ConvergentTable, n: int,
                        p_max: int = P_MAX) -> ApproxBoundReport:
    """``1/((a_{n+1}+2) q_n) < |q_n theta - p_n| < 1/(a_{n+1} q_n)``."""
    if n + 1 > cf.N:
        raise InsufficientQuotients(f"need quotient a_{n + 1}")
    theta = cf.source
    if theta is None:
        raise ValueError("continued fraction has no source scalar")
    q, p, a = table.q(n), table.p(n), cf[n + 1]
    lower, upper = Fraction(1, (a + 2) * q), Fraction(1, a * q)
    if is_exact(theta):
        value = abs(q * theta - p)
        return ApproxBoundReport(n, lower, value, upper, bool(lower < value < upper))
    prec = 64
    while True:
        enc = refine(theta, prec + q.bit_length() + 1) * q - p
        mag = Enclosure(enc.mignitude(), enc.magnitude())
        if lower < mag.lo and mag.hi < upper:
            return ApproxBoundReport(n, lower, mag, upper, True)
        if mag.hi <= lower or mag.lo >= upper:
            return ApproxBoundReport(n, lower, mag, upper, False)
        if prec >= p_max:
            return ApproxBoundReport(n, lower, mag, upper, None)
        prec = min(2 * prec, p_max)


def nearest_int_distance(theta, q: int):
    """Exact ``||q*theta||`` for an exact scalar."""
    f = frac(q * theta)
    return min(f, 1 - f)


def _distance_enclosure(theta, q: int, p: int) -> Enclosure:
    enc = refine(theta, p + q.bit_length() + 1) * q

    def dist(x: Fraction) -> Fraction:
        f = x - math.floor(x)
        return min(f, 1 - f)

    a, b = dist(enc.lo), dist(enc.hi)
    lo, hi = min(a, b), max(a, b)
    if math.floor(enc.lo) != math.floor(enc.hi) or enc.lo == math.floor(enc.lo):
        lo = Fraction(0)
    if math.floor(2 * enc.lo) != math.floor(2 * enc.hi) and math.floor(enc.lo + Fraction(1, 2)) != math.floor(enc.hi + Fraction(1, 2)):
        hi = Fraction(1, 2)
    return Enclosure(lo, hi)


def _strictly_less(theta, q: int, j: int, p_max: int) -> Optional[bool]:
    """Exact decision of ``||q theta|| < ||j theta||``; ``None`` if undecidable."""
    if is_exact(theta):
        return nearest_int_distance(theta, q) < nearest_int_distance(theta, j)
    p = 64
    while True:
        a, b = _distance_enclosure(theta, q, p), _distance_enclosure(theta, j, p)
        if a.hi < b.lo:
            return True
        if a.lo > b.hi:
            return False
        if p >= p_max:
            return None
        p = min(2 * p, p_max)


@dataclass(frozen=True)
class BestApproxReport:
    Q: int
    records: tuple[int, ...]
    denominators: tuple[int, ...]
    passed: Optional[bool]
    exact_fallbacks: int = 0


def verify_best_approx(theta: RealScalar, table: ConvergentTable, Q: int,
                       p_max: int = P_MAX) -> BestApproxReport:
    """Brute-force the best-approximation law for ``1 <= q <= Q``."""
    if Q > max(table.denominators()):
        raise ValueError("Q exceeds the largest tabulated denominator")
    if Q < 1:
        raise ValueError("Q must be >= 1")
    tf, te = to_float_bound(theta)
    d, e = kernels.nearest_distance(1, Q, tf, te)
    records = [1]
    j = 1
    fallbacks = 0
    undecided = False
    for q in range(2, Q + 1):
        dq, eq = d[q - 1], e[q - 1]
        dj, ej = d[j - 1], e[j - 1]
        if dq + eq < dj - ej:
            better = True
        elif dq - eq > dj + ej:
            better = False
        else:
            fallbacks += 1
            better = _strictly_less(theta, q, j, p_max)
            if better is None:
                undecided = True
                continue
        if better:
            records.append(q)
            j = q
    dens = tuple(sorted({q for q in table.denominators() if q <= Q}))
    passed = None if undecided else tuple(records) == dens
    return BestApproxReport(Q, tuple(records), dens, passed, fallbacks)


# ---------------------------------------------------------------------------
# index selection


@dataclass(frozen=True)
class IndexSelection:
    """Convergent indices ``l_n`` and shifts ``r_n = q_{l_n}``.

    ``first_n`` is the index of the first entry: 1 for the bounded and
    unbounded modes, 0 for an explicit selection indexed like ``l_n = n``.
    """

    mode: str
    parity: str
    indices: tuple[int, ...]
    shifts: tuple[int, ...]
    epsilon: Fraction
    first_n: int = 1
    window: tuple[int, int] = field(default=(0, 0))

    def ell(self, n: int) -> int:
        return self.indices[n - self.first_n]

    def shift(self, n: int) -> int:
        i = n - self.first_n
        if i < 0 or i >= len(self.shifts):
            raise IndexError(f"n={n} outside the selection")
        return self.shifts[i]

    def ns(self) -> range:
        return range(self.first_n, self.first_n + len(self.indices))

    def epsilon_for(self, cf: ContinuedFraction, ns: Sequence[int]) -> Fraction:
        return window_epsilon(cf, [self.ell(n) for n in ns])

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "parity": self.parity,
            "indices": list(self.indices),
            "shifts": list(self.shifts),
            "epsilon": str(self.epsilon),
            "epsilon_scope": {"kind": "window", "first_n": self.first_n,
                              "ells": [self.indices[0], self.indices[-1]] if self.indices else []},
        }


def window_epsilon(cf: ContinuedFraction, ells: Sequence[int]) -> Fraction:
    """``min over l in ells, m <= l of a_{l+1} / (a_{m+1} + 2)``."""
    if not ells:
        raise ValueError("empty index set")
    if max(ells) + 1 > cf.N:
        raise InsufficientQuotients(f"need quotient a_{max(ells) + 1}")
    best = None
    running = 0
    prefix_max = []
    for m in range(0, max(ells) + 1):
        running = max(running, cf[m + 1])
        prefix_max.append(running)
    for ell in ells:
        v = Fraction(cf[ell + 1], prefix_max[ell] + 2)
        best = v if best is None or v < best else best
    return best


def _parity_name(ells: Sequence[int]) -> str:
    ps = {e % 2 for e in ells}
    return "mixed" if len(ps) > 1 else ("even" if ps == {0} else "odd")


def select_indices(cf: ContinuedFraction, mode: str, count: int,
                   table: Optional[ConvergentTable] = None) -> IndexSelection:
    """Choose ``l_1 < l_2 < ...`` per the bounded/unbounded recipe.

    ``mode`` is ``"bounded"``, ``"unbounded"`` or ``"auto"`` (bounded when a
    periodic tail was detected).  The returned epsilon is a window value over
    the selected indices only.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if mode == "auto":
        if cf.periodic_tail is None:
            raise ValueError("auto mode needs a detected periodic tail; declare the mode")
        mode = "bounded"
    table = table or convergents(cf)
    if mode == "bounded":
        ells = [2 * n for n in range(1, count + 1)]
        if ells[-1] + 1 > cf.N:
            raise InsufficientQuotients(f"bounded selection of {count} needs a_{ells[-1] + 1}")
        parity = "even"
    elif mode == "unbounded":
        records, running = [], 0
        for ell in range(0, cf.N):
            running = max(running, cf[ell])
            if cf[ell + 1] >= running:
                records.append(ell)
        odd = [e for e in records if e % 2]
        even = [e for e in records if e % 2 == 0]
        ells, parity = (odd, "odd") if len(odd) >= len(even) else (even, "even")
        if len(ells) < count:
            raise InsufficientQuotients(
                f"only {len(ells)} record indices of parity {parity} among {cf.N} quotients")
        ells = ells[:count]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    shifts = tuple(table.q(e) for e in ells)
    return IndexSelection(mode, parity, tuple(ells), shifts, window_epsilon(cf, ells), 1,
                          (ells[0], ells[-1]))


def explicit_selection(cf: ContinuedFraction, ells: Sequence[int],
                       table: Optional[ConvergentTable] = None, first_n: int = 0) -> IndexSelection:
    """Selection with caller-chosen indices, e.g. ``l_n = n`` for every convergent."""
    table = table or convergents(cf)
    ells = tuple(ells)
    if any(b <= a for a, b in zip(ells, ells[1:])):
        raise ValueError("indices must increase")
    return IndexSelection("explicit", _parity_name(ells), ells, tuple(table.q(e) for e in ells),
                          window_epsilon(cf, ells), first_n, (ells[0], ells[-1]))


def shift_orientation(theta, r: int) -> str:
    """``"lower"`` when ``{r theta} < 1/2`` else ``"upper"`` (exact scalars)."""
    return "lower" if frac(r * theta) < Fraction(1, 2) else "upper"


# ---------------------------------------------------------------------------
# export


def table_csv(cf: ContinuedFraction, table: ConvergentTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "a_n", "p_n", "q_n"])
    for n, p, q in table.rows:
        w.writerow([n, cf[n], p, q])
    return buf.getvalue()


def table_json(cf: ContinuedFraction, table: ConvergentTable) -> dict:
    return {
        "quotients": list(cf.quotients),
        "periodic_tail": list(cf.periodic_tail) if cf.periodic_tail else None,
        "rows": [{"n": n, "a_n": cf[n], "p_n": p, "q_n": q} for n, p, q in table.rows],
    }
