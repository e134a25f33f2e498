"""Floor sequences ``u_m = f(floor(m*theta + alpha))`` and their difference schemes.

Scans are exact: floors are first computed by a float kernel that carries a
rigorous error bound, and every undecided position is settled by exact
arithmetic.  Windows are inclusive ``(m_lo, m_hi)`` pairs.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .contfrac import IndexSelection
from .exact import (
    EnclosureStream,
    Order,
    PrecisionExhausted,
    RealScalar,
    floor_linear,
    frac,
    frac_condition,
    is_exact,
    refine,
    to_float_bound,
)

_INT64_SAFE = 2**62


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class IntPolynomial:
    """Dense integer polynomial, constant term first."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        cs = tuple(int(c) for c in self.coeffs)
        while len(cs) > 1 and cs[-1] == 0:
            cs = cs[:-1]
        object.__setattr__(self, "coeffs", cs or (0,))

    @classmethod
    def parse(cls, text: str) -> "IntPolynomial":
        try:
            return cls(tuple(int(c) for c in text.split(",")))
        except ValueError as exc:
            raise ValueError(f"malformed polynomial {text!r}; expected comma-separated integers") from exc

    @property
    def degree(self) -> int:
        return -1 if self.coeffs == (0,) else len(self.coeffs) - 1

    @property
    def lead(self) -> int:
        return self.coeffs[-1]

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def coefficient_bound(self) -> int:
        return sum(abs(c) for c in self.coeffs)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Evaluate on an int64 array; switches to Python ints when int64 could overflow."""
        top = int(np.max(np.abs(x))) if x.size else 0
        if self.coefficient_bound() * max(top, 1) ** max(self.degree, 0) < _INT64_SAFE:
            return kernels.poly_eval(np.asarray(self.coeffs, dtype=np.int64), x.astype(np.int64))
        xs = x.astype(object)
        return np.array([self(int(v)) for v in xs], dtype=object)

    def __str__(self) -> str:
        return ",".join(map(str, self.coeffs))


@dataclass(frozen=True)
class BivariatePolynomial:
    """Integer polynomial in ``x, y``; ``terms`` maps ``(i, j)`` to the coefficient of ``x^i y^j``."""

    terms: tuple[tuple[tuple[int, int], int], ...]

    @classmethod
    def from_dict(cls, d: dict) -> "BivariatePolynomial":
        return cls(tuple(sorted((k, v) for k, v in d.items() if v != 0)))

    def as_dict(self) -> dict:
        return dict(self.terms)

    def coefficient(self, i: int, j: int = 0) -> int:
        return self.as_dict().get((i, j), 0)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __call__(self, x, y):
        return sum(c * x**i * y**j for (i, j), c in self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (i, j), c in sorted(self.terms, key=lambda t: (-t[0][0] - t[0][1], -t[0][0])):
            mono = "*".join(s for s in (f"x^{i}" if i > 1 else "x" if i else "",
                                         f"y^{j}" if j > 1 else "y" if j else "") if s)
            parts.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts)


def _affine_compose(f: IntPolynomial, ky: int, c: int) -> dict:
    """Coefficients of ``f(x + ky*y + c)`` as a bivariate dict."""
    out: dict = {}
    for i, fi in enumerate(f.coeffs):
        if not fi:
            continue
        for j in range(i + 1):
            # x^(i-j) * (ky*y + c)^j
            cj = fi * math.comb(i, j)
            for l in range(j + 1):
                coef = cj * math.comb(j, l) * ky**l * c ** (j - l)
                if coef:
                    key = (i - j, l)
                    out[key] = out.get(key, 0) + coef
    return out


def _add_into(acc: dict, other: dict, scale: int = 1) -> None:
    for k, v in other.items():
        acc[k] = acc.get(k, 0) + scale * v


def binom_weights(sigma: int) -> tuple[int, ...]:
    """``b_k = (-1)^k C(sigma, k)`` for ``k = 0..sigma``."""
    if sigma < 1:
        raise ValueError("sigma must be >= 1")
    return tuple((-1) ** k * math.comb(sigma, k) for k in range(sigma + 1))


def _shift_x_by_y(p: dict) -> dict:
    """Substitute ``x -> x + y`` in a bivariate dict."""
    out: dict = {}
    for (i, j), c in p.items():
        for t in range(i + 1):
            key = (i - t, j + t)
            out[key] = out.get(key, 0) + c * math.comb(i, t)
    return out


def poly_diff_power(f: IntPolynomial, sigma: int) -> BivariatePolynomial:
    """``(Delta_y)^sigma f`` with ``Delta_y g(x) = g(x) - g(x + y)``, iterated in ``Z[x, y]``."""
    g = {(i, 0): c for i, c in enumerate(f.coeffs) if c}
    for _ in range(sigma):
        shifted = _shift_x_by_y(g)
        nxt = dict(g)
        _add_into(nxt, shifted, -1)
        g = {k: v for k, v in nxt.items() if v}
    return BivariatePolynomial.from_dict(g)


def difference_sum(f: IntPolynomial, sigma: int) -> BivariatePolynomial:
    """``sum_k b_k f(x + k y)``, the closed form of ``(Delta_y)^sigma f``."""
    acc: dict = {}
    for k, b in enumerate(binom_weights(sigma)):
        _add_into(acc, _affine_compose(f, k, 0), b)
    return BivariatePolynomial.from_dict(acc)


@dataclass(frozen=True)
class BoundaryPolynomial:
    poly: BivariatePolynomial
    ell: int
    orientation: str
    leading: int  # coefficient of x^(sigma-2)
    expected: int


def p_construct(f: IntPolynomial, sigma: int, ell: int, orientation: str = "lower") -> BoundaryPolynomial:
    """Polynomial giving ``w_{n,m}`` on a Boundary(ell) position.

    ``lower``: ``sum_{k<=ell} b_k (f(x+ky) - f(x+1+ky))`` evaluated at
    ``(floor(m theta+alpha), floor(r theta))``.
    ``upper`` (shifts with ``{r theta}`` near 1): ``sum_{k<=ell} b_k
    (f(x+ky) - f(x-1+ky))`` evaluated at ``(floor(m theta+alpha), ceil(r theta))``.
    """
    if not 0 <= ell <= sigma - 1:
        raise ValueError("ell must lie in 0..sigma-1")
    if f.degree < 1:
        raise ValueError("f must be non-constant")
    step = 1 if orientation == "lower" else -1
    if orientation not in ("lower", "upper"):
        raise ValueError(f"unknown orientation {orientation!r}")
    b = binom_weights(sigma)
    acc: dict = {}
    for k in range(ell + 1):
        _add_into(acc, _affine_compose(f, k, 0), b[k])
        _add_into(acc, _affine_compose(f, k, step), -b[k])
    poly = BivariatePolynomial.from_dict(acc)
    leading = poly.coefficient(sigma - 2, 0) if sigma >= 2 else 0
    expected = f.lead * (1 - sigma) * (-1) ** ell * math.comb(sigma - 1, ell) * step
    if sigma == f.degree + 1 and leading != expected:
        raise AssertionError(f"leading coefficient {leading} != {expected} for ell={ell}")
    return BoundaryPolynomial(poly, ell, orientation, leading, expected)


# ---------------------------------------------------------------------------
# floor sequences


class FloorSequence:
    """``u_m = f(floor(m*theta + alpha))`` with a cached prefix of floors."""

    def __init__(self, f: IntPolynomial, theta: RealScalar, alpha: RealScalar, check: bool = True):
        if check:
            if f.degree < 1:
                raise ValueError("f must be non-constant")
            if is_exact(theta) and not (0 < theta < 1):
                raise ValueError("theta must lie in (0, 1)")
            if isinstance(theta, Fraction):
                raise ValueError("theta must be irrational")
            if is_exact(alpha) and not (0 < alpha < 1):
                raise ValueError("alpha must lie in (0, 1)")
        self.f, self.theta, self.alpha = f, theta, alpha
        self._tf, self._te = to_float_bound(theta)
        self._af, self._ae = to_float_bound(alpha)
        self._floors = np.zeros(0, dtype=np.int64)
        self.exact_fallbacks = 0

    def _compute_floors(self, lo: int, count: int) -> np.ndarray:
        fl, fr, err = kernels.floor_affine(lo, count, self._tf, self._af, self._te, self._ae)
        bad = np.flatnonzero(~((fr > err) & (fr < 1.0 - err)))
        self.exact_fallbacks += bad.size
        for i in bad:
            fl[i] = floor_linear(lo + int(i), self.theta, self.alpha)
        return fl

    def floors(self, lo: int, hi: int) -> np.ndarray:
        """Floors for ``m`` in ``[lo, hi]`` (inclusive)."""
        if lo < 0 or hi < lo - 1:
            raise ValueError("bad window")
        have = self._floors.shape[0]
        if hi >= have:
            if lo > 2 * max(have, 1024):
                return self._compute_floors(lo, hi - lo + 1)
            ext = self._compute_floors(have, hi + 1 - have)
            self._floors = np.concatenate([self._floors, ext])
        return self._floors[lo: hi + 1]

    def values(self, lo: int, hi: int) -> np.ndarray:
        return self.f.evaluate(self.floors(lo, hi))

    def __getitem__(self, m: int) -> int:
        return int(self.values(m, m)[0])


def u_seq(f: IntPolynomial, theta: RealScalar, alpha: RealScalar, window: tuple[int, int]) -> list[int]:
    lo, hi = window
    return [int(v) for v in FloorSequence(f, theta, alpha).values(lo, hi)]


# ---------------------------------------------------------------------------
# difference schemes and sparsity


@dataclass(frozen=True)
class DifferenceScheme:
    sigma: int
    weights: tuple[int, ...]
    selection: IndexSelection
    degenerate: bool = False

    @classmethod
    def for_poly(cls, f: IntPolynomial, selection: IndexSelection, sigma: Optional[int] = None) -> "DifferenceScheme":
        s = f.degree + 1 if sigma is None else sigma
        return cls(s, binom_weights(s), selection, degenerate=s != f.degree + 1)

    def shift(self, n: int) -> int:
        return self.selection.shift(n)


@dataclass(frozen=True)
class SparsitySlice:
    n: int
    r: int
    window: tuple[int, int]
    entries: tuple[tuple[int, int], ...]
    mu: Optional[int]

    @property
    def positions(self) -> list[int]:
        return [m for m, _ in self.entries]

    def to_json(self) -> dict:
        return {"n": self.n, "r": self.r, "window": list(self.window),
                "entries": [[m, w] for m, w in self.entries], "mu": self.mu}

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["n", "r", "m", "w"])
        for m, w in self.entries:
            wr.writerow([self.n, self.r, m, w])
        return buf.getvalue()


def w_values(scheme: DifferenceScheme, source: FloorSequence, n: int,
             window: tuple[int, int]) -> np.ndarray:
    """Dense ``w_{n,m}`` for ``m`` in the inclusive window."""
    lo, hi = window
    r = scheme.shift(n)
    u = source.values(lo, hi + scheme.sigma * r)
    weights = np.asarray(scheme.weights, dtype=np.int64)
    top = int(np.max(np.abs(u))) if u.size else 0
    if u.dtype != object and sum(abs(b) for b in scheme.weights) * max(top, 1) < _INT64_SAFE:
        return kernels.difference_scan(u.astype(np.int64), weights, r, hi - lo + 1)
    return kernels.difference_scan_numpy(u.astype(object), weights.astype(object), r, hi - lo + 1)


def w_scan(scheme: DifferenceScheme, source: FloorSequence, n: int,
           window: tuple[int, int]) -> SparsitySlice:
    lo, hi = window
    w = w_values(scheme, source, n, window)
    if w.dtype == object:
        pos = np.array([i for i, v in enumerate(w) if v != 0], dtype=np.int64)
        gaps = np.diff(pos)
    else:
        pos, gaps = kernels.nonzero_gaps(w)
    entries = tuple((lo + int(i), int(w[i])) for i in pos)
    mu = int(gaps.min()) if gaps.size else None
    return SparsitySlice(n, scheme.shift(n), (lo, hi), entries, mu)


@dataclass(frozen=True)
class GapReport:
    min_gap: int
    bound: Fraction
    passed: bool
    violations: tuple[tuple[int, int], ...] = ()


def gap_check(slc: SparsitySlice, epsilon: Fraction, sigma: int, r: Optional[int] = None) -> GapReport:
    """Every consecutive gap in the slice must be at least ``epsilon * r / sigma``."""
    if len(slc.entries) < 2:
        raise ValueError("gap_check needs at least two nonzero positions")
    r = slc.r if r is None else r
    bound = Fraction(epsilon) * r / sigma
    pos = slc.positions
    bad = tuple((a, b) for a, b in zip(pos, pos[1:]) if b - a < bound)
    return GapReport(min(b - a for a, b in zip(pos, pos[1:])), bound, not bad, bad)


@dataclass(frozen=True)
class VariationReport:
    c: Fraction
    per_slice: tuple[tuple[int, Fraction], ...]
    argmax: Optional[tuple[int, int, int]]
    passed: bool
    c0: int


def _slice_variation(slc: SparsitySlice, c0: int) -> tuple[Fraction, Optional[tuple[int, int]]]:
    if len(slc.entries) < 2:
        return Fraction(0), None
    m = np.array([e[0] for e in slc.entries], dtype=np.float64)
    a = np.abs(np.array([float(e[1]) for e in slc.entries]))
    diff = m[None, :] - m[:, None]  # [i, j] = m_j - m_i
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = a[None, :] / (np.where(diff > 0, diff, 1.0) ** c0 + a[:, None])
    ratio = np.where(diff > 0, ratio, -1.0)
    top = ratio.max()
    # settle near-ties of the float maximum exactly
    cand = np.argwhere(ratio >= top * (1 - 1e-9))
    best, arg = Fraction(-1), None
    for i, j in cand:
        mi, wi = slc.entries[i]
        mj, wj = slc.entries[j]
        v = Fraction(abs(wj), (mj - mi) ** c0 + abs(wi))
        if v > best:
            best, arg = v, (mj, mi)
    return best, arg


def variation_fit(slices: Sequence[SparsitySlice], c0: int, bound: Optional[Fraction] = None) -> VariationReport:
    """Fitted constant of ``|w_{m'}| <= c ((m'-m)^c0 + |w_m|)`` over all pairs ``m' > m``."""
    if not slices:
        raise ValueError("no slices")
    if c0 < 0 or int(c0) != c0:
        raise ValueError("c0 must be a nonnegative integer")
    c0 = int(c0)
    per, best, arg = [], Fraction(0), None
    for s in slices:
        v, a = _slice_variation(s, c0)
        per.append((s.n, v))
        if v > best:
            best, arg = v, (s.n, *a)
    passed = bound is None or best <= bound
    return VariationReport(best, tuple(per), arg, passed, c0)


# ---------------------------------------------------------------------------
# case classification


@dataclass(frozen=True)
class Case:
    kind: str  # "zero" | "boundary" | "undecided"
    ell: Optional[int] = None
    orientation: str = "lower"

    def code(self, sigma: int) -> int:
        return {"zero": sigma, "undecided": -1}.get(self.kind, self.ell)


ZERO, UNDECIDED = "zero", "undecided"


def orientation_for(theta: RealScalar, r: int, sigma: int) -> str:
    """Which side ``r theta`` approaches an integer from, checked against ``sigma``."""
    if is_exact(theta):
        t = frac(r * theta)
        if sigma * t < 1:
            return "lower"
        if sigma * (1 - t) < 1:
            return "upper"
        raise ValueError(f"sigma*||r theta|| >= 1 for r={r}; shift too small for classification")
    enc = refine(theta, 128 + r.bit_length()) * r
    k = math.floor(enc.lo)
    t = enc - k
    if t.hi * sigma < 1:
        return "lower"
    if (1 - t.lo) * sigma < 1:
        return "upper"
    raise ValueError(f"cannot certify sigma*||r theta|| < 1 for r={r}")


def _scaled(theta: RealScalar, c: int):
    if is_exact(theta):
        return c * theta
    bits = max(c, 1).bit_length() + 1
    return EnclosureStream(lambda p: refine(theta, p + bits) * c, label=f"{c}*theta")


def classify(m: int, scheme: DifferenceScheme, n: int, theta: RealScalar, alpha: RealScalar) -> Case:
    """Case analysis of ``w_{n,m}`` from the fractional parts alone."""
    sigma, r = scheme.sigma, scheme.shift(n)
    orient = orientation_for(theta, r, sigma)
    count = 0
    for k in range(1, sigma + 1):
        o = frac_condition(m, theta, alpha, _scaled(theta, k * r))
        if o in (Order.EQUAL, Order.UNDECIDED):
            return Case(UNDECIDED, None, orient)
        hit = o is Order.LESS if orient == "lower" else o is Order.GREATER
        if not hit:
            break
        count += 1
    if count == sigma:
        return Case(ZERO, None, orient)
    return Case("boundary", count, orient)


def classify_window(scheme: DifferenceScheme, source: FloorSequence, n: int,
                    window: tuple[int, int]) -> np.ndarray:
    """Vectorised :func:`classify`: codes ``ell`` (boundary), ``sigma`` (zero), ``-1`` (undecided)."""
    lo, hi = window
    sigma, r = scheme.sigma, scheme.shift(n)
    theta, alpha = source.theta, source.alpha
    orient = orientation_for(theta, r, sigma)
    _, fr, err = kernels.floor_affine(lo, hi - lo + 1, source._tf, source._af, source._te, source._ae)
    codes = np.zeros(hi - lo + 1, dtype=np.int64)
    unsure = np.zeros(hi - lo + 1, dtype=bool)
    for k in range(1, sigma + 1):
        if is_exact(theta):
            ck = 1 - frac(k * r * theta)
        else:
            ck = 1 - (_frac_stream(theta, k * r))
        cf, ce = to_float_bound(ck)
        if orient == "lower":
            codes += fr < cf
        else:
            codes += fr > cf
        unsure |= np.abs(fr - cf) <= err + ce
    # the float pass counts thresholds crossed; certified iff no threshold is close
    for i in np.flatnonzero(unsure):
        codes[i] = classify(lo + int(i), scheme, n, theta, alpha).code(sigma)
    return codes


def _frac_stream(theta: RealScalar, c: int):
    s = _scaled(theta, c)
    k = math.floor(refine(s, 128).mid)
    return EnclosureStream(lambda p: refine(s, p) - k, label=f"frac({c}*theta)")


def boundary_args(theta: RealScalar, r: int, orient: str) -> int:
    """Second argument ``y`` of the boundary polynomial: ``floor(r theta)`` or ``ceil``."""
    from .exact import floor_of

    y = floor_of(_scaled(theta, r))
    return y if orient == "lower" else y + 1


@dataclass(frozen=True)
class ConsistencyReport:
    n: int
    r: int
    orientation: str
    zero: int
    boundary: tuple[int, ...]
    undecided: int
    mismatches: tuple[tuple[int, int, int], ...]  # (m, scanned w, predicted w)

    @property
    def passed(self) -> bool:
        return not self.mismatches and not self.undecided


def claim3_consistency(f: IntPolynomial, scheme: DifferenceScheme, source: FloorSequence, n: int,
                       window: tuple[int, int]) -> ConsistencyReport:
    """Check the scan against the case analysis at every ``m`` of the window."""
    lo, hi = window
    sigma, r = scheme.sigma, scheme.shift(n)
    orient = orientation_for(source.theta, r, sigma)
    codes = classify_window(scheme, source, n, window)
    w = w_values(scheme, source, n, window)
    X = source.floors(lo, hi)
    y = boundary_args(source.theta, r, orient)
    polys = [p_construct(f, sigma, ell, orient).poly for ell in range(sigma)]
    mism = []
    counts = [0] * sigma
    zero = int(np.sum(codes == sigma))
    undecided = int(np.sum(codes < 0))
    for i in range(hi - lo + 1):
        c = int(codes[i])
        if c < 0:
            continue
        wi = int(w[i])
        if c == sigma:
            if wi != 0:
                mism.append((lo + i, wi, 0))
            continue
        counts[c] += 1
        pred = polys[c](int(X[i]), y)
        if pred != wi:
            mism.append((lo + i, wi, pred))
    return ConsistencyReport(n, r, orient, zero, tuple(counts), undecided, tuple(mism))


@dataclass(frozen=True)
class GrowthReport:
    M: Optional[int]
    eps1: Optional[Fraction]
    eps2: Optional[Fraction]
    count: int
    passed: bool


def claim3_growth(scheme: DifferenceScheme, source: FloorSequence, ns: Iterable[int],
                  window: tuple[int, int], M: Optional[int] = None) -> GrowthReport:
    """Fit ``eps1 m^(sigma-2) <= |w_{n,m}| <= eps2 m^(sigma-2)`` on Boundary positions ``m > M r_n``.

    With ``M=None`` the least ``M`` is chosen such that no Boundary position
    beyond ``M r_n`` has ``w = 0``.
    """
    lo, hi = window
    sigma = scheme.sigma
    recs = []  # (m, r, w) on Boundary positions
    for n in ns:
        codes = classify_window(scheme, source, n, window)
        w = w_values(scheme, source, n, window)
        r = scheme.shift(n)
        for i in np.flatnonzero((codes >= 0) & (codes < sigma)):
            recs.append((lo + int(i), r, int(w[i])))
    if M is None:
        zeros = [m // r for m, r, wv in recs if wv == 0]
        M = max(zeros) + 1 if zeros else 0
    used = [(m, wv) for m, r, wv in recs if m > M * r and m > 0]
    if not used:
        return GrowthReport(M, None, None, 0, False)
    ratios = [Fraction(abs(wv), m ** (sigma - 2)) for m, wv in used]
    e1, e2 = min(ratios), max(ratios)
    return GrowthReport(M, e1, e2, len(used), e1 > 0)


# ---------------------------------------------------------------------------
# the Diophantine claim


@dataclass(frozen=True)
class DioReport:
    n: int
    r: int
    threshold: object
    bound: Fraction
    qualifying: tuple[int, ...]
    violations: tuple[int, ...]
    passed: bool


def dio_check(theta: RealScalar, selection: IndexSelection, n: int, sigma: int) -> DioReport:
    """Every ``0 < q < r_n`` with ``||q theta|| < sigma ||r_n theta||`` has ``q >= eps r_n / sigma``."""
    if not is_exact(theta):
        raise ValueError("dio_check needs an exact theta")
    from .contfrac import nearest_int_distance

    r = selection.shift(n)
    thr = sigma * nearest_int_distance(theta, r)
    bound = selection.epsilon * r / sigma
    if r <= 1:
        return DioReport(n, r, thr, bound, (), (), True)
    tf, te = to_float_bound(theta)
    tv, tev = to_float_bound(thr)
    d, e = kernels.nearest_distance(1, r - 1, tf, te)
    qual = []
    for i in range(r - 1):
        if d[i] + e[i] < tv - tev:
            qual.append(i + 1)
        elif d[i] - e[i] > tv + tev:
            continue
        elif nearest_int_distance(theta, i + 1) < thr:
            qual.append(i + 1)
    viol = tuple(q for q in qual if q < bound)
    return DioReport(n, r, thr, bound, tuple(qual), viol, not viol)


# ---------------------------------------------------------------------------
# combined report


@dataclass
class ConditionStarReport:
    sigma: int
    epsilon: Fraction
    window: tuple[int, int]
    slices: list = field(default_factory=list)
    gaps: dict = field(default_factory=dict)
    consistency: dict = field(default_factory=dict)
    dio: dict = field(default_factory=dict)
    variation: Optional[VariationReport] = None
    growth: Optional[GrowthReport] = None
    undecided: bool = False
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        ok = all(g.passed for g in self.gaps.values())
        ok &= all(c.passed for c in self.consistency.values())
        ok &= all(d.passed for d in self.dio.values())
        ok &= self.variation is None or self.variation.passed
        return ok


def verify_condition_star(f: IntPolynomial, theta: RealScalar, alpha: RealScalar,
                          selection: IndexSelection, ns: Sequence[int], window: tuple[int, int],
                          epsilon: Optional[Fraction] = None, c0: Optional[int] = None,
                          sigma: Optional[int] = None, growth: bool = True) -> ConditionStarReport:
    scheme = DifferenceScheme.for_poly(f, selection, sigma)
    source = FloorSequence(f, theta, alpha)
    eps = Fraction(epsilon) if epsilon is not None else selection.epsilon
    rep = ConditionStarReport(scheme.sigma, eps, window)
    if scheme.degenerate:
        rep.notes.append(f"sigma={scheme.sigma} differs from deg(f)+1; case analysis skipped")
    for n in ns:
        slc = w_scan(scheme, source, n, window)
        rep.slices.append(slc)
        if len(slc.entries) >= 2:
            rep.gaps[n] = gap_check(slc, eps, scheme.sigma)
        else:
            rep.notes.append(f"n={n}: fewer than two nonzero positions in the window")
        if not scheme.degenerate:
            try:
                rep.consistency[n] = claim3_consistency(f, scheme, source, n, window)
            except ValueError as exc:
                rep.notes.append(f"n={n}: {exc}")
            except PrecisionExhausted:
                rep.undecided = True
        if is_exact(theta):
            rep.dio[n] = dio_check(theta, selection, n, scheme.sigma)
    rep.undecided |= any(c.undecided for c in rep.consistency.values())
    rep.variation = variation_fit(rep.slices, max(scheme.sigma - 2, 0) if c0 is None else c0)
    if growth and not scheme.degenerate and rep.consistency:
        rep.growth = claim3_growth(scheme, source, list(rep.consistency), window)
    return rep
