"""Subspace-Theorem witnesses for Hecke-Mahler series.

For each shift ``r_n`` the vector ``a_n`` and the linear form
``L(x) = alpha * sum_{i<=sigma} b_i x_i - sum_{i>sigma} x_i`` are built
exactly, ``L(a_n)`` is evaluated two independent ways, and the inequality
``prod |L_{i,v}(a_n)|_v <= H(a_n)^-eps`` is tested in exact arithmetic after
raising both sides to the field degree.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import mpmath

from .exact import Enclosure, QuadraticReal, format_scalar, refine
from .floorseq import DifferenceScheme, FloorSequence, IntPolynomial, SparsitySlice, w_scan, w_values
from .places import PlaceSet, abs_pow, build_places, ord_at, places_above
from .series import SeriesSpec, TailMajorant, eval_series, inverse_modulus_bound, partial_sum


class WindowTooSmall(ValueError):
    pass


def _log(x) -> mpmath.mpf:
    """Natural log of a positive exact scalar."""
    if isinstance(x, QuadraticReal):
        # x = a + b sqrt d; scale to avoid overflow for huge x
        e = refine(x, 64)
        if e.lo > 0 and e.width < e.lo / 2**40:
            return mpmath.log(mpmath.mpf(e.mid.numerator) / e.mid.denominator)
        bits = max(abs(x.a).numerator.bit_length() - abs(x.a).denominator.bit_length(), 0)
        e = refine(x, 96 + 2 * bits)
        return mpmath.log(mpmath.mpf(e.mid.numerator) / e.mid.denominator)
    x = Fraction(x)
    return mpmath.log(mpmath.mpf(x.numerator)) - mpmath.log(mpmath.mpf(x.denominator))


def _iv_log(x):
    """Rigorous interval for ``log x``, ``x`` a positive exact scalar."""
    from mpmath import iv

    e = _enc_exact(x, 64)
    saved = iv.prec
    iv.prec = 113
    try:
        lo = iv.mpf(e.lo.numerator) / iv.mpf(e.lo.denominator)
        hi = iv.mpf(e.hi.numerator) / iv.mpf(e.hi.denominator)
        return iv.log(iv.mpf([lo.a, hi.b]))
    finally:
        iv.prec = saved


def _power_product_le_one(Y, p: int, X: Fraction, q: int) -> bool:
    """``Y^p X^q <= 1`` for positive exact ``Y`` and ``X``; logs first, exact on near-ties."""
    t = _iv_log(Y) * p + _iv_log(X) * q
    if t.b < 0:
        return True
    if t.a > 0:
        return False
    return Y**p * X**q <= 1


# ---------------------------------------------------------------------------
# rho


@dataclass(frozen=True)
class Rho:
    """``rho = c log(kappa) / log|beta|`` with ``c = 2 sigma |S| deg(beta)``.

    ``m > rho r`` is decided as ``|beta|^m > kappa^(c r)``.  An override
    replaces rho by a rational for the threshold tests only.
    """

    c: int
    kappa: Fraction
    beta_abs: object
    exact: Optional[Fraction]
    override: Optional[Fraction] = None

    @classmethod
    def build(cls, sigma: int, places: PlaceSet, override: Optional[Fraction] = None) -> "Rho":
        c = 2 * sigma * places.size * places.deg_beta
        b = abs(places.beta)
        ratio = _log_ratio(places.kappa, b)
        return cls(c, places.kappa, b, None if ratio is None else c * ratio, override)

    @property
    def value(self) -> mpmath.mpf:
        if self.override is not None:
            return mpmath.mpf(self.override.numerator) / self.override.denominator
        if self.exact is not None:
            return mpmath.mpf(self.exact.numerator) / self.exact.denominator
        return self.natural_value

    @property
    def natural_value(self) -> mpmath.mpf:
        return self.c * _log(self.kappa) / _log(self.beta_abs)

    def exceeds(self, m: int, r: int) -> bool:
        if self.override is not None:
            return m > self.override * r
        return self.beta_abs**m > self.kappa ** (self.c * r)

    def at_most(self, s: int, r: int) -> bool:
        """``rho r <= s``."""
        if self.override is not None:
            return self.override * r <= s
        return self.kappa ** (self.c * r) <= self.beta_abs**s

    def rho_step(self, s: int, r: int) -> bool:
        """``kappa^(sigma r |S|) <= |beta|^(s / (2 deg beta))``, always with the true kappa and beta."""
        return self.kappa ** (self.c * r) <= self.beta_abs**s

    def to_json(self) -> dict:
        out = {"c": self.c, "kappa": str(self.kappa), "value": float(self.value)}
        if self.exact is not None:
            out["exact"] = str(self.exact)
        if self.override is not None:
            out["override"] = str(self.override)
            out["natural"] = float(self.natural_value)
        return out


def _log_ratio(kappa: Fraction, b, limit: int = 64) -> Optional[Fraction]:
    """``log(kappa)/log(b)`` as a fraction ``p/q`` when ``kappa^q = b^p`` for small ``p, q``."""
    if isinstance(b, QuadraticReal):
        return None
    b = Fraction(b)
    for q in range(1, limit + 1):
        kq = kappa**q
        # kappa^q = b^p needs p ~ q log kappa / log b
        est = q * math.log(kappa) / math.log(b)
        for p in {math.floor(est), math.ceil(est)}:
            if p >= 1 and b**p == kq:
                return Fraction(p, q)
    return None


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class WitnessParams:
    rho: Rho
    delta: int
    delta_n: Mapping[int, int]
    s_n: Mapping[int, int]
    positions: Mapping[int, tuple[int, ...]]  # m_{n,1..delta+1}
    n0: int

    def to_json(self) -> dict:
        return {"rho": self.rho.to_json(), "delta": self.delta, "n0": self.n0,
                "delta_n": {str(k): v for k, v in self.delta_n.items()},
                "s_n": {str(k): v for k, v in self.s_n.items()}}


def witness_params(sigma: int, places: PlaceSet, slices: Mapping[int, SparsitySlice],
                   n0: Optional[int] = None, rho_override: Optional[Fraction] = None) -> WitnessParams:
    """Choose ``delta`` as the least value with ``m_{n,delta} > rho r_n`` for every computed ``n >= n0``."""
    rho = Rho.build(sigma, places, rho_override)
    ns = sorted(slices)
    if not ns:
        raise WindowTooSmall("no slices")
    n0 = ns[0] if n0 is None else n0
    use = [n for n in ns if n >= n0]
    if not use:
        raise WindowTooSmall(f"no slices with n >= {n0}")
    dn = {}
    for n in use:
        s = slices[n]
        if s.window[0] != 0:
            raise ValueError("witness slices must start at m = 0")
        j = next((j for j, m in enumerate(s.positions, 1) if rho.exceeds(m, s.r)), None)
        if j is None:
            raise WindowTooSmall(f"n={n}: no nonzero position beyond rho*r_n within window {s.window}")
        dn[n] = j
    delta = max(dn.values())
    pos, sn = {}, {}
    for n in use:
        p = slices[n].positions
        if len(p) < delta + 1:
            raise WindowTooSmall(f"n={n}: window holds {len(p)} nonzero positions, need {delta + 1}")
        pos[n] = tuple(p[: delta + 1])
        sn[n] = p[delta] - 1
    return WitnessParams(rho, delta, dn, sn, pos, n0)


# ---------------------------------------------------------------------------
# vectors


@dataclass(frozen=True)
class WitnessVector:
    n: int
    r: int
    sigma: int
    delta: int
    s: int
    positions: tuple[int, ...]
    w: tuple[int, ...]  # w_{n,m_j} for j = 1..delta
    entries: tuple

    def to_json(self) -> dict:
        return {"n": self.n, "r": self.r, "delta": self.delta, "s_n": self.s,
                "positions": list(self.positions[: self.delta]), "w": list(self.w)}


def s_integral(x, places: PlaceSet) -> bool:
    """S-integrality without factoring: only primes of the denominator can obstruct."""
    if x == 0:
        return True
    d = places.d
    if isinstance(x, QuadraticReal):
        a, b = x.a, x.b
    else:
        a, b = Fraction(x), Fraction(0)
    c = math.lcm(a.denominator, b.denominator)
    X, Y = int(a * c), int(b * c)
    g = math.gcd(X, Y, c)
    X, Y, c = X // g, Y // g, c // g
    s_primes = {pl.p for pl in places.finite}
    rest = c
    for p in s_primes | {2}:
        while rest % p == 0:
            rest //= p
    if rest != 1:
        return False
    for p in sorted(s_primes | {2}):
        for pl in places_above(p, d):
            if pl not in places.finite and ord_at(pl, x) < 0:
                return False
    return True


def build_a(n: int, scheme: DifferenceScheme, source: FloorSequence, beta,
            params: WitnessParams, slc: SparsitySlice, places: Optional[PlaceSet] = None) -> WitnessVector:
    sigma, r = scheme.sigma, scheme.shift(n)
    delta = params.delta
    pos = params.positions[n]
    wmap = dict(slc.entries)
    w = tuple(wmap[m] for m in pos[:delta])
    a = [beta ** (i * r) for i in range(sigma + 1)]
    # A_K = sum_{m<K} u_m beta^(K-m), A_{K+1} = beta (A_K + u_K)
    u = source.values(0, max(sigma * r - 1, 0))
    acc, inner = Fraction(0), {0: Fraction(0)}
    for K in range(sigma * r):
        acc = beta * (acc + int(u[K]))
        if (K + 1) % r == 0:
            inner[K + 1] = acc
    a.append(sum((b * inner[i * r] for i, b in enumerate(scheme.weights)), Fraction(0)))
    a.extend(wj * beta ** (-m) for wj, m in zip(w, pos))
    vec = WitnessVector(n, r, sigma, delta, params.s_n[n], pos, w, tuple(a))
    if places is not None:
        bad = [i for i, x in enumerate(vec.entries) if not s_integral(x, places)]
        if bad:
            raise AssertionError(f"entries {bad} of a_{n} are not S-integers")
    return vec


# ---------------------------------------------------------------------------
# the linear form


def alpha_precision(vec: WitnessVector, beta) -> int:
    """Bits of the series value needed for ``L(a_n)`` with ~64 significant bits."""
    lb = math.log2(float(abs(beta)))
    return int(math.ceil((vec.s + 1 + vec.sigma * vec.r) * lb)) + 2 * vec.sigma + 80


@dataclass(frozen=True)
class LReport:
    direct: Enclosure
    tail: Enclosure
    horizon: int

    @property
    def consistent(self) -> bool:
        return self.direct.intersects(self.tail)

    @property
    def value(self) -> Enclosure:
        return self.direct.intersect(self.tail) if self.consistent else self.tail


def _enclose(x, bits: int) -> Enclosure:
    return refine(x, bits)


def eval_L(vec: WitnessVector, alpha: Enclosure, scheme: DifferenceScheme, source: FloorSequence,
           beta, f: IntPolynomial, extra_bits: int = 96) -> LReport:
    """``L(a_n)`` from the form and, independently, as ``sum_{m > s_n} w_{n,m} beta^-m``."""
    sigma = vec.sigma
    lb = math.log2(float(abs(beta)))
    bits = int(math.ceil((vec.s + 1) * lb)) + extra_bits
    E = sum((b * x for b, x in zip(scheme.weights, vec.entries[: sigma + 1])), Fraction(0))
    F = sum(vec.entries[sigma + 1:], Fraction(0))
    aE = alpha * _enclose(E, bits + 16) if isinstance(E, QuadraticReal) else alpha * E
    direct = aE - _enclose(F, bits + 16)

    # tail: exact sum up to a horizon plus a majorant for the rest
    sw = sum(abs(b) for b in scheme.weights)
    maj = TailMajorant(sw * f.coefficient_bound(), f.degree, inverse_modulus_bound(beta), sigma * vec.r)
    target = Fraction(1, 2**bits)
    h = max(maj.index_for(target), vec.s + 1)
    w = w_values(scheme, source, vec.n, (vec.s + 1, h))
    # sum_j w_{s+1+j} beta^-j, then shift by beta^-(s+1)
    S = partial_sum([int(v) for v in w], beta, h - vec.s - 1) * beta ** (-(vec.s + 1))
    R = maj.bound(h)
    te = _enclose(S, bits + 16)
    tail = Enclosure(te.lo - R, te.hi + R)
    return LReport(direct, tail, h)


# ---------------------------------------------------------------------------
# inequality and constants


@dataclass(frozen=True)
class SubspaceRecord:
    n: int
    r: int
    s: int
    delta: int
    lhs_pow: Enclosure  # lhs ** deg(K)
    height_pow: object  # H(a_n) ** deg(K), exact
    field_degree: int
    unit_products: tuple  # prod_{v in S} |a_i|_v ** deg, i <= sigma
    log_lhs: float
    log_height: float
    epsilon_realized: float
    verdict: str  # "pass" | "fail" | "undecided"
    rho_step_applicable: bool
    rho_step_ok: bool
    consistent: bool

    def to_json(self) -> dict:
        return {"n": self.n, "r_n": self.r, "delta": self.delta, "s_n": self.s,
                "lhs_log2": round(self.log_lhs / math.log(2), 6),
                "height_log2": round(self.log_height / math.log(2), 6),
                "epsilon_realized": round(self.epsilon_realized, 6),
                "verdict": self.verdict, "rho_step_applicable": self.rho_step_applicable,
                "rho_step_ok": self.rho_step_ok, "two_way_consistent": self.consistent}


def _enc_exact(x, rel_bits: int = 96) -> Enclosure:
    """Enclosure of a positive exact scalar with relative width ``<= 2^-rel_bits``."""
    if not isinstance(x, QuadraticReal):
        return Enclosure.point(x)
    k = rel_bits
    while True:
        e = refine(x, k)
        if e.lo > 0 and e.width <= e.lo / 2**rel_bits:
            return e
        k *= 2


def height_s(vec: WitnessVector, places: PlaceSet):
    """``H(a_n) ** deg`` using that ``a_{n,0} = 1`` and every entry is an S-integer."""
    total = Fraction(1)
    for pl in places.places:
        total = max(abs_pow(pl, x) for x in vec.entries if x != 0) * total
    return total


def subspace_record(vec: WitnessVector, places: PlaceSet, L: LReport, epsilon: Fraction,
                    rho: Rho) -> SubspaceRecord:
    sig1 = vec.sigma + 1
    v0 = places.archimedean[0]
    prod = Fraction(1)
    units = []
    for i, x in enumerate(vec.entries):
        pi = Fraction(1)
        for pl in places.places:
            if i == sig1 and pl == v0:
                continue
            pi = abs_pow(pl, x) * pi
        if i <= vec.sigma:
            units.append(pi)
        prod = pi * prod
    lv = L.value
    mag = Enclosure(lv.mignitude(), lv.magnitude())
    pe = _enc_exact(prod)
    X = Enclosure(pe.lo * mag.lo, pe.hi * mag.hi)
    Y = height_s(vec, places)
    p, q = epsilon.numerator, epsilon.denominator
    if _power_product_le_one(Y, p, X.hi, q):
        verdict = "pass"
    elif X.lo > 0 and not _power_product_le_one(Y, p, X.lo, q):
        verdict = "fail"
    else:
        verdict = "undecided"
    log_x = _log(X.hi) if X.hi > 0 else mpmath.mpf("-inf")
    log_y = _log(Y)
    eps = float(-log_x / log_y) if log_y > 0 else float("nan")
    applicable = rho.at_most(vec.s, vec.r)
    step_ok = rho.rho_step(vec.s, vec.r)
    return SubspaceRecord(vec.n, vec.r, vec.s, vec.delta, X, Y, places.degree, tuple(units),
                          float(log_x), float(log_y), eps, verdict, applicable,
                          step_ok or not applicable, L.consistent)


@dataclass(frozen=True)
class RatioRow:
    i: int
    j: int
    log2_ratios: tuple[tuple[int, float], ...]
    anomalies: tuple[int, ...]


@dataclass(frozen=True)
class RatioReport:
    rows: tuple[RatioRow, ...]
    note: str = ""

    @property
    def passed(self) -> bool:
        return all(not r.anomalies for r in self.rows)

    def to_json(self) -> dict:
        return {"pairs": [{"i": r.i, "j": r.j, "log2_ratio": [[n, round(v, 6)] for n, v in r.log2_ratios],
                           "anomalies": list(r.anomalies)} for r in self.rows],
                "passed": self.passed, "note": self.note}


def ratio_decay(vectors: Sequence[WitnessVector]) -> RatioReport:
    """Tabulate ``|a_{n,sigma+1+j} / a_{n,sigma+1+i}|`` across ``n`` for ``i < j``; flag any increase."""
    if len(vectors) < 3:
        raise ValueError("ratio_decay needs at least three values of n")
    delta = vectors[0].delta
    if delta < 2:
        return RatioReport((), note="delta = 1: no pairs i < j")
    rows = []
    for i in range(1, delta + 1):
        for j in range(i + 1, delta + 1):
            vals = []
            for v in vectors:
                x = abs(v.entries[v.sigma + 1 + j] / v.entries[v.sigma + 1 + i])
                vals.append((v.n, float(_log(x) / mpmath.log(2))))
            anomalies = tuple(vals[k + 1][0] for k in range(len(vals) - 1) if vals[k + 1][1] >= vals[k][1])
            rows.append(RatioRow(i, j, tuple(vals), anomalies))
    return RatioReport(tuple(rows))


@dataclass(frozen=True)
class FittedConstants:
    c2: Optional[float]
    c3: Optional[float]
    c4: Optional[float]
    c5: Optional[float]

    def to_json(self) -> dict:
        return {k: (None if v is None else round(v, 6)) for k, v in self.__dict__.items()}


def fit_constants(vectors: Sequence[WitnessVector], records: Sequence[SubspaceRecord],
                  places: PlaceSet) -> FittedConstants:
    """Smallest constants making the growth bounds hold on the computed window."""
    lb = _log(abs(places.beta))
    D = places.degree
    lk = _log(places.kappa)
    c2 = c3 = c4 = c5 = None

    def up(cur, val):
        return float(val) if cur is None else max(cur, float(val))

    for vec, rec in zip(vectors, records):
        ls = mpmath.log(vec.s) if vec.s > 1 else None
        if ls and vec.w:
            c2 = up(c2, sum(mpmath.log(abs(w)) for w in vec.w) / (vec.delta * ls))
        if vec.r > 1:
            x = vec.entries[vec.sigma + 1]
            for pl in places.places:
                if x != 0:
                    la = _log(abs_pow(pl, x)) / D
                    c3 = up(c3, (la - vec.sigma * vec.r * lk) / mpmath.log(vec.r))
        if ls:
            c4 = up(c4, (rec.log_lhs / D + vec.s * lb / (2 * places.deg_beta)) / ls)
        if vec.s > 0:
            c5 = up(c5, (rec.log_height / D) / (vec.s * lb))
    return FittedConstants(c2, c3, c4, c5)


# ---------------------------------------------------------------------------
# driver


@dataclass
class WitnessReport:
    places: PlaceSet
    params: WitnessParams
    epsilon: Fraction
    vectors: list = field(default_factory=list)
    records: list = field(default_factory=list)
    L: list = field(default_factory=list)
    ratio: Optional[RatioReport] = None
    constants: Optional[FittedConstants] = None
    alpha_precision: int = 0

    @property
    def lhs_decays(self) -> bool:
        logs = [r.log_lhs for r in self.records]
        return all(b < a for a, b in zip(logs, logs[1:]))

    @property
    def undecided(self) -> bool:
        return any(r.verdict == "undecided" for r in self.records)

    @property
    def passed(self) -> bool:
        return (all(r.consistent for r in self.records)
                and all(r.rho_step_ok for r in self.records)
                and all(r.verdict == "pass" for r in self.records))

    def to_json(self) -> dict:
        return {
            "places": self.places.to_json(),
            "params": self.params.to_json(),
            "epsilon": str(self.epsilon),
            "alpha_precision": self.alpha_precision,
            "records": [dict(r.to_json(), entries=[format_scalar(x) for x in v.entries][: v.sigma + 2] + ["..."])
                        for r, v in zip(self.records, self.vectors)],
            "lhs_decays": self.lhs_decays,
            "ratio_decay": self.ratio.to_json() if self.ratio else None,
            "constants": self.constants.to_json() if self.constants else None,
            "passed": self.passed,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["n", "r_n", "delta", "s_n", "lhs_log2", "height_log2", "epsilon_realized", "verdict"])
        for r in self.records:
            j = r.to_json()
            wr.writerow([j[k] for k in ("n", "r_n", "delta", "s_n", "lhs_log2", "height_log2",
                                         "epsilon_realized", "verdict")])
        return buf.getvalue()


def run_witness(f: IntPolynomial, theta, alpha, beta, selection, ns: Sequence[int],
                window: tuple[int, int], epsilon: Fraction = Fraction(1, 10),
                rho: Optional[Fraction] = None, n0: Optional[int] = None) -> WitnessReport:
    if window[0] != 0:
        raise ValueError("the witness window must start at m = 0")
    places = build_places(beta)
    scheme = DifferenceScheme.for_poly(f, selection)
    source = FloorSequence(f, theta, alpha)
    slices = {n: w_scan(scheme, source, n, window) for n in ns}
    params = witness_params(scheme.sigma, places, slices, n0, rho)
    use = sorted(params.s_n)
    vecs = [build_a(n, scheme, source, beta, params, slices[n], places) for n in use]
    prec = max(alpha_precision(v, beta) for v in vecs)
    alpha_val = eval_series(SeriesSpec(f, theta, alpha, beta), prec, source).enclosure
    rep = WitnessReport(places, params, Fraction(epsilon), alpha_precision=prec)
    for v in vecs:
        L = eval_L(v, alpha_val, scheme, source, beta, f)
        rep.vectors.append(v)
        rep.L.append(L)
        rep.records.append(subspace_record(v, places, L, rep.epsilon, params.rho))
    if len(vecs) >= 3:
        rep.ratio = ratio_decay(vecs)
    rep.constants = fit_constants(vecs, rep.records, places)
    return rep
