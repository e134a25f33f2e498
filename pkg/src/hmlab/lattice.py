"""LLL reduction over exact rationals and a bounded integer-relation search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .exact import Enclosure


class PrecisionTooLow(ArithmeticError):
    """Neither a certified relation nor a certified absence at this precision."""


def _dot(u, v) -> int:
    return sum(a * b for a, b in zip(u, v))


def gram_schmidt(basis: Sequence[Sequence[int]]) -> tuple[list[list[Fraction]], list[Fraction]]:
    """``mu`` coefficients and squared norms ``|b*_i|^2``."""
    n = len(basis)
    bstar: list[list[Fraction]] = []
    mu = [[Fraction(0)] * n for _ in range(n)]
    norms: list[Fraction] = []
    for i in range(n):
        v = [Fraction(x) for x in basis[i]]
        for j in range(i):
            mu[i][j] = Fraction(_dot(basis[i], bstar[j])) / norms[j] if norms[j] else Fraction(0)
            v = [a - mu[i][j] * b for a, b in zip(v, bstar[j])]
        bstar.append(v)
        norms.append(sum(x * x for x in v))
    return mu, norms


def lll(basis: Sequence[Sequence[int]], delta: Fraction = Fraction(3, 4)) -> list[list[int]]:
    """LLL-reduce the rows of an integer basis (textbook algorithm, exact arithmetic)."""
    b = [list(map(int, row)) for row in basis]
    n = len(b)
    if n == 0:
        return b
    mu, norms = gram_schmidt(b)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                for i in range(j + 1):
                    mu[k][i] -= q * (mu[j][i] if i < j else 1)
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            mu, norms = gram_schmidt(b)
            k = max(k - 1, 1)
    return b


# ---------------------------------------------------------------------------
# polynomial helpers over Q


def _trim(p: list) -> list:
    while p and p[-1] == 0:
        p = p[:-1]
    return p


def _poly_mod(a: list, b: list) -> list:
    a = [Fraction(x) for x in a]
    while len(a) >= len(b) and a:
        q = a[-1] / b[-1]
        s = len(a) - len(b)
        for i, c in enumerate(b):
            a[s + i] -= q * c
        a = _trim(a)
    return a


def poly_gcd(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Primitive gcd over Q with positive leading coefficient, coefficients constant-first."""
    x, y = _trim(list(a)), _trim(list(b))
    while y:
        x, y = y, _poly_mod(x, y)
    return primitive(x)


def primitive(p: Sequence) -> list[int]:
    p = _trim([Fraction(c) for c in p])
    if not p:
        return []
    den = math.lcm(*(c.denominator for c in p))
    ints = [int(c * den) for c in p]
    g = math.gcd(*ints)
    ints = [c // g for c in ints]
    return [-c for c in ints] if ints[-1] < 0 else ints


def _poly_enclosure(coeffs: Sequence[int], x: Enclosure) -> Enclosure:
    acc = Enclosure.point(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


# ---------------------------------------------------------------------------
# relation search


@dataclass(frozen=True)
class RelationReport:
    degree_bound: int
    height_bound: int
    precision: int
    outcome: str  # "relation" | "no_relation"
    coefficients: Optional[tuple[int, ...]] = None
    residual: Optional[Enclosure] = None
    threshold: Fraction = Fraction(0)
    certificate: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.outcome == "relation"

    def to_json(self) -> dict:
        out = {
            "outcome": self.outcome,
            "degree_bound": self.degree_bound,
            "height_bound": self.height_bound,
            "precision": self.precision,
            "threshold": float(self.threshold),
        }
        if self.found:
            out["coefficients"] = list(self.coefficients)
            out["residual"] = {"lo": float(self.residual.lo), "hi": float(self.residual.hi)}
        else:
            out["claim"] = (f"no integer polynomial of degree <= {self.degree_bound} with coefficients "
                            f"bounded by {self.height_bound} vanishes within the threshold at this precision")
            out["certificate"] = self.certificate
        return out


def relation_threshold(x: Enclosure, D: int, H: int) -> Fraction:
    return (D + 1) * H * x.width * max(Fraction(1), x.magnitude()) ** D


def integer_relation(x: Enclosure, D: int, H: int, p: int) -> RelationReport:
    """Search for integer ``c_0..c_D``, ``max|c_k| <= H``, with ``|sum c_k x^k|`` below the threshold."""
    if D < 1 or H < 1:
        raise ValueError("need D >= 1 and H >= 1")
    if x.width > Fraction(1, 2**p):
        raise ValueError(f"enclosure wider than 2^-{p}")
    thr = relation_threshold(x, D, H)
    xt = x.mid
    N = 2**p
    basis = [[int(i == k) for i in range(D + 1)] + [round(N * xt**k)] for k in range(D + 1)]
    red = lll(basis)

    cands = []
    for row in red:
        c = row[: D + 1]
        if not any(c) or max(map(abs, c)) > H:
            continue
        val = sum(ck * xt**k for k, ck in enumerate(c))
        res = _poly_enclosure(c, x)
        if abs(val) < thr and res.contains(0):
            cands.append(c)
    if cands:
        g = cands[0]
        for c in cands[1:]:
            g = poly_gcd(g, c)
        g = primitive(g)
        res = _poly_enclosure(g, x)
        if max(map(abs, g)) > H or not res.contains(0):
            g = primitive(cands[0])
            res = _poly_enclosure(g, x)
        return RelationReport(D, H, p, "relation", tuple(g), res, thr)

    # absence certificate: a relation c would give a lattice vector of squared
    # norm <= bound, but every nonzero lattice vector is at least min |b*_i|
    _, norms = gram_schmidt(red)
    last = N * thr + Fraction(D + 1, 2) * H
    bound = (D + 1) * H * H + last * last
    shortest = min(norms)
    if shortest > bound:
        cert = {"min_gs_norm_sq_log2": round(math.log2(shortest), 3),
                "bound_norm_sq_log2": round(math.log2(bound), 3)}
        return RelationReport(D, H, p, "no_relation", None, None, thr, cert)
    raise PrecisionTooLow(f"precision {p} cannot separate relations of degree {D}, height {H}")
