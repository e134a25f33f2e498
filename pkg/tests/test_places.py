import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st
from sympy.polys.numberfields.primes import prime_decomp

from hmlab.exact import quad, sqrt_of
from hmlab.places import (
    HeightOne,
    LaurentPoly,
    UnsupportedField,
    abs_pow,
    archimedean_places,
    build_places,
    gap_split_check,
    height,
    is_s_integer,
    ord_at,
    places_above,
    prime_kind,
    product_formula,
    support,
)

_x = sympy.symbols("x")


def rand_frac(rng, k=60):
    return Fraction(rng.randint(-k, k) or 1, rng.randint(1, k))


def rand_quad(rng, d, k=60):
    return quad(rand_frac(rng, k), rand_frac(rng, k), d)


def _vp(n, p):
    return sympy.multiplicity(p, n) if n else 10**9


def norm_valuations(x, d, p):
    """Sorted valuations at the primes above p from the norm and divisibility in O_K.

    For split p, (x) = P^a P'^b with a + b = v_p(N x) and min(a, b) the largest
    k with p^k | x in O_K.  Inert: v_p(N x) / 2.  Ramified: v_p(N x).
    """
    a, b = (x.a, x.b) if hasattr(x, "b") else (Fraction(x), Fraction(0))
    c = int(sympy.ilcm(a.denominator, b.denominator))
    X, Y = int(a * c), int(b * c)
    n = abs(X * X - d * Y * Y)
    kind = prime_kind(p, d)
    e = 2 if kind == "ramified" else 1
    shift = e * _vp(c, p) if c > 1 else 0
    vn = _vp(n, p)
    if kind == "inert":
        return [vn // 2 - shift]
    if kind == "ramified":
        return [vn - shift]
    u, v = (X - Y, 2 * Y) if d % 4 == 1 else (X, Y)
    k = min(_vp(u, p), _vp(v, p))
    return sorted([k - shift, vn - k - shift])


@pytest.mark.parametrize("d", [2, 3, 5, 7, 13, 17])
def test_splitting_types_match_sympy(d):
    # monogenic generator of O_K keeps sympy away from index divisors
    T = sympy.Poly(_x**2 - _x - (d - 1) // 4 if d % 4 == 1 else _x**2 - d, _x)
    for p in (2, 3, 5, 7, 11, 13, 17, 19):
        dec = prime_decomp(p, T)
        kind = "ramified" if dec[0].e == 2 else "inert" if dec[0].f == 2 else "split"
        assert prime_kind(p, d) == kind
        assert len(places_above(p, d)) == len(dec)


@pytest.mark.parametrize("d", [2, 3, 5, 7, 13, 17])
def test_ord_matches_norm_oracle(d):
    rng = random.Random(d)
    done = 0
    while done < 40:
        x = rand_quad(rng, d, 200)
        if not hasattr(x, "b"):
            continue
        for p in (2, 3, 5, 7, 11, 13, 17):
            ours = sorted(ord_at(pl, x) for pl in places_above(p, d))
            assert ours == norm_valuations(x, d, p), (x, p)
        done += 1


def test_prime_kinds():
    assert prime_kind(2, 2) == "ramified"
    assert prime_kind(7, 2) == "split"
    assert prime_kind(3, 2) == "inert"
    assert prime_kind(2, 5) == "inert"
    assert prime_kind(2, 17) == "split"
    assert prime_kind(5, 5) == "ramified"


def test_place_sets_examples():
    ps = build_places(Fraction(2))
    assert [pl.label for pl in ps.places] == ["inf", "2"]
    assert ps.kappa == 2
    assert [pl.label for pl in build_places(Fraction(3, 2)).places] == ["inf", "2", "3"]
    q = build_places(1 + sqrt_of(2))
    assert len(q.archimedean) == 2 and not q.finite
    with pytest.raises(UnsupportedField):
        build_places(1 + sqrt_of(10))
    with pytest.raises(ValueError):
        build_places(Fraction(1, 2))


def test_height_examples():
    assert height([Fraction(1), Fraction(3, 2)]).exact() == 3
    assert height([Fraction(2), Fraction(3)]).exact() == 3
    assert height([Fraction(1), Fraction(0)]).exact() == 1
    with pytest.raises(ValueError):
        height([0, 0])


def test_height_golden_ratio():
    # H(phi) = phi^(1/2): only the identity embedding exceeds 1, phi is a unit
    phi = (1 + sqrt_of(5)) / 2
    h = height([Fraction(1), phi])
    assert h.power == phi
    assert abs(float(h.value) - float(phi) ** 0.5) < 1e-12


def test_rational_height_oracle():
    rng = random.Random(5)
    for _ in range(200):
        nums = [rng.randint(-500, 500) for _ in range(3)]
        if not any(nums):
            continue
        g = sympy.igcd(*nums)
        assert height([Fraction(n) for n in nums]).exact() == max(abs(n) for n in nums) // g


@pytest.mark.parametrize("d", [1, 2])
def test_product_formula_random(d):
    rng = random.Random(100 + d)
    done = 0
    while done < 100:
        x = rand_frac(rng, 10**6) if d == 1 else rand_quad(rng, d, 10**4)
        if x == 0:
            continue
        assert product_formula(x)
        done += 1


@given(st.lists(st.fractions(min_value=-100, max_value=100, max_denominator=50), min_size=2, max_size=4),
       st.fractions(min_value=-50, max_value=50, max_denominator=50).filter(lambda t: t != 0))
def test_height_scaling_invariance_rational(pt, lam):
    if all(x == 0 for x in pt):
        return
    assert height(pt).power == height([lam * x for x in pt]).power


def test_height_scaling_invariance_quadratic():
    rng = random.Random(9)
    for _ in range(50):
        pt = [rand_quad(rng, 2, 40) for _ in range(3)]
        lam = rand_quad(rng, 2, 40)
        if lam == 0:
            continue
        assert height(pt, 2).power == height([lam * x for x in pt], 2).power


def test_abs_pow_and_support():
    x = Fraction(12, 5)
    ps = support([x], 1)
    assert [pl.p for pl in ps] == [2, 3, 5]
    vals = {pl.p: abs_pow(pl, x) for pl in ps}
    assert vals == {2: Fraction(1, 4), 3: Fraction(1, 3), 5: Fraction(5)}
    arch = archimedean_places(2)
    y = 1 + sqrt_of(2)
    assert {abs_pow(pl, y) for pl in arch} == {y, sqrt_of(2) - 1}


def test_s_integers():
    ps = build_places(Fraction(3, 2))
    assert is_s_integer(Fraction(9, 16), ps.places)
    assert not is_s_integer(Fraction(1, 5), ps.places)


# ---------------------------------------------------------------------------
# gap criterion


def planted(rng, beta, gap):
    """f = g + x^d1 h with g(beta) = h(beta) = 0: both blocks multiples of (x - beta)."""
    def block(shift):
        c = [rng.randint(-3, 3) or 1 for _ in range(rng.randint(1, 2))]
        # multiply by (x - beta)
        out = [Fraction(0)] * (len(c) + 1)
        for i, ci in enumerate(c):
            out[i] += -beta * ci
            out[i + 1] += ci
        return LaurentPoly.from_dense(out, shift)
    g = block(0)
    d0 = max(e for e, _ in g.terms)
    h = block(d0 + gap)
    return g + h, d0, d0 + gap


def test_gap_planted_common_root():
    rng = random.Random(21)
    beta = Fraction(2)
    for _ in range(20):
        f, d0, d1 = planted(rng, beta, 40)
        rep = gap_split_check(f, beta, d0, d1)
        assert rep.gap_ok and rep.f_root and rep.g_root and rep.h_root and rep.consistent


def test_gap_no_common_root():
    rng = random.Random(22)
    beta = Fraction(3)
    done = 0
    while done < 20:
        g = LaurentPoly.from_dense([rng.randint(-5, 5) for _ in range(3)])
        h = LaurentPoly.from_dense([rng.randint(-5, 5) for _ in range(3)], 60)
        if g.is_zero or h.is_zero or g(beta) == 0:
            continue
        f = g + h
        rep = gap_split_check(f, beta, 2, 60)
        assert rep.gap_ok and not rep.f_root and rep.consistent
        done += 1


def test_gap_quadratic_beta():
    beta = 1 + sqrt_of(2)
    # (x - beta)(x - beta') = x^2 - 2x - 1 has rational coefficients
    g = LaurentPoly.from_dense([-1, -2, 1])
    h = LaurentPoly.from_dense([-1, -2, 1], 50)
    rep = gap_split_check(g + h, beta, 2, 50)
    assert rep.gap_ok and rep.f_root and rep.g_root and rep.h_root


def test_gap_preconditions():
    f = LaurentPoly.from_dense([1, 0, 0, 1])
    with pytest.raises(HeightOne):
        gap_split_check(f, Fraction(1), 0, 3)
    with pytest.raises(ValueError):
        gap_split_check(LaurentPoly.from_dense([1, 1, 1]), Fraction(2), 0, 2)
