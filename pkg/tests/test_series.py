from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import GOLDEN, THETA1
from hmlab.exact import QuadraticReal, sqrt_of
from hmlab.floorseq import FloorSequence, IntPolynomial
from hmlab.lattice import integer_relation
from hmlab.series import (
    DivergentSpec,
    SeriesSpec,
    TailMajorant,
    eval_series,
    partial_sum,
    u_majorant,
)

X1 = IntPolynomial((0, 1))


def to_mp(x):
    if isinstance(x, QuadraticReal):
        return mpmath.mpf(x.a.numerator) / x.a.denominator + \
            mpmath.mpf(x.b.numerator) / x.b.denominator * mpmath.sqrt(x.d)
    x = Fraction(x)
    return mpmath.mpf(x.numerator) / x.denominator


def naive_value(f, theta, alpha, beta, dps=200):
    """Direct summation with mpmath floors and an interval tail bound."""
    with mpmath.workdps(dps + 30):
        t, a, b = to_mp(theta), to_mp(alpha), to_mp(beta)
        q = 1 / abs(b)
        M = 10
        while f.coefficient_bound() * (M + 2) ** f.degree * q**M / (1 - q * 1.01) > mpmath.mpf(10) ** -(dps + 5):
            M += 10
        terms = [f(int(mpmath.floor(m * t + a))) * b**-m for m in range(M + 1)]
        return mpmath.fsum(terms), mpmath.mpf(10) ** -(dps + 5)


def ex1(beta=Fraction(2), f=X1):
    return SeriesSpec(f, THETA1, THETA1, beta)


def test_spec_validation():
    with pytest.raises(DivergentSpec):
        SeriesSpec(X1, THETA1, THETA1, Fraction(1))
    with pytest.raises(ValueError):
        SeriesSpec(IntPolynomial((3,)), THETA1, THETA1, Fraction(2))
    with pytest.raises(ValueError):
        SeriesSpec(X1, Fraction(1, 3), THETA1, Fraction(2))


def test_nonnegative_lower_bound():
    v = eval_series(SeriesSpec(X1, GOLDEN, Fraction(1, 3), Fraction(2)), 64)
    assert v.enclosure.lo >= 0


@pytest.mark.parametrize("p", [64, 128, 256])
def test_worked_example_value_against_naive_sum(p):
    v = eval_series(ex1(), p)
    assert v.enclosure.width <= Fraction(1, 2**p)
    ref, err = naive_value(X1, THETA1, THETA1, 2)
    with mpmath.workdps(230):
        assert to_mp(v.enclosure.lo) - err <= ref <= to_mp(v.enclosure.hi) + err


def test_nesting_across_precisions():
    for spec in (ex1(), ex1(Fraction(3, 2)), ex1(1 + sqrt_of(2)), ex1(Fraction(2), IntPolynomial((1, -2, 0, 1)))):
        prev = None
        for p in (32, 64, 128, 256):
            e = eval_series(spec, p).enclosure
            if prev is not None:
                assert prev.lo <= e.lo <= e.hi <= prev.hi
            prev = e


def test_quadratic_beta_value():
    beta = 1 + sqrt_of(2)
    v = eval_series(ex1(beta, IntPolynomial((0, 0, 1))), 128)
    ref, err = naive_value(IntPolynomial((0, 0, 1)), THETA1, THETA1, beta, dps=60)
    with mpmath.workdps(80):
        assert to_mp(v.enclosure.lo) - err <= ref <= to_mp(v.enclosure.hi) + err


def test_rational_beta_partial_sums_are_exact():
    v = eval_series(ex1(Fraction(5, 2)), 96)
    assert v.exact_partial and v.enclosure.lo < v.enclosure.hi
    src = FloorSequence(X1, THETA1, THETA1)
    u = src.values(0, 40)
    s = partial_sum(u, Fraction(5, 2), 40)
    assert s == sum(Fraction(int(u[m])) * Fraction(2, 5) ** m for m in range(41))


def test_quadratic_partial_sum_matches_naive():
    beta = 2 + sqrt_of(3)
    u = FloorSequence(X1, THETA1, THETA1).values(0, 60)
    s = partial_sum(u, beta, 60)
    naive = sum((int(u[m]) * beta.inverse() ** m for m in range(61)), Fraction(0))
    assert s == naive


def test_majorant_dominates_tail():
    beta = Fraction(2)
    maj = u_majorant(IntPolynomial((0, 0, 1)), beta)
    src = FloorSequence(IntPolynomial((0, 0, 1)), THETA1, THETA1)
    u = src.values(0, 2000)
    for M in (10, 50, 200):
        tail = sum(Fraction(abs(int(u[m])), 2**m) for m in range(M + 1, 2001))
        assert tail <= maj.bound(M)


@given(st.integers(0, 4), st.fractions(min_value=Fraction(1, 3), max_value=Fraction(9, 10),
                                       max_denominator=20), st.integers(0, 3))
@settings(max_examples=60)
def test_majorant_bound_decreases(D, q, shift):
    maj = TailMajorant(3, D, q, shift)
    M0 = maj.min_index()
    bounds = [maj.bound(M) for M in range(M0, M0 + 30)]
    assert all(b2 < b1 for b1, b2 in zip(bounds, bounds[1:]))
    target = Fraction(1, 10**6)
    M = maj.index_for(target)
    assert maj.bound(M) <= target
    assert M == M0 or maj.bound(M - 1) > target


def test_doubling_precision():
    v1, v2 = eval_series(ex1(), 128), eval_series(ex1(), 256)
    assert v2.tail_M <= 2 * v1.tail_M + 20
    assert v2.enclosure.width * 2**128 <= v1.enclosure.width


def test_control_relations_small_height():
    from hmlab.exact import refine
    rep = integer_relation(refine(sqrt_of(2), 130).dyadic(130), 2, 10, 128)
    assert list(rep.coefficients) == [-2, 0, 1]
    rep = integer_relation(refine(Fraction(7, 3), 130).dyadic(130), 1, 10, 128)
    assert list(rep.coefficients) in ([7, -3], [-7, 3])


def test_worked_example_no_relation_with_pslq_cross_check():
    v = eval_series(ex1(), 256)
    rep = integer_relation(v.enclosure, 4, 10**6, 256)
    assert rep.outcome == "no_relation"
    j = rep.to_json()
    assert (j["degree_bound"], j["height_bound"], j["precision"]) == (4, 10**6, 256)
    # a different reduction algorithm at higher precision agrees
    hi = eval_series(ex1(), 640).enclosure.mid
    with mpmath.workprec(640):
        x = mpmath.mpf(hi.numerator) / hi.denominator
        assert mpmath.pslq([x**k for k in range(5)], maxcoeff=10**6, maxsteps=10**5) is None


def test_to_json_shape():
    j = eval_series(ex1(), 64).to_json()
    assert set(j) == {"spec", "precision", "enclosure", "tail_M"}
    assert set(j["enclosure"]) == {"lo", "hi"}
