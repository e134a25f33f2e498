import json
from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from conftest import GOLDEN, SQRT3M1, THETA1
from hmlab.contfrac import (
    ContinuedFraction,
    InsufficientQuotients,
    check_approx_bounds,
    check_table,
    convergents,
    expand,
    explicit_selection,
    nearest_int_distance,
    select_indices,
    table_csv,
    table_json,
    verify_best_approx,
    window_epsilon,
)
from hmlab.exact import frac, quad, sqrt_of

CORPUS = [THETA1, GOLDEN, SQRT3M1, sqrt_of(2) - 1, sqrt_of(7) - 2, (sqrt_of(13) - 3) / 2, sqrt_of(11) - 3]


def sympy_quotients(x, n):
    """Quotients from sympy's periodic expansion of a + b sqrt d."""
    xs = sympy.Rational(x.a.numerator, x.a.denominator) + \
        sympy.Rational(x.b.numerator, x.b.denominator) * sympy.sqrt(x.d)
    it = sympy.continued_fraction_iterator(xs)
    return [int(next(it)) for _ in range(n + 1)]


def test_expand_examples():
    cf = expand(sqrt_of(2) - 1, 6)
    assert cf.quotients == (0, 2, 2, 2, 2, 2, 2)
    assert cf.periodic_tail == (1, 1)
    assert expand(THETA1, 5).quotients == (0, 3, 2, 2, 2, 2)
    with pytest.raises(ValueError):
        expand(Fraction(1, 3), 5)


@pytest.mark.parametrize("x", CORPUS)
def test_expand_matches_sympy(x):
    assert list(expand(x, 25).quotients) == sympy_quotients(x, 25)


def test_convergent_examples():
    table = convergents(expand(THETA1, 4))
    assert [table.q(n) for n in range(5)] == [1, 3, 7, 17, 41]
    # the quoted numerators of sqrt 2 convergents
    p_sqrt2 = [1, 3, 7, 17, 41, 99, 239]
    big = convergents(expand(THETA1, 6))
    assert big.denominators() == p_sqrt2
    tiny = convergents(ContinuedFraction((0, 1)))
    assert [(p, q) for _, p, q in tiny.rows] == [(0, 1), (1, 1)]


@pytest.mark.parametrize("x", CORPUS)
def test_recurrence_and_determinant(x):
    cf = expand(x, 30)
    table = convergents(cf)
    assert check_table(cf, table)
    for n in range(1, cf.N + 1):
        assert table.p(n) * table.q(n - 1) - table.p(n - 1) * table.q(n) == (-1) ** (n - 1)
        assert table.q(n) > table.q(n - 1) or n == 1


@pytest.mark.parametrize("x", CORPUS)
def test_approx_bounds_strict(x):
    cf = expand(x, 31)
    table = convergents(cf)
    for n in range(31):
        rep = check_approx_bounds(cf, table, n)
        assert rep.passed is True, rep
        assert rep.lower < rep.value < rep.upper


def test_approx_bounds_needs_next_quotient():
    cf = expand(THETA1, 4)
    with pytest.raises(InsufficientQuotients):
        check_approx_bounds(cf, convergents(cf), 4)


def brute_best(x, Q):
    recs, best = [], None
    for q in range(1, Q + 1):
        d = nearest_int_distance(x, q)
        if best is None or d < best:
            recs.append(q)
            best = d
    return recs


def test_best_approx_examples():
    table = convergents(expand(THETA1, 10))
    rep = verify_best_approx(THETA1, table, 41)
    assert rep.passed and rep.records == (1, 3, 7, 17, 41)
    assert verify_best_approx(THETA1, table, 1).passed
    rep = verify_best_approx(GOLDEN, convergents(expand(GOLDEN, 12)), 55)
    assert rep.passed and rep.records == (1, 2, 3, 5, 8, 13, 21, 34, 55)


@pytest.mark.parametrize("x", CORPUS[:4])
def test_best_approx_exact_bruteforce(x):
    table = convergents(expand(x, 12))
    Q = min(max(table.denominators()), 3000)
    assert list(verify_best_approx(x, table, Q).records) == brute_best(x, Q)


def test_nearest_distance():
    assert nearest_int_distance(THETA1, 7) == abs(7 * THETA1 - 2)
    assert nearest_int_distance(THETA1, 17) == 5 - 17 * THETA1


def test_bounded_selection_example():
    cf = expand(THETA1, 20)
    sel = select_indices(cf, "bounded", 3, convergents(cf))
    assert sel.indices == (2, 4, 6)
    assert sel.shifts == (7, 41, 239)
    assert sel.epsilon == Fraction(2, 5)
    assert select_indices(cf, "auto", 3, convergents(cf)).mode == "bounded"


def test_unbounded_on_bounded_quotients_is_refused():
    cf = expand(THETA1, 20)
    with pytest.raises(InsufficientQuotients):
        select_indices(cf, "unbounded", 3, convergents(cf))


@pytest.mark.parametrize("x", CORPUS)
def test_selection_invariants(x):
    cf = expand(x, 30)
    sel = select_indices(cf, "bounded", 10, convergents(cf))
    assert len({l % 2 for l in sel.indices}) == 1
    assert list(sel.shifts) == sorted(set(sel.shifts))
    for ell in sel.indices:
        for m in range(ell + 1):
            assert Fraction(cf[ell + 1], cf[m + 1] + 2) >= sel.epsilon
    # {r theta} sits on one side of 1/2 for the whole selection
    sides = {frac(r * x) < Fraction(1, 2) for r in sel.shifts}
    assert len(sides) == 1


def test_explicit_selection_worked_example():
    cf = expand(THETA1, 12)
    sel = explicit_selection(cf, range(0, 8), convergents(cf), first_n=0)
    assert [sel.shift(n) for n in range(7)] == [1, 3, 7, 17, 41, 99, 239]
    assert sel.epsilon == Fraction(2, 5) == window_epsilon(cf, range(0, 8))


def test_exports():
    cf = expand(THETA1, 6)
    t = convergents(cf)
    j = table_json(cf, t)
    json.dumps(j)
    assert j["quotients"] == [0, 3, 2, 2, 2, 2, 2]
    lines = table_csv(cf, t).strip().splitlines()
    assert lines[0].startswith("n,") and len(lines) == 8


@given(st.integers(2, 60).filter(lambda d: sympy.sqrt(d).is_irrational),
       st.integers(1, 5), st.integers(-3, 3))
def test_random_quadratic_expansion_property(d, b, a):
    x = quad(a, Fraction(1, b), d)
    x = frac(x)
    cf = expand(x, 15)
    table = convergents(cf)
    assert check_table(cf, table)
    assert list(cf.quotients) == sympy_quotients(x, 15)
