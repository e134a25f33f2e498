from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from hmlab.exact import Enclosure, EnclosureStream, refine, sqrt_of
from hmlab.lattice import PrecisionTooLow, gram_schmidt, integer_relation, lll, poly_gcd, primitive

PHI = (1 + sqrt_of(5)) / 2


def is_lll_reduced(b, delta=Fraction(3, 4)):
    mu, norms = gram_schmidt(b)
    for i in range(len(b)):
        for j in range(i):
            if abs(mu[i][j]) > Fraction(1, 2):
                return False
    return all(norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1] for k in range(1, len(b)))


matrices = st.integers(2, 5).flatmap(
    lambda n: st.lists(st.lists(st.integers(-50, 50), min_size=n, max_size=n), min_size=n, max_size=n))


@given(matrices)
def test_lll_reduces_and_preserves_lattice(rows):
    M = sympy.Matrix(rows)
    if M.det() == 0:
        return
    red = lll(rows)
    assert is_lll_reduced(red)
    R = sympy.Matrix(red)
    assert abs(R.det()) == abs(M.det())
    # same lattice: the change of basis is integral both ways
    T = R * M.inv()
    assert all(x.is_integer for x in T) and abs(T.det()) == 1


def test_lll_textbook_example():
    red = lll([[1, 1, 1], [-1, 0, 2], [3, 5, 6]])
    assert is_lll_reduced(red)
    assert sorted(sum(x * x for x in r) for r in red)[0] <= 3


def test_poly_helpers():
    assert primitive([Fraction(-7, 2), Fraction(3, 2)]) == [-7, 3]
    assert primitive([Fraction(1, 2), Fraction(-1, 3)]) == [-3, 2]
    # x(3x - 7) and (3x - 7)(x + 1)
    assert poly_gcd([0, -7, 3], [-7, -4, 3]) == [-7, 3]


def enc_of(x, p):
    return refine(x, p + 2).dyadic(p + 2)


@pytest.mark.parametrize("x,expected", [
    (sqrt_of(2), [-2, 0, 1]),
    (PHI, [-1, -1, 1]),
    (Fraction(7, 3), [-7, 3]),
])
def test_minimal_polynomials(x, expected):
    rep = integer_relation(enc_of(x, 128), 2, 100, 128)
    assert rep.found and list(rep.coefficients) == expected
    assert rep.residual.contains(0)


def test_agrees_with_pslq():
    for x, dps in ((sqrt_of(2), 40), (PHI, 40), (sqrt_of(3) + 1, 40)):
        rep = integer_relation(enc_of(x, 128), 2, 100, 128)
        e = refine(x, 200)
        with mpmath.workdps(dps):
            v = mpmath.mpf(e.mid.numerator) / e.mid.denominator
            rel = mpmath.pslq([1, v, v * v], maxcoeff=100, maxsteps=10**4)
        assert rel is not None
        rel = primitive(rel)
        assert rel == list(rep.coefficients)


def test_no_relation_for_pi():
    enc = EnclosureStream.from_iv(lambda iv: iv.pi, "pi").refine(258)
    rep = integer_relation(enc, 4, 1000, 256)
    assert rep.outcome == "no_relation"
    assert "claim" in rep.to_json()


def test_low_precision_is_reported():
    # at 16 bits the short lattice vectors have coefficients above H = 2,
    # yet they are too short to certify absence
    m = EnclosureStream.from_iv(lambda iv: iv.pi, "pi").refine(26).mid
    x = Enclosure(m - Fraction(1, 2**17), m + Fraction(1, 2**17))
    with pytest.raises(PrecisionTooLow):
        integer_relation(x, 4, 2, 16)


def test_low_precision_relations_are_within_threshold():
    m = EnclosureStream.from_iv(lambda iv: iv.pi, "pi").refine(26).mid
    x = Enclosure(m - Fraction(1, 2**17), m + Fraction(1, 2**17))
    rep = integer_relation(x, 4, 10**6, 16)
    # a bounded search at low precision may return a spurious relation,
    # but never one whose residual excludes 0
    assert rep.found and rep.residual.contains(0)
    assert max(map(abs, rep.coefficients)) <= 10**6


def test_input_validation():
    with pytest.raises(ValueError):
        integer_relation(enc_of(sqrt_of(2), 8), 2, 100, 64)
    with pytest.raises(ValueError):
        integer_relation(enc_of(sqrt_of(2), 64), 0, 100, 64)
