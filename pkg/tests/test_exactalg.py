from fractions import Fraction as F

import mpmath
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from pivlab.errors import DomainError, UnsupportedInputError
from pivlab.exactalg import (
    ExpPoly,
    Poly,
    RatFunc,
    Z,
    bareiss_det,
    divides,
    exppoly_from_json,
    exppoly_to_json,
    gcd,
    is_squarefree,
    parse_ratfunc,
    poly_from_json,
    poly_to_json,
    ratfunc_from_json,
    ratfunc_normalize,
    ratfunc_to_json,
    squarefree_decomposition,
    taylor_shift,
    wronskian,
)

rationals = st.builds(F, st.integers(-60, 60), st.integers(1, 12))
polys = st.lists(rationals, max_size=9).map(Poly)
nonzero = st.lists(rationals, min_size=1, max_size=9).map(lambda cs: Poly(cs + [F(1)]))


def P(*cs):
    return Poly(cs)


def to_sympy(p, z=sympy.Symbol("z")):
    return sum(sympy.Rational(c.numerator, c.denominator) * z ** k for k, c in enumerate(p.coeffs))


# --- wronskian ---

def test_wronskian_single_entry():
    assert wronskian([Z]) == Z


def test_wronskian_adler_moser_pair():
    tau = F(3, 7)
    assert wronskian([Z, P(tau, 0, 0, F(1, 6))]) == P(-tau, 0, 0, F(1, 3))


def test_wronskian_hermite_pair():
    assert wronskian([P(0, 2), P(-2, 0, 4)]) == P(4, 0, 8)


def test_wronskian_exp_column():
    w = wronskian([Z, ExpPoly(1, P(1))])
    assert isinstance(w, ExpPoly) and w.rate == 1 and w.poly == P(-1, 1)


def test_wronskian_rejects_two_exponentials():
    with pytest.raises(UnsupportedInputError):
        wronskian([ExpPoly(1, P(1)), ExpPoly(2, P(1))])


@settings(max_examples=60, deadline=None)
@given(polys, polys)
def test_wronskian_of_two_is_pq_minus_qp(p, q):
    assert wronskian([p, q]) == p * q.deriv() - p.deriv() * q


@settings(max_examples=40, deadline=None)
@given(polys, polys, rationals)
def test_wronskian_column_operation_invariance(p, q, c):
    assert wronskian([p, q + p * c]) == wronskian([p, q])


@settings(max_examples=15, deadline=None)
@given(st.lists(polys, min_size=3, max_size=3))
def test_wronskian_matches_sympy_determinant(ps):
    z = sympy.Symbol("z")
    exprs = [to_sympy(p) for p in ps]
    m = sympy.Matrix(3, 3, lambda i, j: sympy.diff(exprs[j], z, i))
    assert sympy.expand(m.det() - to_sympy(wronskian(ps))) == 0


def test_bareiss_needs_pivoting():
    m = [[P(0), P(1)], [P(1), P(0)]]
    assert bareiss_det(m) == P(-1)


# --- divisibility ---

def test_divides_examples():
    assert divides(Z, P(0, 0, 0, 1))
    assert divides(P(-2, 0, 4), P(8, 0, -16))
    assert not divides(P(-2, 0, 4), P(9, 0, -16))


def test_divides_zero_divisor():
    with pytest.raises(DomainError):
        divides(Poly(), Z)


@settings(max_examples=200, deadline=None)
@given(st.lists(rationals, max_size=13).map(Poly), nonzero)
def test_divides_agrees_with_sympy_remainder(p, d):
    z = sympy.Symbol("z")
    rem = sympy.rem(to_sympy(p), to_sympy(d), z)
    assert divides(d, p) == (sympy.simplify(rem) == 0)


def test_gcd_and_squarefree():
    a = P(-1, 1) ** 2 * P(2, 1)
    assert gcd(a, a.deriv()) == P(-1, 1)
    assert squarefree_decomposition(a) == [(P(2, 1), 1), (P(-1, 1), 2)]
    assert not is_squarefree(a) and is_squarefree(P(2, 1) * P(-1, 1))


# --- taylor shift ---

def test_taylor_shift_examples():
    assert taylor_shift(P(0, 0, 1), 0) == (0, 0, 1)
    assert taylor_shift(P(0, 0, 1), 1) == (1, 2, 1)
    assert taylor_shift(P(-2, 0, 4), F(1, 2)) == (-1, 4, 4)


@settings(max_examples=60, deadline=None)
@given(polys, rationals)
def test_taylor_shift_roundtrip(p, a):
    assert Poly(taylor_shift(Poly(taylor_shift(p, a)), -a)) == p


def test_taylor_shift_multiprecision():
    with mpmath.workprec(200):
        a = mpmath.mpc(0, 1) / mpmath.sqrt(2)
        cs = taylor_shift(P(4, 0, 8), a, 200)
        assert abs(cs[0]) < mpmath.mpf(10) ** -55
        assert abs(cs[1] - 16 * a) < mpmath.mpf(10) ** -55


# --- rational functions ---

def test_normalize_examples():
    assert ratfunc_normalize(P(-1, 0, 1), P(-1, 1)) == RatFunc(P(1, 1))
    assert ratfunc_normalize(P(0, 2), P(2)) == RatFunc(Z)
    assert RatFunc(P(1), Z).deriv() == RatFunc(P(-1), P(0, 0, 1))


def test_zero_denominator():
    with pytest.raises(DomainError):
        RatFunc(P(1), Poly())


def test_normal_form_invariants():
    f = RatFunc(P(0, 6), P(0, 0, 3))
    assert f.den.lc == 1 and gcd(f.num, f.den).degree == 0


@settings(max_examples=40, deadline=None)
@given(polys, nonzero, polys, nonzero)
def test_product_rule(a, b, c, d):
    f, g = RatFunc(a, b), RatFunc(c, d)
    assert (f * g).deriv() == f.deriv() * g + f * g.deriv()


def test_parse_ratfunc():
    assert parse_ratfunc("1/z - z") == RatFunc(P(1, 0, -1), Z)
    assert parse_ratfunc("2*z^2 + z**3/3") == RatFunc(P(0, 0, 2, F(1, 3)))
    assert parse_ratfunc("0.5") == RatFunc(P(F(1, 2)))
    with pytest.raises(ValueError):
        parse_ratfunc("sin(z)")
    with pytest.raises(ValueError):
        parse_ratfunc("z^(1/2)")


# --- serialization ---

def test_json_formats():
    assert poly_to_json(P(F(-1, 2), 0, 3)) == ["-1/2", "0/1", "3/1"]
    f = parse_ratfunc("(z+1)/(2*z^2)")
    data = ratfunc_to_json(f)
    assert set(data) == {"num", "den"}
    assert ratfunc_from_json(data) == f
    assert poly_from_json(poly_to_json(P(1, 2))) == P(1, 2)
    e = ExpPoly(F(1, 3), P(1, 2))
    assert exppoly_to_json(e)["rate"] == "1/3"
    assert exppoly_from_json(exppoly_to_json(e)) == e


def test_parse_ratfunc_ignores_surrounding_whitespace():
    assert parse_ratfunc("  -1/z - z ") == parse_ratfunc("-1/z-z")
