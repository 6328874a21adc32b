from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from nilband import FIXTURE_NAMES, load_fixture
from nilband.algebra import s_matrix_symbolic
from nilband.poly import (NOT_HOMOGENEOUS, ZERO, CentralPolynomial, det_of_central_matrix,
                          evaluate, format_poly, homogeneity_degree, is_nontrivial)
from oracles import fraction_det, symbolic_det_S


def det_s(name):
    spec = load_fixture(name)
    return det_of_central_matrix(s_matrix_symbolic(spec), nvars=spec.c)


@pytest.mark.parametrize("name, text", [
    ("heisenberg", "λ1"),
    ("example1", "λ1^2 - λ2^2"),
    ("example2", "λ1^2·λ3 + λ1·λ2^2 + λ2^3 + λ2^2·λ3 - λ2·λ3^2 + λ3^3"),
    ("five_dim", "λ1^2"),
    ("seven_dim", "λ1^2 - λ2^2"),
    ("region_example", "-3·λ1^2·λ2 - λ2^3"),
])
def test_known_determinants(name, text):
    assert format_poly(det_s(name)) == text


def test_example2_term_table():
    p = det_s("example2")
    assert p.terms == {(2, 0, 1): 1, (1, 2, 0): 1, (0, 3, 0): 1, (0, 2, 1): 1,
                       (0, 1, 2): -1, (0, 0, 3): 1}


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_determinant_matches_sympy(name):
    spec = load_fixture(name)
    expr, lam = symbolic_det_S(spec)
    ours = sum(sympy.Rational(c.numerator, c.denominator)
               * sympy.Mul(*[v ** e for v, e in zip(lam, exps)])
               for exps, c in det_s(name).terms.items())
    assert sympy.expand(ours - expr) == 0


@pytest.mark.parametrize("name", FIXTURE_NAMES)
@given(data=st.data())
def test_evaluation_matches_numeric_determinant(name, data):
    spec = load_fixture(name)
    lam = data.draw(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=7),
                             min_size=spec.c, max_size=spec.c))
    S = [[sum(t * x for t, x in zip(spec.xy[i][j], lam)) for j in range(spec.d)]
         for i in range(spec.d)]
    assert evaluate(det_s(name), lam) == fraction_det(S)


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_homogeneous_of_degree_d(name):
    assert homogeneity_degree(det_s(name)) == load_fixture(name).d


def test_homogeneity_labels():
    assert homogeneity_degree(CentralPolynomial(2)) == ZERO
    p = CentralPolynomial(2, {(1, 0): 1, (2, 0): 1})
    assert homogeneity_degree(p) == NOT_HOMOGENEOUS
    assert not is_nontrivial(CentralPolynomial(2))


polys = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)),
                        st.fractions(min_value=-9, max_value=9, max_denominator=4), max_size=6
                        ).map(lambda t: CentralPolynomial(2, t))
points = st.tuples(st.fractions(min_value=-3, max_value=3, max_denominator=5),
                   st.fractions(min_value=-3, max_value=3, max_denominator=5))


@given(polys, polys, points)
def test_ring_operations_commute_with_evaluation(p, q, x):
    assert evaluate(p + q, x) == evaluate(p, x) + evaluate(q, x)
    assert evaluate(p * q, x) == evaluate(p, x) * evaluate(q, x)
    assert evaluate(p - q, x) == evaluate(p, x) - evaluate(q, x)


@given(polys)
def test_no_zero_terms_and_sorted(p):
    assert all(c != 0 for c in p.terms.values())
    keys = list(p.terms)
    degs = [sum(e) for e in keys]
    assert degs == sorted(degs, reverse=True)
    assert (p - p) == CentralPolynomial(2)


def test_float_evaluation():
    p = det_s("example1")
    assert evaluate(p, [0.5, 0.25]) == pytest.approx(0.1875)
    assert evaluate(p, [Fraction(1, 2), 0]) == Fraction(1, 4)


def test_print_constants_and_coefficients():
    assert format_poly(CentralPolynomial(1)) == "0"
    assert format_poly(CentralPolynomial(2, {(0, 0): Fraction(-3, 2), (1, 1): 2})) == \
        "2·λ1·λ2 - 3/2"


def test_non_square_rejected():
    with pytest.raises(ValueError):
        det_of_central_matrix([[(1,), (0,)]])
