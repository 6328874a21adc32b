import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nilband import FIXTURE_NAMES, load_fixture
from nilband.algebra import (GroupElement, SpecError, bracket, gamma1_enumerate,
                             gamma_enumerate, group_inverse, group_inverse_batch,
                             group_multiply, group_multiply_batch, parse_spec, validate)
from oracles import first_kind

from conftest import WORKED_FIXTURES

HEIS = '{"n": 3, "d": 1, "brackets": [{"left": "X1", "right": "Y1", "value": {"Z1": "1"}}]}'


def _spec_text(n, d, pairs):
    return json.dumps({"n": n, "d": d, "brackets": [
        {"left": a, "right": b, "value": v} for a, b, v in pairs]})


# ---------------------------------------------------------------- parsing

def test_heisenberg_parses_to_one_entry():
    spec = parse_spec(HEIS)
    assert (spec.n, spec.d, spec.c) == (3, 1, 1)
    assert len(spec.brackets) == 1
    assert spec.basis_names == ("Z1", "Y1", "X1")


def test_example1_has_five_entries():
    spec = load_fixture("example1")
    assert spec.n == 6 and len(spec.brackets) == 5


@pytest.mark.parametrize("text, fragment", [
    ('{"n": 3, "d": 1, "brackets": [', "line 1"),
    (_spec_text(5, 2, [("Y1", "Y2", {"Z1": "1"})]), "Y"),
    (_spec_text(3, 1, [("X1", "Y1", {"X1": "1"})]), "non-central"),
    (_spec_text(3, 1, [("X1", "Y3", {"Z1": "1"})]), "out of range"),
    (_spec_text(3, 1, [("X1", "Y1", {"Z2": "1"})]), "out of range"),
    (_spec_text(2, 1, []), "dimension mismatch"),
    (_spec_text(3, 1, [("X1", "Y1", {"Z1": "1"}), ("Y1", "X1", {"Z1": "-1"})]), "duplicate"),
    (_spec_text(3, 1, [("X1", "X1", {"Z1": "1"})]), "vanish"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(SpecError, match=fragment):
        parse_spec(text)


def test_syntax_error_reports_position():
    with pytest.raises(SpecError, match=r"line 2 column \d+"):
        parse_spec('{"n": 3,\n "d": }')


def test_central_dim_mismatch():
    data = json.loads(HEIS)
    data["central_dim"] = 2
    with pytest.raises(SpecError, match="dimension mismatch"):
        parse_spec(json.dumps(data))


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_json_round_trip(name):
    spec = load_fixture(name)
    assert parse_spec(json.dumps(spec.to_json())) == spec


# ---------------------------------------------------------------- brackets

def test_bracket_examples():
    spec = load_fixture("example1")
    X1, X2, Y1, Y2 = (spec.basis_vector(s) for s in ("X1", "X2", "Y1", "Y2"))
    assert bracket(spec, X1, X1) == (0, 0)
    assert bracket(spec, X1, Y2) == (0, 1)
    both = tuple(a + b for a, b in zip(X1, X2))
    assert bracket(spec, both, Y1) == (1, 1)


@given(st.data())
def test_bracket_bilinear_antisymmetric(data):
    spec = load_fixture(data.draw(st.sampled_from(FIXTURE_NAMES)))
    vec = st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=5),
                   min_size=spec.n, max_size=spec.n)
    u, v, w = data.draw(vec), data.draw(vec), data.draw(vec)
    a = data.draw(st.integers(-3, 3))
    assert bracket(spec, u, v) == tuple(-t for t in bracket(spec, v, u))
    uv = [a * x + y for x, y in zip(u, v)]
    lhs = bracket(spec, uv, w)
    rhs = tuple(a * s + t for s, t in zip(bracket(spec, u, w), bracket(spec, v, w)))
    assert lhs == rhs


# ---------------------------------------------------------------- validation

@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_fixtures_validate(name):
    report = validate(load_fixture(name))
    assert report.passed, report.failing()


def test_rank_deficient_spec_fails():
    spec = parse_spec(_spec_text(6, 2, [("X1", "Y1", {"Z1": "1"})]))
    report = validate(spec)
    assert not report.passed
    assert {"detS_nontrivial", "zb_maximal_commutative"} <= set(report.failing())


def test_non_homogeneous_degree_fails():
    # det S = l1*l2 - l1*l2 = 0 pattern replaced by a degree-deficient one
    spec = parse_spec(_spec_text(6, 2, [("X1", "Y1", {"Z1": "1"}), ("X1", "Y2", {"Z2": "1"}),
                                        ("X2", "Y1", {"Z1": "1"}), ("X2", "Y2", {"Z2": "1"})]))
    assert "detS_nontrivial" in validate(spec).failing()


# ---------------------------------------------------------------- group law

def _rational_elements(spec):
    q = st.fractions(min_value=-3, max_value=3, max_denominator=4)
    return st.builds(lambda z, l, m: GroupElement(tuple(z), tuple(l), tuple(m)),
                     st.lists(q, min_size=spec.c, max_size=spec.c),
                     st.lists(q, min_size=spec.d, max_size=spec.d),
                     st.lists(q, min_size=spec.d, max_size=spec.d))


@pytest.mark.parametrize("name", FIXTURE_NAMES)
@given(data=st.data())
def test_group_law_matches_bch(name, data):
    spec = load_fixture(name)
    g = data.draw(_rational_elements(spec))
    h = data.draw(_rational_elements(spec))
    from oracles import bch
    assert first_kind(spec, group_multiply(spec, g, h)) == bch(spec, first_kind(spec, g),
                                                               first_kind(spec, h))


@pytest.mark.parametrize("name", FIXTURE_NAMES)
@given(data=st.data())
def test_inverse_is_exact(name, data):
    spec = load_fixture(name)
    g = data.draw(_rational_elements(spec))
    e = GroupElement.identity(spec)
    assert group_multiply(spec, g, group_inverse(spec, g)) == e
    assert group_multiply(spec, group_inverse(spec, g), g) == e


@pytest.mark.parametrize("name", WORKED_FIXTURES)
def test_associativity_exact(name):
    spec = load_fixture(name)
    rng = np.random.default_rng(1)

    def rand():
        v = [Fraction(int(a), int(b)) for a, b in zip(rng.integers(-9, 10, spec.n),
                                                      rng.integers(1, 5, spec.n))]
        return GroupElement(tuple(v[:spec.c]), tuple(v[spec.c:spec.c + spec.d]),
                            tuple(v[spec.c + spec.d:]))

    for _ in range(200):
        a, b, c = rand(), rand(), rand()
        left = group_multiply(spec, group_multiply(spec, a, b), c)
        right = group_multiply(spec, a, group_multiply(spec, b, c))
        assert left == right


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_batch_law_matches_exact(name):
    spec = load_fixture(name)
    rng = np.random.default_rng(2)
    g = tuple(rng.normal(size=(50, k)) for k in (spec.c, spec.d, spec.d))
    h = tuple(rng.normal(size=(50, k)) for k in (spec.c, spec.d, spec.d))
    prod = group_multiply_batch(spec, g, h)
    inv = group_inverse_batch(spec, g)
    for r in range(50):
        ge = GroupElement(*(tuple(map(Fraction, a[r])) for a in g))
        he = GroupElement(*(tuple(map(Fraction, a[r])) for a in h))
        exact = group_multiply(spec, ge, he).as_tuple()
        np.testing.assert_allclose(np.concatenate([p[r] for p in prod]),
                                   np.array(exact, dtype=float), atol=1e-12)
        exact_inv = group_inverse(spec, ge).as_tuple()
        np.testing.assert_allclose(np.concatenate([p[r] for p in inv]),
                                   np.array(exact_inv, dtype=float), atol=1e-12)


# ---------------------------------------------------------------- Gamma

@pytest.mark.parametrize("name", ["heisenberg", "five_dim", "example1"])
def test_gamma_grid_count_and_order(name):
    spec = load_fixture(name)
    pts = gamma_enumerate(spec, 1)
    assert len(pts) == 3 ** spec.n
    assert len(set(pts)) == len(pts)
    assert all(all(t.denominator == 1 for t in p.as_tuple()) for p in pts)
    assert gamma_enumerate(spec, 1) == pts


def test_gamma_overflow_cap(heis):
    with pytest.raises(OverflowError):
        gamma_enumerate(heis, 10, cap=100)


def test_gamma1_is_identity_on_center(heis):
    pts = gamma1_enumerate(heis, 2)
    assert len(pts) == 25 and all(p.z == (0,) for p in pts)


def test_x_order_changes_gamma_when_a_is_nonabelian():
    spec = load_fixture("example1")
    canon = set(gamma_enumerate(spec, 1))
    swapped = set(gamma_enumerate(spec, 1, x_order=[1, 2]))
    assert canon != swapped
    assert set(gamma_enumerate(spec, 1, y_order=[1, 2])) == canon
    assert set(gamma_enumerate(spec, 1, z_order=[1, 2])) == canon
