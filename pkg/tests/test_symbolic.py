import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import cell_point
from wpadd.engine import AdditionConfig
from wpadd.errors import DomainError
from wpadd.evaluator import cauchy_derivative, wp, wp_pair
from wpadd.identities import mu_example_classical, mu_example_three_term
from wpadd.lattice import nearest_lattice_distance
from wpadd.symbolic import (InvariantPoly, MuTable, WpPoly, derivative_form, elementary_symmetric,
                            elementary_symmetric_all, phi_mu, render_terms)

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@pytest.mark.parametrize("n,text", [
    (0, "X"),
    (-2, "1"),
    (2, "6 X^2 - 1/2 g2"),
    (3, "P' * (12 X)"),
    (4, "120 X^3 - 18 g2 X - 12 g3"),
])
def test_render_known_forms(n, text):
    assert derivative_form(n).render() == text


def test_rejects_bad_orders():
    for n in (-1, -3):
        with pytest.raises(DomainError):
            derivative_form(n)


@pytest.mark.parametrize("n", range(0, 21))
def test_parity_and_degree(n):
    form = derivative_form(n)
    if n % 2 == 0:
        assert form.odd_part.is_zero()
        assert form.even_part.degree == n // 2 + 1
    else:
        assert form.even_part.is_zero()
        assert form.odd_part.degree == (n - 1) // 2


def test_leading_coefficients():
    # near the pole wp^(2m) ~ (2m+1)! / z^(2m+2) = (2m+1)! wp^(m+1)
    for m in range(1, 8):
        lead = derivative_form(2 * m).even_part.coeff(m + 1)
        assert lead == InvariantPoly.const(math.factorial(2 * m + 1))


def test_forms_match_contour_derivatives(generic, rng):
    for _ in range(3):
        z = cell_point(rng, generic, 0.2)
        p, dp = wp_pair(z, generic)
        radius = 0.5 * nearest_lattice_distance(z, generic)
        for n in range(2, 11):
            exact = derivative_form(n).evaluate(p, dp, generic.g2, generic.g3)
            numeric = cauchy_derivative(lambda x: wp(x, generic), z, n, radius)
            assert abs(numeric - exact) <= 1e-4 * abs(exact)


@given(a=st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), rationals, max_size=4),
       b=st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), rationals, max_size=4),
       g2=rationals, g3=rationals)
@settings(max_examples=60, deadline=None)
def test_invariant_poly_is_a_ring_homomorphism(a, b, g2, g3):
    pa, pb = InvariantPoly(a), InvariantPoly(b)
    assert (pa * pb).evaluate(g2, g3) == pa.evaluate(g2, g3) * pb.evaluate(g2, g3)
    assert (pa + pb).evaluate(g2, g3) == pa.evaluate(g2, g3) + pb.evaluate(g2, g3)
    assert pa * pb == pb * pa
    assert all(c != 0 for c in (pa * pb).terms.values())


def test_wp_poly_render_and_zero():
    assert WpPoly().render() == "0"
    assert WpPoly().degree == -1
    p = WpPoly([InvariantPoly.monomial(1, 1, Fraction(-3, 4)), 1])
    assert p.render() == "X - 3/4 g2 g3"
    assert render_terms([(Fraction(-1), 0, 0, 2), (Fraction(5, 2), 2, 0, 0)]) == "-X^2 + 5/2 g2^2"


def _draw(rng):
    return Fraction(int(rng.integers(-60, 61)), int(rng.integers(1, 25)))


def test_mu_table_two_point_exact(rng):
    cfg = AdditionConfig.successive(2)
    for _ in range(20):
        l1, l2, g2, g3 = (_draw(rng) for _ in range(4))
        table = phi_mu(cfg, [l1, l2], g2, g3)
        assert list(table.mu) == mu_example_classical(l1, l2, g2, g3)
        assert table[3] == 4


def test_mu_table_three_point_exact(rng):
    cfg = AdditionConfig.successive(3)
    for _ in range(20):
        l1, l2, l3, g2, g3 = (_draw(rng) for _ in range(5))
        table = phi_mu(cfg, [l1, l2, l3], g2, g3)
        assert list(table.mu) == mu_example_three_term(l1, l2, l3, g2, g3)
        assert table[4] == -36


def test_mu_table_float_path(rng):
    cfg = AdditionConfig.successive(3)
    for _ in range(20):
        l1, l2, l3, g2, g3 = (complex(*rng.normal(size=2)) for _ in range(5))
        got = phi_mu(cfg, [l1, l2, l3], g2, g3).mu
        for a, b in zip(got, mu_example_three_term(l1, l2, l3, g2, g3)):
            assert abs(a - b) <= 1e-12 * (1 + abs(b))


def test_matching_gamma_and_lambda_cancel():
    cfg = AdditionConfig(((1, Fraction(3)), (0, Fraction(-2, 7))), (1, 0))
    table = phi_mu(cfg, [Fraction(3), Fraction(-2, 7)], Fraction(5), Fraction(1, 3))
    assert all(m == 0 for m in table.mu)


def test_mu_table_length_checked():
    with pytest.raises(ValueError):
        MuTable(2, (1, 2, 3))


def test_elementary_symmetric_basics():
    assert elementary_symmetric([3, 5, 7], 0) == 1
    assert elementary_symmetric([3, 5, 7], 1) == 15
    assert elementary_symmetric([3, 5, 7], 3) == 105
    for r in (-1, 4):
        with pytest.raises(DomainError):
            elementary_symmetric([3, 5, 7], r)


@given(values=st.lists(rationals, min_size=1, max_size=6), x=rationals)
@settings(max_examples=60, deadline=None)
def test_elementary_symmetric_brute_force_and_extension(values, x):
    s = elementary_symmetric_all(values)
    for r in range(len(values) + 1):
        brute = sum((math.prod(c) for c in itertools.combinations(values, r)), Fraction(0))
        assert s[r] == brute
    t = elementary_symmetric_all(values + [x])
    for r in range(1, len(values) + 1):
        assert t[r] == x * s[r - 1] + s[r]
