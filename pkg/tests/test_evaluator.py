import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import cell_point
from wpadd.errors import DomainError, PoleError, UnsupportedModeError
from wpadd.evaluator import (cauchy_derivative, sigma, wp, wp_deriv, wp_derivs, wp_lattice_sum, wp_pair)
from wpadd.lattice import Lattice, half_period_values


def test_even(lattice, rng):
    for _ in range(20):
        z = cell_point(rng, lattice)
        assert abs(wp(-z, lattice) - wp(z, lattice)) <= 1e-12 * abs(wp(z, lattice))


def test_periodic(lattice, rng):
    for _ in range(20):
        z = cell_point(rng, lattice)
        p = wp(z, lattice)
        for shift in (2 * lattice.omega1, 2 * lattice.omega2, 6 * lattice.omega1 - 4 * lattice.omega2):
            assert abs(wp(z + shift, lattice) - p) <= 1e-10 * (1 + abs(p))


def test_square_lattice_corner_is_e3(square):
    e3 = half_period_values(square)[2]
    assert abs(wp(1 + 1j, square) - e3) < 1e-12


def test_minus_two_is_constant_one(generic):
    assert wp_deriv(0.3 + 0.1j, -2, generic) == 1
    for bad in (-1, -3):
        with pytest.raises(DomainError):
            wp_deriv(0.3, bad, generic)


def test_differential_equation(lattice, rng):
    for _ in range(100):
        z = cell_point(rng, lattice, 0.01)
        p, dp = wp_pair(z, lattice)
        assert abs(dp**2 - (4 * p**3 - lattice.g2 * p - lattice.g3)) <= 1e-9 * (1 + abs(p)) ** 3


def test_second_derivative_closed_form(lattice, rng):
    for _ in range(20):
        z = cell_point(rng, lattice)
        p = wp(z, lattice)
        assert abs(wp_deriv(z, 2, lattice) - (6 * p**2 - lattice.g2 / 2)) <= 1e-12 * (1 + abs(p)) ** 2


def test_derivative_vanishes_at_half_periods(lattice):
    for w in (lattice.omega1, lattice.omega2, lattice.omega1 + lattice.omega2):
        assert abs(wp_deriv(w, 1, lattice)) < 1e-10


def test_second_derivative_by_central_difference(lattice, rng):
    h = 1e-5 * lattice.shortest_vector_length
    for _ in range(20):
        z = cell_point(rng, lattice)
        fd = (wp_deriv(z + h, 1, lattice) - wp_deriv(z - h, 1, lattice)) / (2 * h)
        assert abs(fd - wp_deriv(z, 2, lattice)) <= 1e-5 * abs(wp_deriv(z, 2, lattice))


@given(a=st.floats(0.02, 0.98), b=st.floats(0.02, 0.98))
@settings(max_examples=40, deadline=None)
def test_derivative_parity(a, b):
    lat = Lattice.from_half_periods(1, 0.3 + 1.1j)
    z = a * 2 * lat.omega1 + b * 2 * lat.omega2
    d, dm = wp_derivs(z, range(7), lat), wp_derivs(-z, range(7), lat)
    for n in range(7):
        assert abs(dm[n] - (-1) ** n * d[n]) <= 1e-10 * (1 + abs(d[n]))


def test_oracle_agreement(lattice, rng):
    for _ in range(10):
        z = cell_point(rng, lattice)
        direct = wp_lattice_sum(z, lattice)
        assert abs(wp(z, lattice) - direct) <= 1e-6 * abs(direct)


def test_pole(square):
    with pytest.raises(PoleError):
        wp(2 + 2j, square)
    with pytest.raises(PoleError):
        wp(0, square)


def test_invariants_mode_matches_periods(generic, rng):
    inv = Lattice.from_invariants(generic.g2, generic.g3)
    for _ in range(10):
        z = 0.3 * cell_point(rng, generic)
        if abs(z) < 0.05:
            continue
        assert abs(wp(z, inv) - wp(z, generic)) <= 1e-10 * abs(wp(z, generic))


def test_sigma_at_origin(generic):
    assert sigma(0, generic) == 0
    assert abs(sigma(1e-6, generic) / 1e-6 - 1) < 1e-10


def test_sigma_odd(lattice, rng):
    for _ in range(5):
        z = cell_point(rng, lattice)
        assert abs(sigma(-z, lattice) + sigma(z, lattice)) <= 1e-12 * abs(sigma(z, lattice))


def test_sigma_vanishes_on_lattice(square):
    assert abs(sigma(2 + 1e-9, square)) < 1e-8


def test_sigma_needs_periods():
    with pytest.raises(UnsupportedModeError):
        sigma(0.1, Lattice.from_invariants(4, 1))


def test_log_sigma_second_difference(lattice, rng):
    h = 1e-4 * lattice.shortest_vector_length
    for _ in range(5):
        z = cell_point(rng, lattice)
        s0 = sigma(z, lattice)
        d2 = cmath.log(sigma(z + h, lattice) * sigma(z - h, lattice) / s0**2) / h**2
        p = wp(z, lattice)
        assert abs(d2 + p) <= 1e-4 * max(abs(p), 1)


def test_fs_reduction_sign(generic, rng):
    """wp(z) - wp(w) = sigma(w+z) sigma(w-z) / (sigma(w)^2 sigma(z)^2), no sign change needed."""
    for _ in range(5):
        z, w = 0.5 * cell_point(rng, generic), 0.5 * cell_point(rng, generic)
        lhs = wp(z, generic) - wp(w, generic)
        rhs = sigma(w + z, generic) * sigma(w - z, generic) / (sigma(w, generic) ** 2 * sigma(z, generic) ** 2)
        assert abs(lhs - rhs) <= 1e-4 * (1 + abs(rhs))


def test_cauchy_stencil_on_exp():
    for n in range(0, 11):
        assert abs(cauchy_derivative(np.exp, 0.3 + 0.2j, n, 2.0) - np.exp(0.3 + 0.2j)) < 1e-10
