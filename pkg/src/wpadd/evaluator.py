"""Numerical evaluation of wp, its derivatives, and sigma over a Lattice.

Production path for wp and wp': reduce z to the cell nearest the origin, halve
it k times until the Laurent series converges quickly, sum the series for the
pair (wp, wp'), then double back up k times with

    wp(2u)  = t**2/4 - 2 wp(u)
    wp'(2u) = t (12 wp(u) - t**2) / 4 - wp'(u),      t = wp''(u) / wp'(u)

where wp'' = 6 wp**2 - g2/2.  Carrying wp' through the chain avoids choosing
a branch of sqrt(4 wp**3 - g2 wp - g3).  Derivatives of order two and higher
are reduced to (wp, wp') by :func:`wpadd.symbolic.derivative_form`.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import DomainError, NumericError, PoleError, UnsupportedModeError
from .lattice import POLE_THRESHOLD, Lattice, _lattice_points, reduce_argument

HALVING_FRACTION = 0.4
SIGMA_RADIUS_FACTOR = 30.0
ORACLE_RADIUS_FACTOR = 160.0
_SERIES_TOL = 1e-17


def _laurent_pair(u: complex, coeffs) -> tuple[complex, complex]:
    """Laurent series of (wp, wp') at small u in the normalized frame."""
    t = u * u
    p = 1 / t
    dp = -2 / (t * u)
    base = abs(p)
    power = t  # t**(k-1) for k = 2
    small_run = 0
    for i, ck in enumerate(coeffs):
        k = i + 2
        term = ck * power
        p += term
        dp += (2 * k - 2) * term / u
        if abs(term) < _SERIES_TOL * base:
            small_run += 1
            if small_run >= 3:
                return p, dp
        else:
            small_run = 0
        power *= t
    if abs(coeffs[-1] * power) > 1e-12 * base:
        raise NumericError(f"Laurent series did not converge at normalized u={u!r}")
    return p, dp


def _halving_depth(absu: float, radius: float) -> int:
    k = 0
    while absu / 2**k > HALVING_FRACTION * radius:
        k += 1
    return k


def _normalized_pair(u: complex, lattice: Lattice, extra: int = 0) -> tuple[complex, complex]:
    s = lattice.scale
    g2n = lattice.g2 * s**4
    k = _halving_depth(abs(u), lattice.radius) + extra
    p, dp = _laurent_pair(u / 2**k, lattice.laurent)
    for _ in range(k):
        if abs(dp) < 1e-8 * abs(p) ** 1.5:
            raise ZeroDivisionError
        t = (6 * p * p - g2n / 2) / dp
        p, dp = t * t / 4 - 2 * p, t * (12 * p - t * t) / 4 - dp
    return p, dp


def wp_pair(z: complex, lattice: Lattice) -> tuple[complex, complex]:
    """Return (wp(z), wp'(z))."""
    z = complex(z)
    if lattice.has_periods:
        z, _ = reduce_argument(z, lattice)
    elif abs(z) < POLE_THRESHOLD * lattice.shortest_vector_length:
        raise PoleError(z, 0)
    s = lattice.scale
    u = z / s
    for extra in range(4):
        try:
            p, dp = _normalized_pair(u, lattice, extra)
            break
        except ZeroDivisionError:
            continue
    else:
        raise NumericError(f"duplication chain hit wp' ~ 0 for z={z!r}")
    return p / s**2, dp / s**3


def wp(z: complex, lattice: Lattice) -> complex:
    """Weierstrass wp(z) on the given lattice."""
    return wp_pair(z, lattice)[0]


@lru_cache(maxsize=4096)
def _numeric_form(n: int, g2: complex, g3: complex):
    from .symbolic import derivative_form

    form = derivative_form(n)
    return (tuple(c.evaluate(g2, g3) for c in form.even_part.coeffs),
            tuple(c.evaluate(g2, g3) for c in form.odd_part.coeffs))


def _horner(coeffs, x):
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def deriv_from_pair(n: int, p: complex, dp: complex, g2: complex, g3: complex) -> complex:
    """wp^(n) from the pair (wp, wp') using the exact reduction of wp^(n)."""
    if n == -2:
        return 1 + 0j
    if n == 0:
        return p
    if n == 1:
        return dp
    if n < -2 or n == -1:
        raise DomainError(f"derivative order must be -2 or >= 0, got {n}")
    even, odd = _numeric_form(n, complex(g2), complex(g3))
    return _horner(even, p) + dp * _horner(odd, p)


def wp_deriv(z: complex, n: int, lattice: Lattice) -> complex:
    """n-th derivative of wp, with the convention wp^(-2) = 1."""
    if n == -2:
        return 1 + 0j
    if n < -2 or n == -1:
        raise DomainError(f"derivative order must be -2 or >= 0, got {n}")
    p, dp = wp_pair(z, lattice)
    return deriv_from_pair(n, p, dp, lattice.g2, lattice.g3)


def wp_derivs(z: complex, orders, lattice: Lattice) -> dict[int, complex]:
    """Several derivative orders at one point, sharing one wp_pair evaluation."""
    orders = list(orders)
    if all(n == -2 for n in orders):
        return {n: 1 + 0j for n in orders}
    p, dp = wp_pair(z, lattice)
    return {n: deriv_from_pair(n, p, dp, lattice.g2, lattice.g3) for n in orders}


_POINT_CACHE: dict = {}


def _points(lattice: Lattice, factor: float) -> np.ndarray:
    if not lattice.has_periods:
        raise UnsupportedModeError("lattice sums need a period basis")
    key = (lattice.basis, factor)
    pts = _POINT_CACHE.get(key)
    if pts is None:
        b1, b2 = lattice.basis
        pts = _lattice_points(b1, b2, factor * lattice.shortest_vector_length)
        pts = _POINT_CACHE.setdefault(key, pts)
    return pts


def wp_lattice_sum(z: complex, lattice: Lattice, radius_factor: float = ORACLE_RADIUS_FACTOR) -> complex:
    """Oracle: the defining sum of wp truncated to |w| <= radius_factor * shortest vector.

    The argument is first moved to the cell nearest the origin (the tail error
    grows like |z|**2).  The disc truncation is symmetric under w -> -w, so the
    odd tail terms cancel and what remains is the boundary fluctuation of
    sum w**-4 beyond the cutoff.
    """
    z, _ = reduce_argument(z, lattice)
    w = _points(lattice, radius_factor)
    terms = 1 / (z - w) ** 2 - 1 / w**2
    return 1 / z**2 + complex(math.fsum(terms.real), math.fsum(terms.imag))


def log_sigma_sum(z: complex, lattice: Lattice) -> complex:
    """sum over |w| <= R of log(1 - z/w) + z/w + z**2/(2 w**2), principal branches."""
    w = _points(lattice, SIGMA_RADIUS_FACTOR)
    x = complex(z) / w
    out = np.empty_like(x)
    small = np.abs(x) < 0.25
    xs = x[small]
    # -(x^3/3 + x^4/4 + ...) without cancellation
    acc = np.zeros_like(xs)
    pw = xs**3
    for j in range(3, 40):
        acc += pw / j
        pw = pw * xs
    out[small] = -acc
    xl = x[~small]
    out[~small] = np.log(1 - xl) + xl + xl**2 / 2
    return complex(math.fsum(out.real), math.fsum(out.imag))


def sigma(z: complex, lattice: Lattice) -> complex:
    """Weierstrass sigma by its product, truncated to |w| <= 30 * shortest vector.

    Accuracy target is 1e-5 relative for |z| up to the shortest period; it is
    only used as an oracle for the Frobenius-Stickelberger identities.
    """
    z = complex(z)
    if z == 0:
        if not lattice.has_periods:
            raise UnsupportedModeError("sigma needs a period basis")
        return 0j
    return z * np.exp(log_sigma_sum(z, lattice))


def cauchy_derivative(f, z: complex, n: int, radius: float, nodes: int = 64) -> complex:
    """n-th derivative of an analytic f by the trapezoid rule on a circle.

    This is a central finite-difference stencil on `nodes` points of the circle
    |zeta - z| = radius; aliasing error decays like (radius / distance to the
    nearest singularity)**nodes.
    """
    k = np.arange(nodes)
    roots = np.exp(2j * np.pi * k / nodes)
    vals = np.array([f(z + radius * r) for r in roots])
    coeff = np.sum(vals * roots ** (-n)) / nodes
    return complex(coeff * math.factorial(n) / radius**n)
