"""Period lattices 2*omega1*Z + 2*omega2*Z and their Weierstrass invariants.

A :class:`Lattice` is immutable.  It is built either from half-periods
(:meth:`Lattice.from_half_periods`), from full periods
(:meth:`Lattice.from_periods`) or from the invariants alone
(:meth:`Lattice.from_invariants`).  In the last mode there is no basis, so
argument reduction and sigma are unavailable.

Internally every lattice also stores a *normalized* copy of its invariants,
scaled so that the Laurent expansion of wp about 0 has radius of order one.
The evaluator works in that normalized frame and rescales by homogeneity::

    wp(z; L) = s**-2 * wp(z / s; L / s),   g2(L / s) = s**4 g2(L),   g3(L / s) = s**6 g3(L)
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConditioningError, ConsistencyError, DomainError, PoleError

#: poles are declared when |z - w| < POLE_THRESHOLD * shortest_vector_length
POLE_THRESHOLD = 1e-12
#: Im(tau)/|tau| below this is treated as a collapsed lattice
TAU_ANGLE_THRESHOLD = 1e-9
#: number of Laurent coefficients c_2 .. c_{LAURENT_TERMS + 1} kept per lattice
LAURENT_TERMS = 64


def reduce_basis(b1: complex, b2: complex) -> tuple[complex, complex]:
    """Lagrange-Gauss reduction of a lattice basis.

    Returns a basis of the same lattice with |b1| <= |b2|, |Re(b2/b1)| <= 1/2
    and Im(b2/b1) > 0, i.e. b2/b1 lies in the standard fundamental domain.
    """
    b1, b2 = complex(b1), complex(b2)
    if (b2 / b1).imag < 0:
        b2 = -b2
    for _ in range(10_000):
        m = round((b2 / b1).real)
        b2 -= m * b1
        if abs(b2) < abs(b1) * (1 - 1e-15):
            # (b1, b2) -> (b2, -b1) is unimodular and keeps the orientation
            b1, b2 = b2, -b1
            continue
        break
    else:  # pragma: no cover - only reachable for pathological input
        raise ConditioningError("basis reduction did not terminate")
    return b1, b2


def _eisenstein_e4_e6(tau: complex) -> tuple[complex, complex]:
    """Normalized E4, E6 by their Lambert series in qbar = exp(2 pi i tau)."""
    qb = cmath.exp(2j * math.pi * tau)
    e4 = e6 = 0j
    qn = 1 + 0j
    for n in range(1, 200):
        qn *= qb
        if abs(qn) * n**5 < 1e-18:
            break
        lam = qn / (1 - qn)
        e4 += n**3 * lam
        e6 += n**5 * lam
    return 1 + 240 * e4, 1 - 504 * e6


def _check_half_periods(omega1: complex, omega2: complex) -> complex:
    omega1, omega2 = complex(omega1), complex(omega2)
    if omega1 == 0 or omega2 == 0:
        raise DomainError("half-periods must be nonzero")
    tau = omega2 / omega1
    if tau.imag <= 0:
        raise DomainError(f"Im(omega2/omega1) must be positive, got tau={tau!r}")
    if tau.imag < TAU_ANGLE_THRESHOLD * abs(tau):
        raise ConditioningError(f"lattice is nearly degenerate (tau={tau!r})")
    return tau


def invariants_from_periods(omega1: complex, omega2: complex) -> tuple[complex, complex]:
    """Return (g2, g3) of the lattice spanned by 2*omega1 and 2*omega2.

    The basis is reduced first so that |exp(i pi tau)| <= exp(-pi sqrt(3) / 2),
    then g2 = (pi/w1)^4 E4 / 12 and g3 = (pi/w1)^6 E6 / 216 with w1 the reduced
    first half-period.
    """
    _check_half_periods(omega1, omega2)
    b1, b2 = reduce_basis(2 * complex(omega1), 2 * complex(omega2))
    e4, e6 = _eisenstein_e4_e6(b2 / b1)
    x = math.pi / (b1 / 2)
    return x**4 * e4 / 12, x**6 * e6 / 216


def _lattice_points(b1: complex, b2: complex, radius: float, n_max: int | None = None) -> np.ndarray:
    """Nonzero lattice points with |w| <= radius, sorted by modulus."""
    area = abs((b1.conjugate() * b2).imag)
    # a disc of this radius is covered by |m|, |n| <= n_bound
    n_bound = int(math.ceil(radius * max(abs(b1), abs(b2)) / area)) + 1
    if n_max is not None:
        n_bound = min(n_bound, n_max)
    r = np.arange(-n_bound, n_bound + 1)
    m, n = np.meshgrid(r, r, indexing="ij")
    w = (m * b1 + n * b2).ravel()
    mod = np.abs(w)
    keep = (mod > 0) & (mod <= radius)
    w = w[keep]
    return w[np.argsort(np.abs(w), kind="stable")]


def invariants_by_lattice_sum(omega1: complex, omega2: complex, n_max: int = 200) -> tuple[complex, complex]:
    """Oracle for :func:`invariants_from_periods`: the defining sums, truncated.

    Sums 60*w**-4 and 140*w**-6 over w = 2m*omega1 + 2n*omega2 with |m|, |n| <= n_max,
    restricted to the largest centred disc inside that box so the truncation is
    symmetric.  Works on the caller's basis (no reduction).
    """
    _check_half_periods(omega1, omega2)
    b1, b2 = 2 * complex(omega1), 2 * complex(omega2)
    area = abs((b1.conjugate() * b2).imag)
    radius = n_max * area / max(abs(b1), abs(b2))
    w = _lattice_points(b1, b2, radius, n_max=n_max)
    w4 = w**-4
    w6 = w**-6
    g2 = 60 * complex(math.fsum(w4.real), math.fsum(w4.imag))
    g3 = 140 * complex(math.fsum(w6.real), math.fsum(w6.imag))
    return g2, g3


def laurent_coefficients(g2: complex, g3: complex, count: int = LAURENT_TERMS) -> tuple[complex, ...]:
    """Coefficients c_2, c_3, ... of wp(z) = z**-2 + sum_k c_k z**(2k-2).

    c_2 = g2/20, c_3 = g3/28 and, matching Laurent expansions of
    wp'' = 6 wp**2 - g2/2, c_k = 3/((2k+1)(k-3)) * sum_{m=2}^{k-2} c_m c_{k-m}.
    Element i of the result is c_{i+2}.
    """
    c = [0j] * (count + 2)
    c[2] = complex(g2) / 20
    if count > 1:
        c[3] = complex(g3) / 28
    for k in range(4, count + 2):
        s = sum(c[m] * c[k - m] for m in range(2, k - 1))
        c[k] = 3 * s / ((2 * k + 1) * (k - 3))
    return tuple(c[2:])


def estimate_radius(coeffs: tuple[complex, ...], window: int = 8) -> float:
    """Root-test estimate of the convergence radius from the last coefficients."""
    est = math.inf
    last = len(coeffs) + 1  # index k of the final coefficient
    for k in range(last - window, last + 1):
        ck = abs(coeffs[k - 2])
        if ck > 0 and math.isfinite(ck):
            est = min(est, ck ** (-1.0 / (2 * k)))
    if not math.isfinite(est):
        raise ConditioningError("cannot estimate Laurent convergence radius")
    return est


@dataclass(frozen=True)
class Lattice:
    """Immutable period lattice with cached invariants and half-period values."""

    omega1: complex | None
    omega2: complex | None
    g2: complex
    g3: complex
    e_values: tuple[complex, complex, complex]
    shortest_vector_length: float
    # reduced period basis (2w1', 2w2'); None in invariants-only mode
    basis: tuple[complex, complex] | None = field(repr=False)
    # normalization length s and the normalized Laurent data
    scale: float = field(repr=False)
    laurent: tuple[complex, ...] = field(repr=False, compare=False)
    radius: float = field(repr=False)

    @property
    def has_periods(self) -> bool:
        return self.basis is not None

    @property
    def tau(self) -> complex | None:
        if self.omega1 is None:
            return None
        return self.omega2 / self.omega1

    @property
    def discriminant(self) -> complex:
        return self.g2**3 - 27 * self.g3**2

    @classmethod
    def from_half_periods(cls, omega1: complex, omega2: complex) -> "Lattice":
        _check_half_periods(omega1, omega2)
        omega1, omega2 = complex(omega1), complex(omega2)
        b1, b2 = reduce_basis(2 * omega1, 2 * omega2)
        g2, g3 = invariants_from_periods(omega1, omega2)
        s = abs(b1)
        coeffs = laurent_coefficients(g2 * s**4, g3 * s**6)
        radius = min(1.0, estimate_radius(coeffs))
        partial = cls(omega1, omega2, g2, g3, (0j, 0j, 0j), s, (b1, b2), s, coeffs, radius)
        return _replace_e(partial, half_period_values(partial))

    @classmethod
    def from_periods(cls, period1: complex, period2: complex) -> "Lattice":
        return cls.from_half_periods(complex(period1) / 2, complex(period2) / 2)

    @classmethod
    def from_invariants(cls, g2: complex, g3: complex) -> "Lattice":
        g2, g3 = complex(g2), complex(g3)
        disc = g2**3 - 27 * g3**2
        if abs(disc) <= 1e-12 * (abs(g2) ** 3 + 27 * abs(g3) ** 2):
            raise DomainError("discriminant g2^3 - 27 g3^2 vanishes")
        s = 1.0 / max(abs(g2) ** 0.25, abs(g3) ** (1 / 6))
        coeffs = laurent_coefficients(g2 * s**4, g3 * s**6)
        radius = estimate_radius(coeffs)
        roots = tuple(sorted(_cubic_roots(g2, g3), key=lambda t: (t.real, t.imag)))
        return cls(None, None, g2, g3, roots, radius * s, None, s, coeffs, radius)

    @classmethod
    def from_spec(cls, spec: dict) -> "Lattice":
        """Build from the JSON lattice format (complex numbers as [re, im])."""
        if not isinstance(spec, dict):
            raise DomainError("lattice spec must be a JSON object")
        if "periods" in spec:
            p = spec["periods"]
            if len(p) != 2:
                raise DomainError("'periods' needs exactly two complex numbers")
            return cls.from_periods(parse_complex(p[0]), parse_complex(p[1]))
        if "invariants" in spec:
            inv = spec["invariants"]
            return cls.from_invariants(parse_complex(inv["g2"]), parse_complex(inv["g3"]))
        raise DomainError("lattice spec needs 'periods' or 'invariants'")

    def to_spec(self) -> dict:
        if self.has_periods:
            return {"periods": [complex_to_json(2 * self.omega1), complex_to_json(2 * self.omega2)]}
        return {"invariants": {"g2": complex_to_json(self.g2), "g3": complex_to_json(self.g3)}}


def _replace_e(lat: Lattice, e_values) -> Lattice:
    return Lattice(lat.omega1, lat.omega2, lat.g2, lat.g3, tuple(e_values),
                   lat.shortest_vector_length, lat.basis, lat.scale, lat.laurent, lat.radius)


def parse_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise DomainError(f"complex number must be [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace(" ", "").replace("i", "j"))
    return complex(value)


def complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _cubic_roots(g2: complex, g3: complex) -> list[complex]:
    """Roots of 4t^3 - g2 t - g3 by Cardano, each polished by one Newton step."""
    p, q = -g2 / 4, -g3 / 4  # t^3 + p t + q
    d = cmath.sqrt(q * q / 4 + p**3 / 27)
    u3 = max(-q / 2 + d, -q / 2 - d, key=abs)
    u = u3 ** (1 / 3) if u3 != 0 else 0j
    rot = cmath.exp(2j * math.pi / 3)
    roots = []
    for k in range(3):
        uk = u * rot**k
        roots.append(uk - p / (3 * uk) if uk != 0 else 0j)
    polished = []
    for t in roots:
        f = 4 * t**3 - g2 * t - g3
        df = 12 * t**2 - g2
        if df != 0:
            t = t - f / df
        polished.append(t)
    return polished


def half_period_values(lattice: Lattice) -> tuple[complex, complex, complex]:
    """(e1, e2, e3) = (wp(w1), wp(w2), wp(w1 + w2)) as roots of 4t^3 - g2 t - g3.

    The cubic roots are matched to direct evaluations of wp at the three
    half-periods; the assignment minimising the total mismatch wins.
    """
    from .evaluator import wp

    roots = sorted(_cubic_roots(lattice.g2, lattice.g3), key=lambda t: (t.real, t.imag))
    if not lattice.has_periods:
        return tuple(roots)
    w1, w2 = lattice.omega1, lattice.omega2
    direct = [wp(w1, lattice), wp(w2, lattice), wp(w1 + w2, lattice)]
    best = min(itertools.permutations(range(3)),
               key=lambda perm: sum(abs(roots[perm[i]] - direct[i]) for i in range(3)))
    labelled = tuple(roots[best[i]] for i in range(3))
    scale = max(1.0, *(abs(r) for r in roots))
    mismatch = max(abs(labelled[i] - direct[i]) for i in range(3))
    if mismatch > 1e-6 * scale:
        raise ConsistencyError(f"half-period values disagree with cubic roots by {mismatch:.3g}")
    return labelled


def reduce_argument(z: complex, lattice: Lattice) -> tuple[complex, complex]:
    """Return (z - w, w) with w the lattice point nearest to z.

    Raises :class:`PoleError` when z lies within the pole threshold of w.
    """
    if not lattice.has_periods:
        from .errors import UnsupportedModeError
        raise UnsupportedModeError("argument reduction needs a period basis")
    z = complex(z)
    b1, b2 = lattice.basis
    det = (b1.conjugate() * b2).imag
    # real coordinates of z in the basis (b1, b2)
    x = (z.conjugate() * b2).imag / det
    y = (b1.conjugate() * z).imag / det
    m0, n0 = round(x), round(y)
    best = None
    for dm in (-1, 0, 1):
        for dn in (-1, 0, 1):
            w = (m0 + dm) * b1 + (n0 + dn) * b2
            d = abs(z - w)
            if best is None or d < best[0]:
                best = (d, w)
    d, w = best
    if d < POLE_THRESHOLD * lattice.shortest_vector_length:
        raise PoleError(z, w)
    return z - w, w


def nearest_lattice_distance(z: complex, lattice: Lattice) -> float:
    try:
        zr, _ = reduce_argument(z, lattice)
    except PoleError as exc:
        return abs(exc.z - exc.lattice_point)
    return abs(zr)
