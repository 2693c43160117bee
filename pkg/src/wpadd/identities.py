"""Closed-form addition, duplication and triplication identities for wp.

Each formula lives in one function, with its grouping kept as written, and
is evaluated against a direct evaluation of wp at the combined argument.  No
formula is simplified before testing, so a wrong term shows up as a residual
rather than being silently repaired.

Naming: ``p`` is wp, ``dp`` wp', ``d2p`` wp'' and so on; ``lam1..lam3`` are
the lambda coefficients of the linear system behind each formula.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .engine import AdditionConfig, det_theorem_residual, determinant
from .errors import DegenerateError, GuardedInputError, UnsupportedModeError
from .evaluator import sigma, wp, wp_derivs
from .lattice import Lattice, complex_to_json, reduce_argument

GUARD = 1e-8

#: stable identity ids, grouped by catalog operation
IDENTITY_IDS = (
    "addition.classical", "addition.v1", "addition.v2", "addition.v3",
    "dup.classic", "dup.new1", "dup.new2", "dup.rat1", "dup.rat2",
    "invariant.g2", "invariant.g3",
    "3term.v1", "3term.v2", "3term.v3", "3term.v4",
    "trip.main", "trip.alt1", "trip.alt2", "trip.alt3", "trip.poly", "trip.lambdas",
    "fs.n1", "fs.n2",
    "det.classical", "det.general",
)


@dataclass
class IdentityReport:
    identity_id: str
    inputs: list
    formula_value: complex
    direct_value: complex
    relative_residual: float
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"identity_id": self.identity_id,
                "inputs": [complex_to_json(z) for z in self.inputs],
                "formula_value": complex_to_json(self.formula_value),
                "direct_value": complex_to_json(self.direct_value),
                "relative_residual": self.relative_residual}


def _report(identity_id, inputs, formula, direct, **extra) -> IdentityReport:
    formula, direct = complex(formula), complex(direct)
    res = abs(formula - direct) / (1 + abs(direct))
    return IdentityReport(identity_id, [complex(z) for z in inputs], formula, direct, float(res), extra)


def _guard(name: str, value, *scale_terms) -> None:
    scale = max([1.0] + [abs(t) for t in scale_terms])
    if not math.isfinite(abs(value)) or abs(value) <= GUARD * scale:
        raise GuardedInputError(name, complex(value))


def _pd(z, lattice, top=1):
    d = wp_derivs(z, range(0, top + 1), lattice)
    return [d[i] for i in range(top + 1)]


# -- two points --------------------------------------------------------------

def classical_lambdas(pz, dpz, pw, dpw):
    """lambda_1, lambda_2 of wp'(s) = lambda_1 wp(s) + lambda_2 through s = z, w."""
    _guard("wp(z) - wp(w)", pz - pw, pz, pw)
    lam1 = (dpz - dpw) / (pz - pw)
    lam2 = (pz * dpw - pw * dpz) / (pz - pw)
    return lam1, lam2


def classical_addition(variant, z, w, lattice: Lattice) -> IdentityReport:
    """wp(z + w) by the classical formula (variant 1) or its two alternatives."""
    g2, g3 = lattice.g2, lattice.g3
    pz, dpz = _pd(z, lattice)
    pw, dpw = _pd(w, lattice)
    _guard("wp(z) - wp(w)", pz - pw, pz, pw)
    variant = str(variant)
    if variant in ("1", "classical"):
        value = 0.25 * ((dpz - dpw) / (pz - pw)) ** 2 - pz - pw
    elif variant == "2":
        _guard("wp(z) + wp(w)", pz + pw, pz, pw)
        value = (-(dpz - dpw) * (pz * dpw - pw * dpz) / (2 * (pz + pw) * (pz - pw) ** 2)
                 - pz * pw / (pz + pw) - g2 / (4 * (pz + pw)))
    elif variant == "3":
        _guard("wp(z) wp(w)", pz * pw, pz, pw)
        value = (1 / (4 * pz * pw)) * ((pz * dpw - pw * dpz) / (pz - pw)) ** 2 + g3 / (4 * pz * pw)
    else:
        raise ValueError(f"unknown classical variant {variant!r}")
    ident = "addition.classical" if variant == "classical" else f"addition.v{variant}"
    return _report(ident, [z, w], value, wp(complex(z) + complex(w), lattice))


def classical_determinant(z, w, lattice: Lattice) -> float:
    """Normalized determinant with rows (1, wp, wp') at z, w and (1, wp(z+w), -wp'(z+w))."""
    pz, dpz = _pd(z, lattice)
    pw, dpw = _pd(w, lattice)
    ps, dps = _pd(complex(z) + complex(w), lattice)
    m = np.array([[1, pz, dpz], [1, pw, dpw], [1, ps, -dps]], dtype=complex)
    return float(abs(determinant(m)) / np.prod(np.linalg.norm(m, axis=1)))


def mu_example_classical(lam1, lam2, g2, g3):
    """Closed-form mu(0..3) for wp' = lambda_1 wp + lambda_2."""
    return [-lam2**2 - g3, -2 * lam1 * lam2 - g2, -lam1**2, 4]


def duplication(variant, z, lattice: Lattice) -> IdentityReport:
    """wp(2z): classic, the two limit forms new1/new2, and the wp-only rational forms."""
    g2, g3 = lattice.g2, lattice.g3
    p, dp, d2p = _pd(z, lattice, 2)
    variant = str(variant)
    if variant in ("classic", "new1", "new2"):
        _guard("wp'(z)", dp, p ** 1.5)
    if variant in ("new1", "new2", "rational2"):
        _guard("wp(z)", p, 1.0)
    if variant == "classic":
        value = 0.25 * (d2p / dp) ** 2 - 2 * p
    elif variant == "new1":
        value = -d2p * (dp**2 - p * d2p) / (4 * p * dp**2) - p / 2 - g2 / (8 * p)
    elif variant == "new2":
        value = 0.25 * ((dp**2 - p * d2p) / (p * dp)) ** 2 + g3 / (4 * p**2)
    elif variant == "rational1":
        cubic = 4 * p**3 - g2 * p - g3
        _guard("4wp^3 - g2 wp - g3", cubic, 4 * p**3, g2 * p, g3)
        value = (16 * p**4 + 8 * g2 * p**2 + 32 * g3 * p + g2**2) / (16 * cubic)
    elif variant == "rational2":
        cubic = 4 * p**3 - g2 * p - g3
        _guard("4wp^3 - g2 wp - g3", cubic, 4 * p**3, g2 * p, g3)
        value = (1 / 16) * (4 * p**3 + g2 * p + 2 * g3) ** 2 / (p**2 * cubic) + g3 / (4 * p**2)
    else:
        raise ValueError(f"unknown duplication variant {variant!r}")
    short = {"rational1": "rat1", "rational2": "rat2"}.get(variant, variant)
    return _report(f"dup.{short}", [z], value, wp(2 * complex(z), lattice))


def invariant_identity(which, z, w, lattice: Lattice) -> IdentityReport:
    """Recover g2 or g3 from wp and wp' at two points."""
    pz, dpz = _pd(z, lattice)
    pw, dpw = _pd(w, lattice)
    _guard("wp(z) - wp(w)", pz - pw, pz, pw)
    slope = (dpz - dpw) / (pz - pw)
    icpt = (pz * dpw - pw * dpz) / (pz - pw)
    if which == "g2":
        value = (4 * (pz + pw) ** 2 - 4 * pz * pw - (pz + pw) * slope**2
                 - 2 * (dpz - dpw) * (pz * dpw - pw * dpz) / (pz - pw) ** 2)
        direct = lattice.g2
    elif which == "g3":
        value = pz * pw * slope**2 - 4 * pz * pw * (pz + pw) - icpt**2
        direct = lattice.g3
    else:
        raise ValueError(f"unknown invariant {which!r}")
    return _report(f"invariant.{which}", [z, w], value, direct)


# -- three points --------------------------------------------------------------

def three_term_lambdas(u, v, w, lattice: Lattice):
    """Cyclic-sum solutions of wp''(s) = lam1 wp'(s) + lam2 wp(s) + lam3 at s = u, v, w."""
    (pu, dpu, d2pu), (pv, dpv, d2pv), (pw, dpw, d2pw) = (_pd(s, lattice, 2) for s in (u, v, w))
    den = (dpu * pv - pu * dpv) + (dpv * pw - pv * dpw) + (dpw * pu - pw * dpu)
    scale = max(abs(t) for t in (dpu * pv, pu * dpv, dpv * pw, pv * dpw, dpw * pu, pw * dpu))
    if abs(den) <= GUARD * max(1.0, scale):
        raise DegenerateError("points violate the three-point determinant condition")
    lam1 = ((d2pu * pv - pu * d2pv) + (d2pv * pw - pv * d2pw) + (d2pw * pu - pw * d2pu)) / den
    lam2 = ((dpu * d2pv - d2pu * dpv) + (dpv * d2pw - d2pv * dpw) + (dpw * d2pu - d2pw * dpu)) / den
    lam3 = (pu * (d2pv * dpw - dpv * d2pw) + pv * (d2pw * dpu - dpw * d2pu)
            + pw * (d2pu * dpv - dpu * d2pv)) / den
    return lam1, lam2, lam3


def three_term_backsubstitution(u, v, w, lattice: Lattice) -> float:
    """Largest relative residual of the defining 3x3 system at the cyclic lambdas."""
    lam1, lam2, lam3 = three_term_lambdas(u, v, w, lattice)
    worst = 0.0
    for s in (u, v, w):
        p, dp, d2p = _pd(s, lattice, 2)
        rhs = lam1 * dp + lam2 * p + lam3
        worst = max(worst, abs(d2p - rhs) / max(abs(d2p), abs(lam1 * dp), abs(lam2 * p), abs(lam3), 1.0))
    return float(worst)


def mu_example_three_term(lam1, lam2, lam3, g2, g3):
    """Closed-form mu(0..4) for wp'' = lam1 wp' + lam2 wp + lam3."""
    return [-lam1**2 * g3 - lam3**2 - lam3 * g2 - g2**2 / 4,
            -lam1**2 * g2 - 2 * lam2 * lam3 - lam2 * g2,
            -lam2**2 + 12 * lam3 + 6 * g2,
            4 * lam1**2 + 12 * lam2,
            -36]


def three_term_addition(variant, u, v, w, lattice: Lattice) -> IdentityReport:
    """wp(u + v + w) by one of the four three-point addition formulas."""
    g2, g3 = lattice.g2, lattice.g3
    lam1, lam2, lam3 = three_term_lambdas(u, v, w, lattice)
    pu, pv, pw = wp(u, lattice), wp(v, lattice), wp(w, lattice)
    s1 = pu + pv + pw
    s2 = pu * pv + pv * pw + pw * pu
    s3 = pu * pv * pw
    variant = int(variant)
    if variant == 1:
        value = lam1**2 / 9 + lam2 / 3 - pu - pv - pw
    elif variant == 2:
        _guard("wp(u) + wp(v) + wp(w)", s1, pu, pv, pw)
        value = (lam2**2 - 12 * lam3 - 6 * g2) / (36 * s1) - s2 / s1
    elif variant == 3:
        _guard("wp(u)wp(v) + wp(v)wp(w) + wp(w)wp(u)", s2, pu * pv, pv * pw, pw * pu)
        value = -(lam1**2 * g2 + 2 * lam2 * lam3 + lam2 * g2) / (36 * s2) - s3 / s2
    elif variant == 4:
        _guard("wp(u)wp(v)wp(w)", s3, 1.0)
        value = (4 * lam1**2 * g3 + 4 * lam3**2 + 4 * lam3 * g2 + g2**2) / (144 * s3)
    else:
        raise ValueError(f"unknown three-term variant {variant!r}")
    direct = wp(complex(u) + complex(v) + complex(w), lattice)
    return _report(f"3term.v{variant}", [u, v, w], value, direct, lambdas=(lam1, lam2, lam3))


# -- triplication ------------------------------------------------------------

def triplication_lambdas(z, lattice: Lattice):
    """Limits of lam1..lam3 as u, v, w -> z, from derivative ratios."""
    p, p1, p2, p3, p4 = _pd(z, lattice, 4)
    den = p2**2 - p1 * p3
    _guard("wp''^2 - wp' wp'''", den, p2**2, p1 * p3)
    lam1 = (p2 * p3 - p1 * p4) / den
    lam2 = (p2 * p4 - p3**2) / den
    lam3 = (p * p3**2 + p1**2 * p4 + p2**3 - p * p2 * p4 - 2 * p1 * p2 * p3) / den
    return lam1, lam2, lam3


def triplication_lambdas_wp_only(z, lattice: Lattice):
    """The same limits written through wp and wp' only."""
    g2, g3 = lattice.g2, lattice.g3
    p, dp = _pd(z, lattice)
    den = 48 * p**4 - 24 * g2 * p**2 - 48 * g3 * p - g2**2
    _guard("48wp^4 - 24g2 wp^2 - 48g3 wp - g2^2", den, 48 * p**4, 24 * g2 * p**2, 48 * g3 * p, g2**2)
    lam1 = 48 * dp * (4 * p**3 - g2 * p - g3) / den
    lam2 = -(576 * p**5 - 96 * g2 * p**3 + 288 * g3 * p**2 + 36 * g2**2 * p + 24 * g2 * g3) / den
    lam3 = ((192 * p**6 + 240 * g2 * p**4 + 768 * g3 * p**3 - 12 * g2**2 * p**2 - 96 * g2 * g3 * p
             - 96 * g3**2 + g2**3)
            / (96 * p**4 - 48 * g2 * p**2 - 96 * g3 * p - 2 * g2**2))
    return lam1, lam2, lam3


def triplication_polynomial_terms(p, g2, g3):
    """The monomials on the right of the degree-9 polynomial form of wp(3z)."""
    return [256 * p**9, 768 * g2 * p**7, 6144 * g3 * p**6, 480 * g2**2 * p**5,
            -384 * g2 * g3 * p**4, (768 * g3**2 - 144 * g2**3) * p**3, -192 * g2**2 * g3 * p**2,
            (9 * g2**4 - 384 * g2 * g3**2) * p, 8 * g2**3 * g3 - 256 * g3**3]


def triplication(variant, z, lattice: Lattice) -> IdentityReport:
    """wp(3z) by the main triplication formula, its three alternates, or the polynomial form."""
    g2, g3 = lattice.g2, lattice.g3
    z = complex(z)
    direct = wp(3 * z, lattice)
    p = wp(z, lattice)
    if variant == "polynomial":
        den = 48 * p**4 - 24 * g2 * p**2 - 48 * g3 * p - g2**2
        lhs = den**2 * direct
        terms = triplication_polynomial_terms(p, g2, g3)
        rhs = sum(terms)
        dominant = max([abs(lhs)] + [abs(t) for t in terms])
        return IdentityReport("trip.poly", [z], complex(lhs), complex(rhs),
                              float(abs(lhs - rhs) / dominant))
    if variant == "lambdas":
        a = triplication_lambdas(z, lattice)
        b = triplication_lambdas_wp_only(z, lattice)
        worst = max(abs(x - y) / (1 + abs(y)) for x, y in zip(a, b))
        return IdentityReport("trip.lambdas", [z], complex(a[0]), complex(b[0]), float(worst))
    lam1, lam2, lam3 = triplication_lambdas(z, lattice)
    if variant != "main":
        _guard("wp(z)", p, 1.0)
    if variant == "main":
        value = lam1**2 / 9 + lam2 / 3 - 3 * p
    elif variant == "alt1":
        value = (1 / (108 * p)) * lam1**2 - g2 / (18 * p) - p - (1 / (9 * p)) * lam3
    elif variant == "alt1-corrected":
        # alt1 with lam2**2 in place of lam1**2; see README
        value = (1 / (108 * p)) * lam2**2 - g2 / (18 * p) - p - (1 / (9 * p)) * lam3
    elif variant == "alt2":
        value = (-p / 3 - g2 / (108 * p**2) * lam1**2
                 - (1 / (108 * p**2)) * lam2 * (g2 + 2 * lam3))
    elif variant == "alt3":
        value = (g2**2 / (144 * p**3) + g3 / (36 * p**3) * lam1**2
                 + g2 / (36 * p**3) * lam3 + (1 / (36 * p**3)) * lam3**2)
    else:
        raise ValueError(f"unknown triplication variant {variant!r}")
    return _report(f"trip.{variant}", [z], value, direct, lambdas=(lam1, lam2, lam3))


# -- sigma identities ----------------------------------------------------------

def _require_periods(lattice: Lattice):
    if not lattice.has_periods:
        raise UnsupportedModeError("sigma identities need a period basis")


def fs_identity(n, points, lattice: Lattice) -> IdentityReport:
    """Frobenius-Stickelberger determinant against its sigma product, n + 1 points.

    Both sides are elliptic in every argument, so each point is first moved
    to the cell nearest the origin; this keeps sigma inside the range where its
    truncated product is accurate.
    """
    _require_periods(lattice)
    n = int(n)
    pts = [reduce_argument(z, lattice)[0] for z in points]
    if len(pts) != n + 1:
        raise ValueError(f"fs identity of order {n} needs {n + 1} points")
    sg = {}

    def s(x):
        x = complex(x)
        if x not in sg:
            sg[x] = sigma(x, lattice)
        return sg[x]

    if n == 1:
        z, w = pts
        lhs = wp(z, lattice) - wp(w, lattice)
        rhs = s(w + z) * s(w - z) / (s(w) ** 2 * s(z) ** 2)
    elif n == 2:
        u, v, w = pts
        rows = [[1, *_pd(x, lattice)] for x in pts]
        lhs = determinant(np.array(rows, dtype=complex))
        rhs = 2 * s(u + v + w) * s(u - v) * s(v - w) * s(w - u) / (s(u) ** 3 * s(v) ** 3 * s(w) ** 3)
    else:
        orders = [-2, 0] + list(range(1, n))
        rows = []
        for x in pts:
            d = wp_derivs(x, orders, lattice)
            rows.append([d[k] for k in orders])
        lhs = determinant(np.array(rows, dtype=complex))
        coef = (-1) ** (n * (n - 1) // 2) * math.prod(math.factorial(i) for i in range(1, n + 1))
        rhs = coef * s(sum(pts))
        for x in pts:
            rhs /= s(x) ** (n + 1)
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                rhs *= s(pts[i] - pts[j])
    return _report(f"fs.n{n}", pts, lhs, rhs)


def det_general(z, w, lattice: Lattice):
    """The general determinant theorem on the two-point configuration."""
    return det_theorem_residual(AdditionConfig.successive(2), [z, w], lattice)
