"""General addition-theorem pipeline.

Given orders n_i with weights gamma_i and orders k_1..k_ell, solve

    sum_i gamma_i wp^(n_i)(z_j) = sum_i lambda_i wp^(k_i)(z_j),   j = 1..ell,

form phi = (odd part)^2 - (even part)^2 of psi = sum gamma wp^(n) - sum lambda wp^(k)
as a polynomial in wp with coefficients mu(0..ell+1), and read off wp(z_1+...+z_ell)
from Vieta's relations between the mu and the roots wp(z_1), ..., wp(z_ell),
wp(z_1+...+z_ell).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (ConfigError, ConsistencyError, DegenerateError, DegenerateSystemError,
                     DomainError, NoUsableRError, PhiDegenerateError)
from .evaluator import wp, wp_derivs
from .lattice import Lattice, complex_to_json, nearest_lattice_distance, parse_complex
from .symbolic import MuTable, elementary_symmetric_all, phi_mu

DET_DEGENERACY = 1e-10
CRAMER_AGREEMENT = 1e-8
CLASH_TOLERANCE = 1e-12
S_USABLE = 1e-8
MU_TOP_DEGENERACY = 1e-12
DET_THEOREM_TOL = 1e-8
COINCIDENCE_TOL = 1e-8


def _check_order(n) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ConfigError(f"orders must be integers, got {n!r}")
    n = int(n)
    if n < -2 or n == -1:
        raise ConfigError(f"orders must be -2 or non-negative, got {n}")
    return n


@dataclass(frozen=True)
class AdditionConfig:
    """Orders and weights of the linear system; ell is derived."""

    gamma_terms: tuple
    k_orders: tuple

    def __post_init__(self):
        terms = tuple((_check_order(n), g) for n, g in self.gamma_terms)
        ks = tuple(_check_order(k) for k in self.k_orders)
        object.__setattr__(self, "gamma_terms", terms)
        object.__setattr__(self, "k_orders", ks)
        if not terms:
            raise ConfigError("at least one gamma term is required")
        ns = [n for n, _ in terms]
        if len(set(ns)) != len(ns):
            raise ConfigError(f"gamma orders must be distinct: {ns}")
        if len(set(ks)) != len(ks):
            raise ConfigError(f"k orders must be distinct: {list(ks)}")
        if len(ks) != self.ell:
            raise ConfigError(f"need ell = max order + 1 = {self.ell} k orders, got {len(ks)}")

    @property
    def ell(self) -> int:
        return max(max(n for n, _ in self.gamma_terms), max(self.k_orders, default=-2)) + 1

    @property
    def n_max(self) -> int:
        return max(n for n, _ in self.gamma_terms)

    @property
    def k_max(self) -> int:
        return max(self.k_orders)

    @property
    def orders(self) -> list[int]:
        return sorted({n for n, _ in self.gamma_terms} | set(self.k_orders))

    def scaled(self, c) -> "AdditionConfig":
        return AdditionConfig(tuple((n, c * g) for n, g in self.gamma_terms), self.k_orders)

    @classmethod
    def successive(cls, ell: int) -> "AdditionConfig":
        """wp^(ell-1) = lambda_1 wp^(ell-2) + ... + lambda_{ell-1} wp + lambda_ell."""
        if ell < 2:
            raise ConfigError("ell must be at least 2")
        return cls(((ell - 1, 1),), tuple(range(ell - 2, -1, -1)) + (-2,))

    @classmethod
    def from_json(cls, data: dict) -> "AdditionConfig":
        try:
            terms = tuple((t["n"], parse_complex(t["gamma"])) for t in data["gamma_terms"])
            ks = tuple(data["k_orders"])
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed addition config: {exc}") from exc
        cfg = cls(terms, ks)
        if "ell" in data and data["ell"] != cfg.ell:
            raise ConfigError(f"explicit ell={data['ell']} does not match derived ell={cfg.ell}")
        return cfg

    def to_json(self) -> dict:
        return {"gamma_terms": [{"n": n, "gamma": complex_to_json(g)} for n, g in self.gamma_terms],
                "k_orders": list(self.k_orders), "ell": self.ell}


@dataclass
class SolveReport:
    lambdas: np.ndarray
    system_det: complex
    condition_estimate: float
    clash_flag: bool = False
    lambdas_cramer: np.ndarray | None = None
    cramer_agreement: float = 0.0

    @property
    def usable(self) -> bool:
        return not self.clash_flag

    def to_json(self) -> dict:
        return {"lambdas": [complex_to_json(x) for x in self.lambdas],
                "system_det": complex_to_json(self.system_det),
                "condition_estimate": self.condition_estimate,
                "clash_flag": self.clash_flag,
                "cramer_agreement": self.cramer_agreement}


@dataclass
class SumResult:
    z_sum: complex
    wp_sum_by_formula: complex
    wp_sum_direct: complex
    r_used: int
    residuals: dict = field(default_factory=dict)
    by_r: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"z_sum": complex_to_json(self.z_sum),
                "wp_sum_by_formula": complex_to_json(self.wp_sum_by_formula),
                "wp_sum_direct": complex_to_json(self.wp_sum_direct),
                "r_used": self.r_used,
                "residuals": dict(self.residuals),
                "by_r": {str(r): complex_to_json(v) for r, v in self.by_r.items()}}


@dataclass(frozen=True)
class DetTheoremResult:
    residual: float
    identically_vanishing: bool
    perturbed_residuals: tuple = ()

    @property
    def status(self) -> str:
        if self.identically_vanishing:
            return "degenerate determinant (theorem vacuous for this config)"
        return "pass" if self.residual <= DET_THEOREM_TOL else "fail"


def determinant(m) -> complex:
    """Leibniz expansion for small matrices, LAPACK LU beyond 6x6."""
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    if n == 0:
        return 1 + 0j
    if n > 6:
        return complex(np.linalg.det(m))
    total = 0j
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        prod = 1 + 0j
        for i, p in enumerate(perm):
            prod *= m[i, p]
        total += -prod if inversions % 2 else prod
    return total


def _row_norm_product(m) -> float:
    return float(np.prod(np.linalg.norm(np.asarray(m), axis=1)))


def _row(config: AdditionConfig, derivs: dict) -> tuple[complex, list[complex]]:
    lhs = sum(g * derivs[n] for n, g in config.gamma_terms)
    return lhs, [derivs[k] for k in config.k_orders]


def build_system(config: AdditionConfig, points, lattice: Lattice) -> tuple[np.ndarray, np.ndarray]:
    """Matrix A[j][i] = wp^(k_i)(z_j) and right-hand side b[j] = sum gamma wp^(n)(z_j)."""
    points = [complex(z) for z in points]
    if len(points) != config.ell:
        raise DomainError(f"need {config.ell} points, got {len(points)}")
    a = np.empty((config.ell, config.ell), dtype=complex)
    b = np.empty(config.ell, dtype=complex)
    for j, z in enumerate(points):
        b[j], a[j, :] = _row(config, wp_derivs(z, config.orders, lattice))
    return a, b


def solve_lambdas(matrix, rhs, config: AdditionConfig | None = None, *,
                  det_tol: float = DET_DEGENERACY) -> SolveReport:
    """Solve for lambda by LU with partial pivoting, cross-checked by Cramer's rule."""
    a = np.asarray(matrix, dtype=complex)
    b = np.asarray(rhs, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or b.shape != (a.shape[0],):
        raise DomainError("solve_lambdas needs a square system")
    det = determinant(a)
    if abs(det) <= det_tol * _row_norm_product(a):
        raise DegenerateSystemError("degenerate system: points violate the determinant condition")
    lam = np.linalg.solve(a, b)
    cramer = np.empty_like(lam)
    for j in range(a.shape[0]):
        aj = a.copy()
        aj[:, j] = b
        cramer[j] = determinant(aj) / det
    agreement = float(np.max(np.abs(lam - cramer)) / max(1.0, float(np.max(np.abs(lam)))))
    cond = float(np.linalg.cond(a))
    if cond < 1e6 and agreement > CRAMER_AGREEMENT:
        raise ConsistencyError(f"LU and Cramer solutions differ by {agreement:.3g}")
    report = SolveReport(lam, det, cond, False, cramer, agreement)
    if config is not None and config.n_max == config.k_max:
        gamma_a = dict(config.gamma_terms)[config.n_max]
        lam_b = lam[config.k_orders.index(config.k_max)]
        if abs(gamma_a - lam_b) <= CLASH_TOLERANCE * max(abs(gamma_a), abs(lam_b)):
            report.clash_flag = True
            raise ConfigError("top-order clash: n_a = k_b and gamma_a = lambda_b cancel the leading pole")
    return report


def solve(config: AdditionConfig, points, lattice: Lattice, **kwargs) -> SolveReport:
    a, b = build_system(config, points, lattice)
    return solve_lambdas(a, b, config, **kwargs)


def psi(config: AdditionConfig, lambdas, s: complex, lattice: Lattice) -> complex:
    """sum gamma_i wp^(n_i)(s) - sum lambda_i wp^(k_i)(s)."""
    lhs, row = _row(config, wp_derivs(s, config.orders, lattice))
    return lhs - sum(lam * v for lam, v in zip(lambdas, row))


def theorem_matrix(config: AdditionConfig, points, lattice: Lattice) -> np.ndarray:
    """(ell+1)x(ell+1) matrix with rows at z_1..z_ell and -(z_1+...+z_ell)."""
    rows = [complex(z) for z in points] + [-sum(complex(z) for z in points)]
    m = np.empty((len(rows), config.ell + 1), dtype=complex)
    for j, z in enumerate(rows):
        lhs, vals = _row(config, wp_derivs(z, config.orders, lattice))
        m[j, 0] = lhs
        m[j, 1:] = vals
    return m


def _normalized_det(m) -> float:
    return abs(determinant(m)) / _row_norm_product(m)


def det_theorem_residual(config: AdditionConfig, points, lattice: Lattice, *,
                         perturbations: int = 10, seed: int = 0) -> DetTheoremResult:
    """Normalized determinant of the (ell+1)-row matrix, plus a vanishing check.

    The determinant is recomputed on `perturbations` randomly perturbed point
    sets (each rebuilt with its own last row at minus the sum).  If it stays
    below tolerance on all of them the result is flagged as identically vanishing.
    """
    points = [complex(z) for z in points]
    solve(config, points, lattice)
    residual = float(_normalized_det(theorem_matrix(config, points, lattice)))
    rng = np.random.default_rng(seed)
    h = 0.05 * lattice.shortest_vector_length
    perturbed = []
    attempts = 0
    while len(perturbed) < perturbations and attempts < 20 * perturbations:
        attempts += 1
        d = rng.normal(size=(len(points), 2)) @ np.array([1, 1j])
        trial = [z + h * dz for z, dz in zip(points, d)]
        try:
            solve(config, trial, lattice)
            perturbed.append(float(_normalized_det(theorem_matrix(config, trial, lattice))))
        except (DegenerateError, DomainError, ConfigError):
            continue
    vanishing = bool(perturbations > 0 and residual <= DET_THEOREM_TOL
                     and len(perturbed) >= perturbations and max(perturbed) <= DET_THEOREM_TOL)
    return DetTheoremResult(residual, vanishing, tuple(perturbed))


def _check_theorem_points(points, lattice: Lattice):
    z = sum(points)
    tol = COINCIDENCE_TOL * lattice.shortest_vector_length
    if nearest_lattice_distance(z, lattice) < tol:
        raise DegenerateError("sum of points is a lattice point")
    for i, zi in enumerate(points):
        for sign in (1, -1):
            if nearest_lattice_distance(z - sign * zi, lattice) < tol:
                raise DegenerateError(f"sum coincides with {'+' if sign > 0 else '-'}z_{i + 1}")
        for j in range(i + 1, len(points)):
            if nearest_lattice_distance(zi + points[j], lattice) < tol:
                raise DegenerateError(f"z_{i + 1} = -z_{j + 1} modulo the lattice")


def mu_table(config: AdditionConfig, report: SolveReport, lattice: Lattice) -> MuTable:
    table = phi_mu(config, list(report.lambdas), lattice.g2, lattice.g3)
    top = table[config.ell + 1]
    if abs(top) <= MU_TOP_DEGENERACY * max(1.0, table.scale()):
        raise PhiDegenerateError("leading mu coefficient vanishes (phi is degenerate)")
    return table


def symmetric_relations(config: AdditionConfig, report: SolveReport, points, lattice: Lattice) -> list[float]:
    """Residuals of S_r(wp(z_1), ..., wp(z_ell), wp(z)) = (-1)^r mu(ell+1-r)/mu(ell+1), r = 1..ell+1."""
    points = [complex(z) for z in points]
    _check_theorem_points(points, lattice)
    table = mu_table(config, report, lattice)
    ell = config.ell
    values = [wp(z, lattice) for z in points] + [wp(sum(points), lattice)]
    s = elementary_symmetric_all(values)
    out = []
    for r in range(1, ell + 2):
        rhs = (-1) ** r * table[ell + 1 - r] / table[ell + 1]
        out.append(float(abs(s[r] - rhs) / (1 + abs(s[r]))))
    return out


def wp_of_sum(config: AdditionConfig, report: SolveReport, points, lattice: Lattice, r="auto") -> SumResult:
    """wp(z_1 + ... + z_ell) from the mu table and symmetric functions of wp(z_j)."""
    points = [complex(z) for z in points]
    _check_theorem_points(points, lattice)
    table = mu_table(config, report, lattice)
    ell = config.ell
    pvals = [wp(z, lattice) for z in points]
    s = elementary_symmetric_all(pvals) + [0j]  # S_{ell+1} of ell values is 0
    big = max(1.0, max(abs(p) for p in pvals))
    usable = [q for q in range(1, ell + 2) if abs(s[q - 1]) > S_USABLE * big ** (q - 1)]
    by_r = {q: ((-1) ** q * table[ell + 1 - q] / table[ell + 1] - s[q]) / s[q - 1] for q in usable}
    if r == "auto":
        if not usable:
            raise NoUsableRError("every S_(r-1) vanishes")
        r = max(usable, key=lambda q: (abs(s[q - 1]) / big ** (q - 1), -q))
    else:
        r = int(r)
        if not 1 <= r <= ell + 1:
            raise DomainError(f"r must be in 1..{ell + 1}")
        if r not in by_r:
            raise NoUsableRError(f"S_{r - 1} vanishes; r={r} is unusable")
    z = sum(points)
    direct = wp(z, lattice)
    value = by_r[r]
    residuals = {"wp_of_sum": float(abs(value - direct) / (1 + abs(direct)))}
    if len(by_r) > 1:
        vals = list(by_r.values())
        residuals["r_spread"] = float(max(abs(x - y) / (1 + abs(x)) for x in vals for y in vals))
    return SumResult(z, value, direct, r, residuals, by_r)


def corollary_identity_residual(config: AdditionConfig, report: SolveReport, points, lattice: Lattice,
                                r1: int, r2: int) -> float:
    """Residual of the cross relation between two choices r1, r2 of the sum formula."""
    ell = config.ell
    for r in (r1, r2):
        if not 1 <= r <= ell + 1:
            raise DomainError(f"r must be in 1..{ell + 1}, got {r}")
    points = [complex(z) for z in points]
    _check_theorem_points(points, lattice)
    table = mu_table(config, report, lattice)
    s = elementary_symmetric_all([wp(z, lattice) for z in points]) + [0j]
    mu = lambda r: table[ell + 1 - r]  # noqa: E731
    terms = [(-1) ** r1 * s[r2 - 1] * mu(r1), -(-1) ** r2 * s[r1 - 1] * mu(r2),
             -s[r1] * s[r2 - 1] * table[ell + 1], s[r2] * s[r1 - 1] * table[ell + 1]]
    scale = max(abs(t) for t in terms)
    if scale == 0:
        return 0.0
    return float(abs(sum(terms)) / scale)


def run(config: AdditionConfig, points, lattice: Lattice, r="auto", **kwargs) -> tuple[SolveReport, SumResult]:
    report = solve(config, points, lattice, **kwargs)
    return report, wp_of_sum(config, report, points, lattice, r)


def multiplication_confluent(config: AdditionConfig, s: complex, lattice: Lattice,
                             steps=(1e-2, 5e-3, 2.5e-3)) -> complex:
    """Approximate wp(ell * s) by letting the ell points merge at s.

    Points are s + d_i h with d_i = i - (ell+1)/2, i = 1..ell, so they sum to
    ell * s exactly and the result is even in h; two rounds of Richardson
    extrapolation in h^2 remove the h^2 and h^4 terms.  Accuracy is limited by
    the conditioning of the nearly confluent system.
    """
    ell = config.ell
    offsets = [i - (ell + 1) / 2 for i in range(1, ell + 1)]
    vals = []
    for h in steps:
        pts = [complex(s) + d * h for d in offsets]
        # deliberately near-confluent: only exact singularity is rejected
        vals.append(run(config, pts, lattice, det_tol=0.0)[1].wp_sum_by_formula)
    if len(steps) != 3 or not math.isclose(steps[0] / steps[1], 2) or not math.isclose(steps[1] / steps[2], 2):
        return vals[-1]
    r1 = (4 * vals[1] - vals[0]) / 3
    r2 = (4 * vals[2] - vals[1]) / 3
    return (16 * r2 - r1) / 15
