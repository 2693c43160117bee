"""Seeded randomized verification suites over a battery of lattices.

Every check records a non-negative residual under a stable id; a suite
passes when each id's worst residual is within its tolerance.  Draws come
from one numpy Generator per (suite, lattice), seeded from the run seed, so
identical arguments give byte-identical JSON reports.
"""
from __future__ import annotations

import cmath
import itertools
import json
import math
import zlib
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import engine, identities as ids
from .engine import AdditionConfig
from .errors import ConfigError, DegenerateError, DomainError, GuardedInputError, NumericError
from .evaluator import cauchy_derivative, sigma, wp, wp_deriv, wp_derivs, wp_lattice_sum, wp_pair
from .lattice import Lattice, half_period_values, nearest_lattice_distance
from .symbolic import derivative_form, phi_mu

SUITES = ("evaluator", "classical", "invariants", "threeterm", "triplication", "fs", "engine", "symbolic")

DEFAULT_TOLERANCES = {
    "eval.ode": 1e-9, "eval.oracle": 1e-6, "eval.parity": 1e-10, "eval.periodicity": 1e-10,
    "eval.second": 1e-5, "eval.logsigma": 1e-4, "eval.sigma_odd": 1e-12,
    "addition.classical": 1e-8, "addition.v1": 1e-8, "addition.v2": 1e-8, "addition.v3": 1e-8,
    "addition.agree": 1e-7, "det.classical": 1e-9,
    "dup.classic": 1e-8, "dup.new1": 1e-8, "dup.new2": 1e-8, "dup.rat1": 1e-8, "dup.rat2": 1e-8,
    "invariant.g2": 1e-8, "invariant.g3": 1e-8, "invariant.halfperiod": 1e-10,
    "3term.v1": 1e-7, "3term.v2": 1e-7, "3term.v3": 1e-7, "3term.v4": 1e-7,
    "3term.agree": 1e-7, "3term.backsub": 1e-9, "3term.symmetry": 1e-9,
    "trip.main": 1e-6, "trip.alt1": 1e-6, "trip.alt1-corrected": 1e-6, "trip.alt2": 1e-6,
    "trip.alt3": 1e-6, "trip.poly": 1e-6, "trip.lambdas": 1e-8,
    "fs.n1": 1e-4, "fs.n2": 1e-3,
    "engine.wp_of_sum": 1e-7, "engine.r_spread": 1e-7, "engine.symmetric": 1e-7,
    "engine.corollary": 1e-7, "engine.psi": 1e-8, "engine.scale": 1e-9, "engine.coherence": 1e-8,
    "engine.l4": 1e-6, "det.general": 1e-8,
    "symbolic.degree": 0.0, "symbolic.fd": 1e-4, "symbolic.mu_exact": 0.0, "symbolic.mu_float": 1e-12,
}

POLE_MARGIN = 0.05
MAX_RESAMPLE = 100
_SKIP = (GuardedInputError, DegenerateError, ConfigError, DomainError, NumericError)


def default_lattices() -> dict[str, Lattice]:
    return {"square": Lattice.from_half_periods(1, 1j),
            "hexagonal": Lattice.from_half_periods(1, cmath.exp(1j * math.pi / 3)),
            "generic": Lattice.from_half_periods(1, 0.3 + 1.1j)}


@dataclass
class Collector:
    """Worst residual per id, overall and per lattice."""
    tolerances: dict
    worst: dict = field(default_factory=dict)
    by_lattice: dict = field(default_factory=dict)
    samples: dict = field(default_factory=dict)
    resampled: int = 0
    lattice: str = ""

    def add(self, ident: str, residual) -> None:
        residual = float(residual)
        if math.isnan(residual):
            residual = math.inf
        self.worst[ident] = max(self.worst.get(ident, 0.0), residual)
        per = self.by_lattice.setdefault(ident, {})
        per[self.lattice] = max(per.get(self.lattice, 0.0), residual)
        self.samples[ident] = self.samples.get(ident, 0) + 1

    def report(self) -> dict:
        out = {}
        for ident in sorted(self.worst):
            tol = self.tolerances[ident]
            out[ident] = {"max_residual": self.worst[ident], "tolerance": tol,
                          "passed": self.worst[ident] <= tol, "samples": self.samples[ident],
                          "by_lattice": dict(sorted(self.by_lattice[ident].items()))}
        return out


class Sampler:
    """Uniform points in the fundamental cell, kept away from the poles."""

    def __init__(self, lattice: Lattice, rng: np.random.Generator):
        self.lattice = lattice
        self.rng = rng
        self.margin = POLE_MARGIN * lattice.shortest_vector_length

    def ok(self, *args) -> bool:
        if not self.lattice.has_periods:
            return all(abs(z) >= self.margin for z in args)
        return all(nearest_lattice_distance(z, self.lattice) >= self.margin for z in args)

    def point(self) -> complex:
        L = self.lattice
        while True:
            a, b = self.rng.random(2)
            if L.has_periods:
                z = complex(a * 2 * L.omega1 + b * 2 * L.omega2)
            else:
                rad = 0.5 * L.radius * L.scale
                z = complex(rad * math.sqrt(a) * cmath.exp(2j * math.pi * b))
            if self.ok(z):
                return z

    def points(self, k: int, combos=()) -> list[complex]:
        """k points with every signed pair/triple sum in `combos` also away from poles."""
        while True:
            pts = [self.point() for _ in range(k)]
            extra = [sum(c * p for c, p in zip(coef, pts)) for coef in combos]
            if self.ok(*extra):
                return pts


def _attempt(col: Collector, fn) -> None:
    """Call fn() until it succeeds without a guard tripping."""
    for _ in range(MAX_RESAMPLE):
        try:
            fn()
            return
        except _SKIP:
            col.resampled += 1
    raise NumericError("could not draw an admissible sample")


def _rel(a, b) -> float:
    return abs(a - b) / (1 + abs(b))


# -- suites ------------------------------------------------------------------

def suite_evaluator(lat: Lattice, smp: Sampler, trials: int, col: Collector) -> None:
    g2, g3 = lat.g2, lat.g3
    for _ in range(trials):
        z = smp.point()
        p, dp = wp_pair(z, lat)
        col.add("eval.ode", abs(dp**2 - (4 * p**3 - g2 * p - g3)) / (1 + abs(p)) ** 3)
        d = wp_derivs(z, range(7), lat)
        dm = wp_derivs(-z, range(7), lat)
        col.add("eval.parity", max(abs(dm[n] - (-1) ** n * d[n]) / (1 + abs(d[n])) for n in range(7)))
        h = 1e-5 * lat.shortest_vector_length
        fd = (wp_deriv(z + h, 1, lat) - wp_deriv(z - h, 1, lat)) / (2 * h)
        col.add("eval.second", abs(fd - d[2]) / max(abs(d[2]), 1.0))
        if lat.has_periods:
            shifted = max(_rel(wp(z + 2 * lat.omega1, lat), p), _rel(wp(z + 2 * lat.omega2, lat), p))
            col.add("eval.periodicity", shifted)
    if not lat.has_periods:
        return
    for _ in range(min(trials, 50)):
        z = smp.point()
        col.add("eval.oracle", abs(wp(z, lat) - wp_lattice_sum(z, lat)) / abs(wp_lattice_sum(z, lat)))
    for _ in range(min(trials, 20)):
        z = smp.point()
        s0 = sigma(z, lat)
        col.add("eval.sigma_odd", abs(sigma(-z, lat) + s0) / abs(s0))
        h = 1e-4 * lat.shortest_vector_length
        # second difference of log sigma, taken on the ratio to avoid branch jumps
        d2 = cmath.log(sigma(z + h, lat) * sigma(z - h, lat) / s0**2) / h**2
        p = wp(z, lat)
        col.add("eval.logsigma", abs(d2 + p) / max(abs(p), 1.0))


def suite_classical(lat: Lattice, smp: Sampler, trials: int, col: Collector) -> None:
    variants = ("classical", "1", "2", "3")
    dups = ("classic", "new1", "new2", "rational1", "rational2")
    for _ in range(trials):
        def addition():
            z, w = smp.points(2, [(1, 1), (1, -1)])
            reps = [ids.classical_addition(v, z, w, lat) for v in variants]
            det = ids.classical_determinant(z, w, lat)
            for r in reps:
                col.add(r.identity_id, r.relative_residual)
            col.add("addition.agree", max(_rel(a.formula_value, b.formula_value)
                                          for a, b in itertools.combinations(reps, 2)))
            col.add("det.classical", det)

        def duplication():
            z, = smp.points(1, [(2,)])
            reps = [ids.duplication(v, z, lat) for v in dups]
            for r in reps:
                col.add(r.identity_id, r.relative_residual)

        _attempt(col, addition)
        _attempt(col, duplication)


def suite_invariants(lat: Lattice, smp: Sampler, trials: int, col: Collector) -> None:
    for _ in range(trials):
        def once():
            z, w = smp.points(2, [(1, 1), (1, -1)])
            reps = [ids.invariant_identity(k, z, w, lat) for k in ("g2", "g3")]
            for r in reps:
                col.add(r.identity_id, r.relative_residual)
        _attempt(col, once)
    if lat.has_periods:
        e1, e2, e3 = half_period_values(lat)
        scale2, scale3 = 1 + abs(lat.g2), 1 + abs(lat.g3)
        res = [abs(-4 * (e1 * e2 + e2 * e3 + e3 * e1) - lat.g2) / scale2,
               abs(4 * e1 * e2 * e3 - lat.g3) / scale3]
        try:
            res.append(ids.invariant_identity("g2", lat.omega1, lat.omega2, lat).relative_residual)
            res.append(ids.invariant_identity("g3", lat.omega1, lat.omega2, lat).relative_residual)
        except GuardedInputError:
            pass
        col.add("invariant.halfperiod", max(res))


def suite_threeterm(lat: Lattice, smp: Sampler, trials: int, col: Collector) -> None:
    combos = [(1, 1, 1), (1, -1, 0), (0, 1, -1), (1, 0, -1)]
    for _ in range(trials):
        def once():
            u, v, w = smp.points(3, combos)
            reps = [ids.three_term_addition(k, u, v, w, lat) for k in (1, 2, 3, 4)]
            back = ids.three_term_backsubstitution(u, v, w, lat)
            base = ids.three_term_lambdas(u, v, w, lat)
            sym = 0.0
            for perm in ((v, w, u), (w, v, u), (u, w, v)):
                lam = ids.three_term_lambdas(*perm, lat)
                sym = max(sym, max(_rel(a, b) for a, b in zip(lam, base)))
                sym = max(sym, _rel(ids.three_term_addition(1, *perm, lat).formula_value, reps[0].formula_value))
            for r in reps:
                col.add(r.identity_id, r.relative_residual)
            col.add("3term.agree", max(_rel(a.formula_value, b.formula_value)
                                       for a, b in itertools.combinations(reps, 2)))
            col.add("3term.backsub", back)
            col.add("3term.symmetry", sym)
        _attempt(col, once)


TRIPLICATION_VARIANTS = ("main", "alt1", "alt1-corrected", "alt2", "alt3", "polynomial", "lambdas")


def suite_triplication(lat: Lattice, smp: Sampler, trials: int, col: Collector) -> None:
    for _ in range(trials):
        def once():
            z, = smp.points(1, [(3,), (2,)])
            reps = [ids.triplication(v, z, lat) for v in TRIPLICATION_VARIANTS]
            for r in reps:
                col.add(r.identity_id, r.relative_residual)
        _attempt(col, once)


def suite_fs(lat: Lattice, smp: Sampler, trials: int, col: Collector) -> None:
    if not lat.has_periods:
        return
    for _ in range(min(trials, 50)):
        def n1():
            pts = smp.points(2, [(1, 1), (1, -1)])
            col.add("fs.n1", ids.fs_identity(1, pts, lat).relative_residual)

        def n2():
            pts = smp.points(3, [(1, 1, 1), (1, -1, 0), (0, 1, -1), (1, 0, -1)])
            col.add("fs.n2", ids.fs_identity(2, pts, lat).relative_residual)
        _attempt(col, n1)
        _attempt(col, n2)


def random_config(rng: np.random.Generator, ell: int) -> AdditionConfig:
    """A random admissible configuration of order ell.

    The k orders take all but one order of {-2, 0, ..., ell-1}; the omitted one
    always carries a gamma term (otherwise lambda = gamma solves the system
    and the clash rule rejects it), plus possibly one order shared with k.
    """
    pool = [-2] + list(range(ell))
    omitted = int(rng.integers(len(pool)))
    ks = [pool[i] for i in rng.permutation(len(pool)) if i != omitted]
    ns = [pool[omitted]]
    if rng.random() < 0.5:
        ns.append(ks[int(rng.integers(len(ks)))])
    gammas = rng.normal(size=(len(ns), 2)) @ np.array([1, 1j])
    return AdditionConfig(tuple((n, complex(g)) for n, g in zip(ns, gammas)), tuple(ks))


def _psi_residual(config, lambdas, s, lat) -> float:
    orders = sorted({n for n, _ in config.gamma_terms} | set(config.k_orders))
    d = wp_derivs(s, orders, lat)
    terms = [g * d[n] for n, g in config.gamma_terms] + [-lam * d[k] for lam, k in zip(lambdas, config.k_orders)]
    return abs(sum(terms)) / max(1.0, max(abs(t) for t in terms))


def _engine_point_set(config, smp: Sampler, col: Collector, lat: Lattice, check_scale: bool) -> None:
    ell = config.ell
    combos = [tuple([1] * ell)]
    pts = smp.points(ell, combos)
    report, result = engine.run(config, pts, lat)
    col.add("engine.wp_of_sum", result.residuals["wp_of_sum"])
    col.add("engine.r_spread", result.residuals.get("r_spread", 0.0))
    col.add("engine.symmetric", max(engine.symmetric_relations(config, report, pts, lat)))
    col.add("engine.corollary", max(engine.corollary_identity_residual(config, report, pts, lat, a, b)
                                    for a, b in itertools.combinations(range(1, ell + 2), 2)))
    col.add("engine.psi", max(_psi_residual(config, report.lambdas, s, lat) for s in pts + [-sum(pts)]))
    if check_scale:
        c = 2.0 - 1.0j
        _, scaled = engine.run(config.scaled(c), pts, lat, r=result.r_used)
        col.add("engine.scale", _rel(scaled.wp_sum_by_formula, result.wp_sum_by_formula))
    if ell == 2:
        col.add("det.general", engine.det_theorem_residual(config, pts, lat, perturbations=0).residual)


def suite_engine(lat: Lattice, smp: Sampler, trials: int, col: Collector) -> None:
    rng = smp.rng
    n_cfg = n_pts = min(trials, 20)
    for ell in (2, 3):
        for _ in range(n_cfg):
            for _ in range(MAX_RESAMPLE):
                config = random_config(rng, ell)
                try:
                    _engine_point_set(config, smp, col, lat, True)
                    break
                except _SKIP:
                    col.resampled += 1
            for _ in range(n_pts - 1):
                _attempt(col, lambda: _engine_point_set(config, smp, col, lat, False))
    for ell in (2, 3):
        cfg = AdditionConfig.successive(ell)
        for _ in range(n_pts):
            def coherent():
                pts = smp.points(ell, [tuple([1] * ell)])
                _, res = engine.run(cfg, pts, lat)
                if ell == 2:
                    ref = ids.classical_addition(1, *pts, lat).formula_value
                else:
                    ref = ids.three_term_addition(1, *pts, lat).formula_value
                col.add("engine.coherence", _rel(res.wp_sum_by_formula, ref))
                if ell == 2:
                    col.add("det.general", engine.det_theorem_residual(cfg, pts, lat, perturbations=0).residual)
            _attempt(col, coherent)
    cfg4 = AdditionConfig.successive(4)
    for _ in range(n_pts):
        def l4():
            pts = smp.points(4, [(1, 1, 1, 1)])
            col.add("engine.l4", engine.run(cfg4, pts, lat)[1].residuals["wp_of_sum"])
        _attempt(col, l4)


def _fd_check(lat: Lattice, smp: Sampler, col: Collector, top: int = 10) -> None:
    z = smp.point()
    p, dp = wp_pair(z, lat)
    radius = 0.5 * (nearest_lattice_distance(z, lat) if lat.has_periods else abs(z))
    f = lambda x: wp(x, lat)  # noqa: E731
    worst = 0.0
    for n in range(2, top + 1):
        exact = derivative_form(n).evaluate(p, dp, lat.g2, lat.g3)
        worst = max(worst, abs(cauchy_derivative(f, z, n, radius) - exact) / abs(exact))
    col.add("symbolic.fd", worst)


def degree_mismatches(top: int = 20) -> int:
    bad = 0
    for n in range(0, top + 1):
        form = derivative_form(n)
        if n % 2 == 0:
            bad += form.even_part.degree != n // 2 + 1 or not form.odd_part.is_zero()
        else:
            bad += form.odd_part.degree != (n - 1) // 2 or not form.even_part.is_zero()
    return bad


def mu_table_mismatch(rng: np.random.Generator, exact: bool) -> float:
    """Compare phi_mu against the closed-form two- and three-point tables at random lambda, g2, g3."""
    if exact:
        draw = lambda: Fraction(int(rng.integers(-50, 51)), int(rng.integers(1, 20)))  # noqa: E731
    else:
        draw = lambda: complex(*rng.normal(size=2))  # noqa: E731
    g2, g3 = draw(), draw()
    worst = 0.0
    l1, l2 = draw(), draw()
    got = phi_mu(AdditionConfig.successive(2), [l1, l2], g2, g3).mu
    want = ids.mu_example_classical(l1, l2, g2, g3)
    l1, l2, l3 = draw(), draw(), draw()
    got = list(got) + list(phi_mu(AdditionConfig.successive(3), [l1, l2, l3], g2, g3).mu)
    want = want + ids.mu_example_three_term(l1, l2, l3, g2, g3)
    for a, b in zip(got, want):
        if exact:
            worst = max(worst, 0.0 if a == b else 1.0)
        else:
            worst = max(worst, abs(a - b) / (1 + abs(b)))
    return worst


def suite_symbolic(lat: Lattice, smp: Sampler, trials: int, col: Collector) -> None:
    col.add("symbolic.degree", degree_mismatches())
    for _ in range(min(trials, 10)):
        _attempt(col, lambda: _fd_check(lat, smp, col))
    for _ in range(min(trials, 20)):
        col.add("symbolic.mu_exact", mu_table_mismatch(smp.rng, True))
        col.add("symbolic.mu_float", mu_table_mismatch(smp.rng, False))


SUITE_FUNCS = {
    "evaluator": suite_evaluator, "classical": suite_classical, "invariants": suite_invariants,
    "threeterm": suite_threeterm, "triplication": suite_triplication, "fs": suite_fs,
    "engine": suite_engine, "symbolic": suite_symbolic,
}


def _rng(seed: int, suite: str, lattice_name: str) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), zlib.crc32(suite.encode()), zlib.crc32(lattice_name.encode())])
    return np.random.default_rng(ss)


def run_suite(suite: str, lattices: dict | None = None, trials: int = 100, seed: int = 42,
              tolerances: dict | None = None) -> dict:
    if suite not in SUITE_FUNCS:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)} or all")
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    lattices = default_lattices() if lattices is None else lattices
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    col = Collector(tol)
    for name, lat in lattices.items():
        col.lattice = name
        SUITE_FUNCS[suite](lat, Sampler(lat, _rng(seed, suite, name)), trials, col)
    checks = col.report()
    return {"suite": suite, "seed": int(seed), "trials": int(trials), "lattices": list(lattices),
            "passed": all(c["passed"] for c in checks.values()),
            "failing": [k for k, c in checks.items() if not c["passed"]],
            "resampled": col.resampled, "checks": checks}


def run(suite: str = "all", lattices: dict | None = None, trials: int = 100, seed: int = 42,
        tolerances: dict | None = None) -> dict:
    """Run one suite, or all of them, and return the JSON-ready report."""
    if tolerances:
        unknown = set(tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown check ids in tolerance overrides: {sorted(unknown)}")
    if suite != "all":
        return run_suite(suite, lattices, trials, seed, tolerances)
    reports = {s: run_suite(s, lattices, trials, seed, tolerances) for s in SUITES}
    return {"suite": "all", "seed": int(seed), "trials": int(trials),
            "passed": all(r["passed"] for r in reports.values()),
            "failing": [k for r in reports.values() for k in r["failing"]],
            "suites": reports}


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=True)
