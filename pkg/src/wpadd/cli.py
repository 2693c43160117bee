"""Command-line interface: invariants, eval, derive, add, mu, verify.

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 pole or domain error, 4 degenerate system.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import engine, verify
from .engine import AdditionConfig
from .errors import ConfigError, WpError
from .evaluator import wp_deriv
from .lattice import Lattice, complex_to_json, half_period_values, parse_complex
from .symbolic import derivative_form

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Malformed command-line input; always exit code 2."""


def _load_json_arg(value: str, what: str):
    """Inline JSON, or a path to a JSON file."""
    text = value.strip()
    if not text.startswith(("{", "[")):
        path = Path(value)
        if not path.is_file():
            raise InputError(f"{what}: {value!r} is neither inline JSON nor an existing file")
        text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what}: malformed JSON ({exc})") from exc


def load_lattice(value: str | None) -> Lattice:
    if value is None:
        raise InputError("--lattice is required for this command")
    named = verify.default_lattices()
    if value in named:
        return named[value]
    spec = _load_json_arg(value, "--lattice")
    try:
        return Lattice.from_spec(spec)
    except WpError as exc:
        # a lattice that cannot be built is bad input, whatever the cause
        raise InputError(f"--lattice: {exc}") from exc


def load_config(value: str) -> AdditionConfig:
    if value.startswith("successive:"):
        try:
            return AdditionConfig.successive(int(value.split(":", 1)[1]))
        except ValueError as exc:
            raise InputError(f"--config: {exc}") from exc
    data = _load_json_arg(value, "--config")
    if not isinstance(data, dict):
        raise InputError("--config must be a JSON object")
    return AdditionConfig.from_json(data)


def parse_points(value: str) -> list[complex]:
    """Comma-separated complex numbers, or a JSON list of [re, im] pairs."""
    try:
        if value.strip().startswith("["):
            return [parse_complex(v) for v in json.loads(value)]
        return [parse_complex(v) for v in value.split(",") if v.strip()]
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot parse points {value!r}: {exc}") from exc


def parse_tolerances(values) -> dict:
    out = {}
    for item in values or []:
        if "=" in item:
            key, _, tol = item.partition("=")
            keys = [key.strip()]
        else:
            tol, keys = item, list(verify.DEFAULT_TOLERANCES)
        try:
            tol = float(tol)
        except ValueError as exc:
            raise InputError(f"--tol: {item!r} is not ID=VALUE or VALUE") from exc
        for k in keys:
            out[k] = tol
    return out


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


def _fmt(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


# -- commands ----------------------------------------------------------------

def cmd_invariants(args) -> int:
    lat = load_lattice(args.lattice)
    e = half_period_values(lat) if lat.has_periods else lat.e_values
    payload = {"g2": complex_to_json(lat.g2), "g3": complex_to_json(lat.g3),
               "e1": complex_to_json(e[0]), "e2": complex_to_json(e[1]), "e3": complex_to_json(e[2]),
               "discriminant": complex_to_json(lat.discriminant)}
    lines = [f"g2 = {_fmt(lat.g2)}", f"g3 = {_fmt(lat.g3)}"]
    lines += [f"e{i + 1} = {_fmt(x)}" for i, x in enumerate(e)]
    lines.append(f"discriminant = {_fmt(lat.discriminant)}")
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_eval(args) -> int:
    lat = load_lattice(args.lattice)
    z = parse_points(args.z)
    if len(z) != 1:
        raise InputError("--z takes exactly one complex number")
    value = wp_deriv(z[0], args.n, lat)
    _emit(args, {"z": complex_to_json(z[0]), "n": args.n, "value": complex_to_json(value)},
          [_fmt(value)])
    return EXIT_OK


def cmd_derive(args) -> int:
    form = derivative_form(args.n)
    text = form.render()
    _emit(args, {"n": args.n, "even": form.even_part.render(), "odd": form.odd_part.render(), "form": text},
          [text])
    return EXIT_OK


def _config_and_points(args):
    if args.config is None:
        raise InputError("--config is required")
    if args.points is None:
        raise InputError("--points is required")
    return load_config(args.config), parse_points(args.points), load_lattice(args.lattice)


def cmd_add(args) -> int:
    config, points, lat = _config_and_points(args)
    r = args.r if args.r == "auto" else int(args.r)
    report, result = engine.run(config, points, lat, r=r)
    payload = {"config": config.to_json(), "solve": report.to_json(), "result": result.to_json()}
    lines = [f"wp(sum) by formula = {_fmt(result.wp_sum_by_formula)}",
             f"wp(sum) direct     = {_fmt(result.wp_sum_direct)}",
             f"r used = {result.r_used}"]
    lines += [f"{k} = {v:.3e}" for k, v in sorted(result.residuals.items())]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_mu(args) -> int:
    config, points, lat = _config_and_points(args)
    report = engine.solve(config, points, lat)
    table = engine.mu_table(config, report, lat)
    payload = {"ell": config.ell, "lambdas": [complex_to_json(x) for x in report.lambdas],
               "mu": [complex_to_json(x) for x in table.mu]}
    lines = [f"lambda_{i + 1} = {_fmt(x)}" for i, x in enumerate(report.lambdas)]
    lines += [f"mu({r}) = {_fmt(x)}" for r, x in enumerate(table.mu)]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.trials < 1:
        raise InputError("--trials must be at least 1")
    lattices = None if args.lattice is None else {"custom": load_lattice(args.lattice)}
    try:
        report = verify.run(args.suite, lattices, args.trials, args.seed, parse_tolerances(args.tol))
    except ConfigError as exc:
        raise InputError(str(exc)) from exc
    if args.json:
        print(verify.dumps(report))
    else:
        suites = report["suites"] if args.suite == "all" else {args.suite: report}
        for name, rep in suites.items():
            print(f"[{name}]")
            for ident, c in rep["checks"].items():
                tag = "PASS" if c["passed"] else "FAIL"
                print(f"  {tag} {ident:22s} max {c['max_residual']:.3e}  tol {c['tolerance']:.0e}")
        if report["failing"]:
            print("failing: " + ", ".join(report["failing"]))
    return EXIT_OK if report["passed"] else EXIT_FAIL


# -- parser ------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, top: bool) -> None:
    # subcommand copies use SUPPRESS so flags given before the subcommand survive
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    p.add_argument("--lattice", default=d(None),
                   help="lattice: JSON file, inline JSON, or one of square|hexagonal|generic")
    p.add_argument("--seed", type=int, default=d(42), help="random seed (default 42)")
    p.add_argument("--trials", type=int, default=d(100), help="trials per lattice (default 100)")
    p.add_argument("--tol", action="append", default=d(None), metavar="ID=VALUE",
                   help="tolerance override; repeatable; a bare VALUE applies to every check")
    p.add_argument("--json", action="store_true", default=d(False), help="machine-readable JSON output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wpadd", description="Weierstrass wp addition theorems")
    _add_common(parser, True)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        _add_common(p, False)
        p.set_defaults(func=func)
        return p

    add("invariants", cmd_invariants, "g2, g3, e1..e3 and the discriminant of a lattice")
    p = add("eval", cmd_eval, "evaluate the n-th derivative of wp (n = -2 gives 1)")
    p.add_argument("--z", required=True, help="complex argument, e.g. 0.3+0.2i (use --z=-0.1+i for a leading minus)")
    p.add_argument("--n", type=int, default=0)
    p = add("derive", cmd_derive, "print wp^(n) reduced to E(X) + P' * O(X)")
    p.add_argument("n", type=int)
    for name, func, help_ in (("add", cmd_add, "wp of a sum through the mu-table pipeline"),
                              ("mu", cmd_mu, "print lambdas and mu(0..ell+1) for a config and points")):
        p = add(name, func, help_)
        p.add_argument("--config", help="config JSON (file or inline) or successive:ELL")
        p.add_argument("--points", help="comma-separated complex points, or a JSON list")
        if name == "add":
            p.add_argument("--r", default="auto", help="which symmetric relation to use (default auto)")
    p = add("verify", cmd_verify, "run the randomized verification suites")
    p.add_argument("suite", nargs="?", default="all", choices=list(verify.SUITES) + ["all"])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except WpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
