"""Exact algebra over Q[g2, g3]: polynomials in wp, derivative forms, phi and mu.

Every derivative wp^(n) is written as ``E(X) + P' * O(X)`` with ``X = wp`` and
``P' = wp'``, E and O polynomials with coefficients in Q[g2, g3]; exactly one of
the two parts is nonzero.  The forms follow from

    d/dz P(wp)       = wp' * P'(wp)
    d/dz wp' * P(wp) = (6X^2 - g2/2) P + (4X^3 - g2 X - g3) P'

starting from wp^(-2) = 1, wp^(0) = X and wp^(1) = P' * 1.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number

from .errors import DomainError


class InvariantPoly:
    """Sparse polynomial in g2, g3 with exact rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for (a, b), c in (terms or {}).items():
            c = Fraction(c)
            if c:
                clean[(int(a), int(b))] = c
        self.terms = clean

    @classmethod
    def const(cls, c) -> "InvariantPoly":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, a: int, b: int, c=1) -> "InvariantPoly":
        return cls({(a, b): c})

    def is_zero(self) -> bool:
        return not self.terms

    def _coerce(self, other) -> "InvariantPoly":
        if isinstance(other, InvariantPoly):
            return other
        return InvariantPoly.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return InvariantPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return InvariantPoly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                k = (a1 + a2, b1 + b2)
                out[k] = out.get(k, 0) + c1 * c2
        return InvariantPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = InvariantPoly.const(other)
        if not isinstance(other, InvariantPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def evaluate(self, g2, g3):
        """Value at (g2, g3); exact when g2, g3 are Fractions."""
        total = 0
        for (a, b), c in self.terms.items():
            total += c * g2**a * g3**b
        return total

    def __repr__(self):
        return f"InvariantPoly({render_terms([(c, a, b, 0) for (a, b), c in self.terms.items()])!r})"


_ZERO = InvariantPoly()
_ONE = InvariantPoly.const(1)


class WpPoly:
    """Dense polynomial in X (standing for wp) with InvariantPoly coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [c if isinstance(c, InvariantPoly) else InvariantPoly.const(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self) -> int:
        """Exact degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, i: int) -> InvariantPoly:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else _ZERO

    def __add__(self, other: "WpPoly") -> "WpPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return WpPoly([self.coeff(i) + other.coeff(i) for i in range(n)])

    def __neg__(self):
        return WpPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other) -> "WpPoly":
        if not isinstance(other, WpPoly):
            return WpPoly([c * other for c in self.coeffs])
        if self.is_zero() or other.is_zero():
            return WpPoly()
        out = [_ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return WpPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, WpPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def derivative(self) -> "WpPoly":
        return WpPoly([c * i for i, c in enumerate(self.coeffs)][1:])

    def evaluate(self, x, g2, g3):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c.evaluate(g2, g3)
        return acc

    def numeric_coeffs(self, g2, g3) -> list:
        return [c.evaluate(g2, g3) for c in self.coeffs]

    def render(self) -> str:
        return render_terms([(c, a, b, i)
                             for i, ip in enumerate(self.coeffs)
                             for (a, b), c in ip.terms.items()])

    def __repr__(self):
        return f"WpPoly({self.render()!r})"


def _fmt_monomial(a: int, b: int, c: int) -> str:
    parts = []
    for name, e in (("g2", a), ("g3", b), ("X", c)):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return " ".join(parts)


def render_terms(terms) -> str:
    """Render (coeff, a, b, c) tuples as 'p/q g2^a g3^b X^c' joined by +/-.

    Terms are sorted by descending X power, then g2 power, then g3 power.
    """
    terms = sorted((t for t in terms if t[0] != 0), key=lambda t: (-t[3], -t[1], -t[2]))
    if not terms:
        return "0"
    out = []
    for idx, (coef, a, b, c) in enumerate(terms):
        coef = Fraction(coef)
        mono = _fmt_monomial(a, b, c)
        mag = abs(coef)
        if mono and mag == 1:
            body = mono
        elif mono:
            body = f"{mag} {mono}"
        else:
            body = f"{mag}"
        if idx == 0:
            out.append(("-" if coef < 0 else "") + body)
        else:
            out.append(("- " if coef < 0 else "+ ") + body)
    return " ".join(out)


X = WpPoly([0, 1])
#: 4X^3 - g2 X - g3, the square of wp'
CUBIC = WpPoly([InvariantPoly.monomial(0, 1, -1), InvariantPoly.monomial(1, 0, -1), 0, 4])
#: 6X^2 - g2/2, i.e. wp''
SECOND = WpPoly([InvariantPoly.monomial(1, 0, Fraction(-1, 2)), 0, 6])


@dataclass(frozen=True)
class DerivativeForm:
    """wp^(n) = even_part(wp) + wp' * odd_part(wp)."""

    n: int
    even_part: WpPoly
    odd_part: WpPoly

    def evaluate(self, p, dp, g2, g3):
        return self.even_part.evaluate(p, g2, g3) + dp * self.odd_part.evaluate(p, g2, g3)

    def render(self) -> str:
        if self.odd_part.is_zero():
            return self.even_part.render()
        if self.even_part.is_zero():
            return f"P' * ({self.odd_part.render()})"
        return f"{self.even_part.render()} + P' * ({self.odd_part.render()})"


_FORMS: dict[int, DerivativeForm] = {
    -2: DerivativeForm(-2, WpPoly([1]), WpPoly()),
    0: DerivativeForm(0, X, WpPoly()),
    1: DerivativeForm(1, WpPoly(), WpPoly([1])),
}
_FORMS_LOCK = threading.Lock()


def _differentiate(form: DerivativeForm) -> DerivativeForm:
    even = SECOND * form.odd_part + CUBIC * form.odd_part.derivative()
    odd = form.even_part.derivative()
    return DerivativeForm(form.n + 1, even, odd)


def derivative_form(n: int) -> DerivativeForm:
    """Exact form of wp^(n) for n in {-2, 0, 1, 2, ...}; memoized."""
    if not isinstance(n, int) or n < -2 or n == -1:
        raise DomainError(f"derivative order must be -2 or a non-negative integer, got {n!r}")
    form = _FORMS.get(n)
    if form is not None:
        return form
    with _FORMS_LOCK:
        top = max(_FORMS)
        form = _FORMS[top]
        for m in range(top + 1, n + 1):
            form = _differentiate(form)
            _FORMS[m] = form
    return _FORMS[n]


# -- phi and mu ---------------------------------------------------------------

def _padd(a: list, b: list) -> list:
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def _pscale(a: list, s) -> list:
    return [s * x for x in a]


def _pmul(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


@dataclass(frozen=True)
class MuTable:
    """Coefficients mu(0), ..., mu(ell+1) of phi as a polynomial in wp."""

    ell: int
    mu: tuple

    def __post_init__(self):
        if len(self.mu) != self.ell + 2:
            raise ValueError(f"expected {self.ell + 2} coefficients, got {len(self.mu)}")

    def __getitem__(self, r: int):
        return self.mu[r]

    def evaluate(self, x):
        acc = 0
        for c in reversed(self.mu):
            acc = acc * x + c
        return acc

    def scale(self) -> float:
        return max(abs(complex(m)) for m in self.mu)


def phi_parts(config, lambdas, g2, g3) -> tuple[list, list]:
    """(C_odd, C_even) as numeric coefficient lists in X.

    C_odd multiplies wp' in the odd sum, C_even is the even sum itself, both as
    gamma terms minus lambda terms.
    """
    ks = list(config.k_orders)
    if len(lambdas) != len(ks):
        raise DomainError(f"need {len(ks)} lambdas, got {len(lambdas)}")
    odd: list = []
    even: list = []
    signed = [(n, g) for n, g in config.gamma_terms] + [(k, -lam) for k, lam in zip(ks, lambdas)]
    for order, coef in signed:
        form = derivative_form(order)
        if order >= 0 and order % 2 == 1:
            odd = _padd(odd, _pscale(form.odd_part.numeric_coeffs(g2, g3), coef))
        else:
            even = _padd(even, _pscale(form.even_part.numeric_coeffs(g2, g3), coef))
    return odd, even


def phi_mu(config, lambdas, g2, g3) -> MuTable:
    """mu(0..ell+1) of phi = (4X^3 - g2 X - g3) C_odd^2 - C_even^2.

    Works over any number type: pass Fractions for an exact table, complex
    floats for the production path.
    """
    odd, even = phi_parts(config, lambdas, g2, g3)
    cubic = CUBIC.numeric_coeffs(g2, g3)
    phi = _padd(_pmul(cubic, _pmul(odd, odd)), _pscale(_pmul(even, even), -1))
    ell = config.ell
    while len(phi) > ell + 2 and phi[-1] == 0:
        phi.pop()
    if len(phi) > ell + 2:
        raise AssertionError(f"phi has degree {len(phi) - 1} > ell + 1 = {ell + 1}")
    phi = phi + [0] * (ell + 2 - len(phi))
    return MuTable(ell, tuple(phi))


def elementary_symmetric(values, r: int):
    """S_r(values): sum of all products of r distinct entries; S_0 = 1."""
    values = list(values)
    if not 0 <= r <= len(values):
        raise DomainError(f"r={r} outside 0..{len(values)}")
    return elementary_symmetric_all(values)[r]


def elementary_symmetric_all(values) -> list:
    """[S_0, ..., S_n] via the coefficients of prod (t + x_i)."""
    e: list = [1] + [0] * len(values)
    for i, x in enumerate(values):
        for j in range(i + 1, 0, -1):
            e[j] = e[j] + x * e[j - 1]
    return e
