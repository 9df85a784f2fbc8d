"""Exact algebra of differential polynomials in the drift f and its derivatives.

A monomial ``c * f^a0 * f'^a1 * f''^a2 ...`` is keyed by its exponent tuple
``(a0, a1, a2, ...)`` with trailing zeros stripped; coefficients are
``fractions.Fraction``.  ``XiPolynomial`` adds a polynomial grading in the
auxiliary variable xi.  The high-energy coefficients are generated by the
operator M, whose action on the xi-coefficients a_j is

    (M g)_j = f a_{j+1} - f a_{j-1} + a_j' / (j + 1),   a_{-1} = 0.
"""

from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

Key = tuple[int, ...]


def _strip(key: Iterable[int]) -> Key:
    key = list(key)
    while key and key[-1] == 0:
        key.pop()
    return tuple(key)


def _key_mul(a: Key, b: Key) -> Key:
    n = max(len(a), len(b))
    return _strip(
        (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)
    )


def _sort_key(key: Key):
    # highest derivative order first, then exponent vector from the top order down
    return (len(key), tuple(reversed(key)))


def _factor_str(order: int, power: int) -> str:
    if order <= 3:
        name = "f" + "'" * order
    else:
        name = f"f^({order})"
    if power == 1:
        return name
    if order >= 4:
        return f"({name})^{power}"
    return f"{name}^{power}"


class DiffPolynomial:
    """Polynomial in f, f', f'', ... with exact rational coefficients."""

    __slots__ = ("_terms", "_compiled")

    def __init__(self, terms: Mapping[Key, Fraction | int] | None = None):
        clean: dict[Key, Fraction] = {}
        for key, c in (terms or {}).items():
            c = Fraction(c)
            if c != 0:
                k = _strip(key)
                clean[k] = clean.get(k, Fraction(0)) + c
                if clean[k] == 0:
                    del clean[k]
        self._terms = dict(sorted(clean.items(), key=lambda kv: _sort_key(kv[0]), reverse=True))
        self._compiled = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, c) -> DiffPolynomial:
        return cls({(): c})

    @classmethod
    def deriv(cls, order: int, power: int = 1, coeff=1) -> DiffPolynomial:
        """The monomial coeff * (f^(order))^power."""
        key = [0] * (order + 1)
        key[order] = power
        return cls({tuple(key): coeff})

    @classmethod
    def parse_terms(cls, terms: Iterable[tuple[Fraction | int, Mapping[int, int]]]) -> DiffPolynomial:
        out: dict[Key, Fraction] = {}
        for coeff, exps in terms:
            n = max(exps, default=-1) + 1
            key = _strip(exps.get(i, 0) for i in range(n))
            out[key] = out.get(key, Fraction(0)) + Fraction(coeff)
        return cls(out)

    # -- structure --------------------------------------------------------
    @property
    def terms(self) -> dict[Key, Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def max_order(self) -> int:
        """Highest derivative order present (-1 for constants / zero)."""
        return max((len(k) - 1 for k in self._terms), default=-1)

    def weights(self) -> set[int]:
        return {sum(p * (d + 1) for d, p in enumerate(k)) for k in self._terms}

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = DiffPolynomial.constant(other)
        if not isinstance(other, DiffPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other: DiffPolynomial) -> DiffPolynomial:
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, Fraction(0)) + c
        return DiffPolynomial(out)

    def __neg__(self) -> DiffPolynomial:
        return DiffPolynomial({k: -c for k, c in self._terms.items()})

    def __sub__(self, other: DiffPolynomial) -> DiffPolynomial:
        return self + (-other)

    def __mul__(self, other) -> DiffPolynomial:
        if isinstance(other, (int, Fraction)):
            return DiffPolynomial({k: c * other for k, c in self._terms.items()})
        out: dict[Key, Fraction] = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                k = _key_mul(k1, k2)
                out[k] = out.get(k, Fraction(0)) + c1 * c2
        return DiffPolynomial(out)

    __rmul__ = __mul__

    def derivative(self) -> DiffPolynomial:
        """Formal x-derivative: Leibniz rule with f^(d) -> f^(d+1)."""
        out: dict[Key, Fraction] = {}
        for key, c in self._terms.items():
            for d, p in enumerate(key):
                if p == 0:
                    continue
                new = list(key) + [0]
                new[d] -= 1
                new[d + 1] += 1
                k = _strip(new)
                out[k] = out.get(k, Fraction(0)) + c * p
        return DiffPolynomial(out)

    # -- numerics ---------------------------------------------------------
    def evaluate(self, derivs: Sequence[complex]):
        """Substitute f^(d) = derivs[d]."""
        if self._compiled is None:
            self._compiled = [
                (float(c), [(d, p) for d, p in enumerate(k) if p]) for k, c in self._terms.items()
            ]
        need = self.max_order()
        if need >= len(derivs):
            raise MissingDerivativeError(need)
        total = 0.0
        for c, factors in self._compiled:
            v = c
            for d, p in factors:
                v *= derivs[d] ** p
            total += v
        return total

    # -- rendering --------------------------------------------------------
    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for i, (key, c) in enumerate(self._terms.items()):
            factors = [_factor_str(d, p) for d, p in enumerate(key) if p]
            mag = abs(c)
            body = "*".join(factors)
            if not factors:
                text = str(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{mag}*{body}"
            sign = "-" if c < 0 else "+"
            if i == 0:
                parts.append(("-" if c < 0 else "") + text)
            else:
                parts.append(f" {sign} {text}")
        return "".join(parts)

    def __repr__(self) -> str:
        return f"DiffPolynomial({self})"

    def to_json(self) -> list[dict]:
        return [
            {
                "coefficient": [c.numerator, c.denominator],
                "exponents": {str(d): p for d, p in enumerate(k) if p},
            }
            for k, c in self._terms.items()
        ]

    @classmethod
    def from_json(cls, data: list[dict]) -> DiffPolynomial:
        return cls.parse_terms(
            (Fraction(t["coefficient"][0], t["coefficient"][1]), {int(d): p for d, p in t["exponents"].items()})
            for t in data
        )


class MissingDerivativeError(ValueError):
    def __init__(self, order: int):
        super().__init__(f"evaluation needs f^({order}); supply derivatives up to order {order}")
        self.order = order


ZERO = DiffPolynomial()
F = DiffPolynomial.deriv(0)


class XiPolynomial:
    """sum_j a_j xi^j with DiffPolynomial coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[DiffPolynomial]):
        coeffs = list(coeffs)
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        self.coeffs: tuple[DiffPolynomial, ...] = tuple(coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, j: int) -> DiffPolynomial:
        return self.coeffs[j] if 0 <= j < len(self.coeffs) else ZERO

    def at_zero(self) -> DiffPolynomial:
        return self.coeff(0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, XiPolynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __neg__(self) -> XiPolynomial:
        return XiPolynomial([-a for a in self.coeffs])

    def __add__(self, other: XiPolynomial) -> XiPolynomial:
        n = max(len(self.coeffs), len(other.coeffs))
        return XiPolynomial([self.coeff(j) + other.coeff(j) for j in range(n)])

    def __sub__(self, other: XiPolynomial) -> XiPolynomial:
        return self + (-other)

    def times_one_minus_xi2(self) -> XiPolynomial:
        n = len(self.coeffs) + 2
        return XiPolynomial([self.coeff(j) - self.coeff(j - 2) for j in range(n)])

    def max_order(self) -> int:
        return max((a.max_order() for a in self.coeffs), default=-1)

    def evaluate(self, derivs: Sequence[complex], xi: complex = 0.0):
        total = 0.0
        for a in reversed(self.coeffs):
            total = total * xi + a.evaluate(derivs)
        return total

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for j, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            s = str(a)
            if j == 0:
                parts.append(s)
                continue
            tail = "xi" if j == 1 else f"xi^{j}"
            parts.append(f"({s})*{tail}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"XiPolynomial({self})"

    def to_json(self) -> list[list[dict]]:
        return [a.to_json() for a in self.coeffs]


def apply_M(g: XiPolynomial) -> XiPolynomial:
    """Apply the coefficient-generating operator M."""
    n = len(g.coeffs) + 1
    out = []
    for j in range(n):
        term = F * g.coeff(j + 1) - F * g.coeff(j - 1)
        aj = g.coeff(j)
        if not aj.is_zero():
            term = term + aj.derivative() * Fraction(1, j + 1)
        out.append(term)
    return XiPolynomial(out)


@lru_cache(maxsize=None)
def _ctilde(n: int) -> XiPolynomial:
    if n < 1:
        raise ValueError("c~_n is defined for n >= 1")
    if n == 1:
        return XiPolynomial([-F])
    # c~_n = -M^{n-1} f = M c~_{n-1} by linearity
    return apply_M(_ctilde(n - 1))


def ctilde(n: int) -> XiPolynomial:
    """c~_n = -M^{n-1} f."""
    return _ctilde(n)


def cbar(n: int) -> XiPolynomial:
    """Generalized coefficient: cbar_0 = -xi, cbar_n = (1 - xi^2) c~_n."""
    if n == 0:
        return XiPolynomial([ZERO, DiffPolynomial.constant(-1)])
    return ctilde(n).times_one_minus_xi2()


def high_coeffs(n_max: int) -> list[tuple[XiPolynomial, DiffPolynomial]]:
    """[(c~_n, c_n) for n = 1..n_max], with c_n = c~_n at xi = 0."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return [(ctilde(n), ctilde(n).at_zero()) for n in range(1, n_max + 1)]


def remainder_kernel(N: int) -> tuple[XiPolynomial, list[DiffPolynomial]]:
    """K_N = -(1 + xi d/dxi) c~_{N+1} and its xi-coefficients h_{N,0..N}."""
    if N < 0:
        raise ValueError("N must be >= 0")
    c = ctilde(N + 1)
    K = XiPolynomial([a * (-(j + 1)) for j, a in enumerate(c.coeffs)])
    return K, [K.coeff(m) for m in range(N + 1)]


def evaluate(poly, profile, x: float, xi: complex | None = None, side: str | None = None):
    """Evaluate a Diff- or XiPolynomial on a potential profile at x."""
    order = max(poly.max_order(), 0)
    derivs = profile.f_derivs(x, order, side=side)
    if isinstance(poly, XiPolynomial):
        return poly.evaluate(derivs, 0.0 if xi is None else xi)
    return poly.evaluate(derivs)


def dumps(polys: Mapping[str, DiffPolynomial | XiPolynomial]) -> str:
    return json.dumps({name: p.to_json() for name, p in polys.items()}, indent=2)
