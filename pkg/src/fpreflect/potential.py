"""Fokker-Planck potentials: catalog, expression parser, profiles, asymptotics.

Expressions use a small grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?          # exponent must not contain x
    atom   := NUMBER | 'x' | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := exp | log | cosh | sinh | tanh | sqrt

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``.  Parsed
expressions become sympy trees, which provide the symbolic derivatives; the
evaluators handed out by a profile are lambdified from those derivatives.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np
import sympy

X = sympy.Symbol("x", real=True)

FUNCTIONS = {
    "exp": sympy.exp,
    "log": sympy.log,
    "cosh": sympy.cosh,
    "sinh": sympy.sinh,
    "tanh": sympy.tanh,
    "sqrt": sympy.sqrt,
}


class PotentialError(ValueError):
    pass


class ExpressionError(PotentialError):
    def __init__(self, message: str, position: int | None = None):
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")
        self.position = position


class DifferentiabilityError(PotentialError):
    pass


class DomainError(PotentialError):
    pass


class ClassificationError(PotentialError):
    pass


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExpressionError(f"unexpected character {text[pos].strip() or text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value:
            raise ExpressionError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def parse(self) -> sympy.Expr:
        if self.peek()[0] == "end":
            raise ExpressionError("empty expression", 0)
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected token {val!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            node = node * rhs if op == "*" else node / rhs
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return -self.unary()
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            pos = self.take()[2]
            exponent = self.unary()
            if exponent.has(X):
                raise ExpressionError("unsupported construct: variable exponent in '^'", pos)
            return base**exponent
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return sympy.Rational(val) if re.fullmatch(r"\d+", val) else sympy.Float(val, 17)
        if kind == "name":
            if val == "x":
                return X
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return FUNCTIONS[val](arg)
            raise ExpressionError(f"unknown name {val!r}", pos)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExpressionError(f"unexpected token {val or 'end of input'!r}", pos)


def parse_expression(text: str) -> sympy.Expr:
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Asymptotic classification
# ---------------------------------------------------------------------------

V_LIMITS = ("plus_infinity", "minus_infinity", "finite")
F_LIMITS = ("plus_infinity", "minus_infinity", "nonzero", "zero")
DIVERGENT_TAGS = ("exponential_or_faster", "superlinear", "linear", "sublinear_superlog", "logarithmic_or_slower")
CONVERGENT_TAGS = ("exponential_decay", "superpolynomial_decay", "power_decay_or_slower")


@dataclass(frozen=True)
class AsymptoticClass:
    """Behaviour of V and f = -V'/2 as x -> -inf."""

    v_limit: str
    f_limit: str
    growth_tag: str
    v0: float | None = None
    c: float | None = None

    def __post_init__(self):
        if self.v_limit not in V_LIMITS or self.f_limit not in F_LIMITS:
            raise ValueError(f"bad limits {self.v_limit!r}/{self.f_limit!r}")
        if self.v_limit == "finite":
            if self.v0 is None or self.f_limit != "zero":
                raise ValueError("finite V(-inf) needs V0 and f(-inf) = 0")
            if self.growth_tag not in CONVERGENT_TAGS:
                raise ValueError(f"tag {self.growth_tag!r} is not a convergence tag")
        else:
            if self.growth_tag not in DIVERGENT_TAGS:
                raise ValueError(f"tag {self.growth_tag!r} is not a divergence tag")
        if self.f_limit in ("plus_infinity", "minus_infinity") and self.growth_tag not in (
            "exponential_or_faster",
            "superlinear",
        ):
            raise ValueError("divergent f requires a superlinear growth tag")
        if self.f_limit == "nonzero" and self.c is None:
            raise ValueError("nonzero f(-inf) needs c")

    @property
    def f_finite(self) -> bool:
        return self.f_limit in ("zero", "nonzero")

    @property
    def f_at_minus_inf(self) -> float:
        return {"zero": 0.0, "nonzero": self.c, "plus_infinity": math.inf, "minus_infinity": -math.inf}[self.f_limit]

    def describe(self) -> str:
        v = f"finite({self.v0:g})" if self.v_limit == "finite" else self.v_limit
        f = f"nonzero({self.c:g})" if self.f_limit == "nonzero" else self.f_limit
        return f"V -> {v}, f -> {f}, {self.growth_tag}"


def _monotone(values) -> bool:
    d = [b - a for a, b in zip(values, values[1:])]
    return all(v >= 0 for v in d) or all(v <= 0 for v in d)


def _log_ratio_trend(mags) -> float:
    """Median of log m_{j+1} / log m_j over the tail, for magnitudes far from 1."""
    logs = [float(mpmath.log(m)) for m in mags if m > 0]
    logs = [v for v in logs if abs(v) > 1.0]
    if len(logs) < 3:
        return math.inf
    ratios = sorted(b / a for a, b in zip(logs[-5:], logs[-4:]))
    return ratios[len(ratios) // 2]


def classify_samples(V: Callable, f: Callable) -> AsymptoticClass:
    """Classify by sampling V and f at x = -2^j, j = 3..20 in multiprecision."""
    xs = [-mpmath.mpf(2) ** j for j in range(3, 21)]
    with mpmath.workdps(30):
        try:
            v = [mpmath.mpf(V(x)) for x in xs]
            fv = [mpmath.mpf(f(x)) for x in xs]
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ClassificationError(f"potential undefined along the sampling sequence: {exc}") from None
        if not _monotone(v[-8:]) or not _monotone(fv[-8:]):
            raise ClassificationError("oscillatory or non-monotone behaviour at -inf; cannot classify")
        mags = [abs(a) for a in fv]
        growing = all(b > 1.5 * a for a, b in zip(mags[-6:], mags[-5:]))
        if growing and mags[-1] > 1e3:
            trend = _log_ratio_trend(mags)
            tag = "exponential_or_faster" if trend >= 1.6 else "superlinear"
            up = fv[-1] > 0
            return AsymptoticClass(
                "plus_infinity" if up else "minus_infinity",
                "plus_infinity" if up else "minus_infinity",
                tag,
            )
        last, prev = fv[-1], fv[-2]
        if abs(last) > 1e-3:
            if abs(last - prev) > 1e-4 * abs(last):
                raise ClassificationError("f does not settle along the sampling sequence")
            c = float(last)
            return AsymptoticClass("plus_infinity" if c > 0 else "minus_infinity", "nonzero", "linear", c=round(c, 6))
        # f -> 0: V converges (decay tags) or diverges sublinearly
        d = [abs(b - a) for a, b in zip(v, v[1:])]
        if d[-1] < 1e-8 * max(1, abs(v[-1])) or d[-1] < 0.6 * d[-2]:
            trend = _log_ratio_trend(d)
            if trend >= 1.6:
                tag = "exponential_decay"
            elif trend >= 1.12:
                tag = "superpolynomial_decay"
            else:
                tag = "power_decay_or_slower"
            return AsymptoticClass("finite", "zero", tag, v0=round(float(v[-1]), 6))
        v_limit = "plus_infinity" if v[-1] > v[-2] else "minus_infinity"
        tag = "sublinear_superlog" if d[-1] / d[-2] > 1.05 else "logarithmic_or_slower"
        return AsymptoticClass(v_limit, "zero", tag)


# ---------------------------------------------------------------------------
# Specs and the catalog
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PotentialSpec:
    """A potential V(x) on (-inf, domain_max), possibly piecewise.

    ``pieces`` holds (expression, right breakpoint) pairs ordered left to
    right; the last breakpoint is ``domain_max``.
    """

    source: str
    pieces: tuple[tuple[sympy.Expr, float], ...]
    domain_max: float = math.inf
    example: int | None = None
    classification: AsymptoticClass | None = None
    params: tuple[tuple[str, float], ...] = ()

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(b for _, b in self.pieces[:-1])

    @property
    def expr(self) -> sympy.Expr:
        if len(self.pieces) != 1:
            raise PotentialError("piecewise potential has no single expression")
        return self.pieces[0][0]

    def param(self, name: str) -> float:
        return dict(self.params)[name]

    def mirrored(self) -> PotentialSpec:
        """V(-x); only for potentials defined on the whole line."""
        if self.domain_max != math.inf or len(self.pieces) != 1:
            raise DomainError("mirror construction needs a smooth potential on the whole line")
        return PotentialSpec(f"mirror({self.source})", ((self.expr.subs(X, -X), math.inf),))


def parse_potential(text: str, domain_max: float = math.inf) -> PotentialSpec:
    expr = parse_expression(text)
    return PotentialSpec(text, ((expr, domain_max),), domain_max)


CATALOG_NAMES = ("linear", "parabolic", "exp-growth", "exp-decay", "logcosh", "sqrt-growth", "log-growth", "kink")

_CATALOG = {
    "linear": (1, "-2*x", math.inf, AsymptoticClass("plus_infinity", "nonzero", "linear", c=1.0)),
    "parabolic": (2, "x^2", math.inf, AsymptoticClass("plus_infinity", "plus_infinity", "superlinear")),
    "exp-growth": (3, "exp(-x)", math.inf, AsymptoticClass("plus_infinity", "plus_infinity", "exponential_or_faster")),
    "exp-decay": (4, "exp(x)", math.inf, AsymptoticClass("finite", "zero", "exponential_decay", v0=0.0)),
    "logcosh": (5, "2*log(cosh(x))", math.inf, AsymptoticClass("plus_infinity", "nonzero", "linear", c=1.0)),
    "sqrt-growth": (6, "sqrt(-x)", 0.0, AsymptoticClass("plus_infinity", "zero", "sublinear_superlog")),
}


def catalog(name: str) -> PotentialSpec:
    """Look up a catalog potential; ``log-growth:<alpha>`` takes alpha > 0."""
    base, _, arg = name.partition(":")
    if base in _CATALOG and not arg:
        ex, text, xmax, cls = _CATALOG[base]
        return PotentialSpec(base, ((parse_expression(text), xmax),), xmax, ex, cls)
    if base == "log-growth":
        try:
            alpha = float(arg) if arg else 0.5
        except ValueError:
            raise PotentialError(f"bad alpha in {name!r}") from None
        if alpha == 0:
            raise PotentialError("log-growth needs alpha != 0")
        expr = sympy.nsimplify(alpha) * sympy.log(-X)
        v_lim = "plus_infinity" if alpha > 0 else "minus_infinity"
        cls = AsymptoticClass(v_lim, "zero", "logarithmic_or_slower")
        return PotentialSpec(f"log-growth:{alpha:g}", ((expr, 0.0),), 0.0, 7, cls, (("alpha", alpha),))
    if base == "kink" and not arg:
        pieces = ((sympy.exp(-X), 0.0), (1 - X, math.inf))
        cls = AsymptoticClass("plus_infinity", "plus_infinity", "exponential_or_faster")
        return PotentialSpec("kink", pieces, math.inf, 8, cls)
    raise PotentialError(f"unknown catalog potential {name!r}; choose from {', '.join(CATALOG_NAMES)}")


def example_spec(example: int, alpha: float = 0.5) -> PotentialSpec:
    names = {1: "linear", 2: "parabolic", 3: "exp-growth", 4: "exp-decay", 5: "logcosh", 6: "sqrt-growth", 8: "kink"}
    if example == 7:
        return catalog(f"log-growth:{alpha}")
    return catalog(names[example])


def resolve(source: str, domain_max: float = math.inf) -> PotentialSpec:
    """Catalog name or expression text."""
    if source.partition(":")[0] in CATALOG_NAMES:
        return catalog(source)
    return parse_potential(source, domain_max)


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------


def _lambdify(expr: sympy.Expr):
    scalar = sympy.lambdify(X, expr, modules="math")
    vector = sympy.lambdify(X, expr, modules="numpy")
    if not expr.has(X):
        const = float(expr)
        return (lambda x: const), (lambda z: np.full(np.shape(z), const))
    return scalar, vector


@dataclass(frozen=True)
class SmoothPiece:
    """One smooth branch of a potential, valid up to `right`."""

    right: float
    V: Callable
    V_vec: Callable
    f: tuple[Callable, ...]
    f_vec: tuple[Callable, ...]


@dataclass(frozen=True)
class PotentialProfile:
    """Evaluators for V, f and f^(n), n <= max_order; immutable."""

    spec: PotentialSpec
    max_order: int
    pieces: tuple[SmoothPiece, ...] = field(repr=False)
    asymptotic_class: AsymptoticClass | None = None

    @property
    def domain_max(self) -> float:
        return self.spec.domain_max

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.spec.breakpoints

    def _piece(self, x: float, side: str | None, order: int) -> SmoothPiece:
        if not x < self.domain_max:
            raise DomainError(f"x = {x} outside the domain x < {self.domain_max}")
        for i, bp in enumerate(self.breakpoints):
            if x == bp:
                if side == "left":
                    return self.pieces[i]
                if side == "right":
                    return self.pieces[i + 1]
                if order >= 1:
                    raise DifferentiabilityError(
                        f"f^({order}) is not defined at the breakpoint x = {bp}; pass side='left' or 'right'"
                    )
                return self.pieces[i]
            if x < bp:
                return self.pieces[i]
        return self.pieces[-1]

    def eval_V(self, x: float, side: str | None = None) -> float:
        return self._piece(x, side, 0).V(x)

    def eval_f(self, x: float, side: str | None = None) -> float:
        return self._piece(x, side, 0).f[0](x)

    def eval_f_deriv(self, x: float, n: int, side: str | None = None) -> float:
        if n < 0:
            raise ValueError("derivative order must be >= 0")
        if n > self.max_order:
            raise DifferentiabilityError(f"profile built for orders <= {self.max_order}, asked for {n}")
        return self._piece(x, side, n).f[n](x)

    def f_derivs(self, x: float, n: int, side: str | None = None) -> list[float]:
        """[f, f', ..., f^(n)] at x."""
        if n > self.max_order:
            raise DifferentiabilityError(f"profile built for orders <= {self.max_order}, asked for {n}")
        p = self._piece(x, side, n)
        return [p.f[i](x) for i in range(n + 1)]

    def segments(self, a: float, b: float) -> list[tuple[float, float, SmoothPiece]]:
        """Split [a, b] at breakpoints; each part carries its smooth piece."""
        out = []
        left = -math.inf
        for p in self.pieces:
            lo, hi = max(a, left), min(b, p.right)
            if lo < hi or (lo == hi == a == b and left <= a <= p.right):
                out.append((lo, hi, p))
            left = p.right
        return out

    def V_array(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        out = np.empty_like(z)
        left = -np.inf
        for p in self.pieces:
            mask = (z > left) & (z <= p.right) if np.isfinite(left) else z <= p.right
            if np.any(mask):
                with np.errstate(over="ignore"):
                    out[mask] = p.V_vec(z[mask])
            left = p.right
        return out

    def f_array(self, z: np.ndarray, n: int = 0) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        out = np.empty_like(z)
        left = -np.inf
        for p in self.pieces:
            mask = (z > left) & (z <= p.right) if np.isfinite(left) else z <= p.right
            if np.any(mask):
                with np.errstate(over="ignore"):
                    out[mask] = p.f_vec[n](z[mask])
            left = p.right
        return out


def build_profile(spec: PotentialSpec, max_order: int = 8) -> PotentialProfile:
    """Differentiate V symbolically and lambdify V, f, ..., f^(max_order)."""
    pieces = []
    for expr, right in spec.pieces:
        f_expr = -sympy.diff(expr, X) / 2
        fs = []
        for _ in range(max_order + 1):
            fs.append(_lambdify(f_expr))
            f_expr = sympy.diff(f_expr, X)
        V, V_vec = _lambdify(expr)
        pieces.append(SmoothPiece(right, V, V_vec, tuple(s for s, _ in fs), tuple(v for _, v in fs)))
    cls = spec.classification
    if cls is None:
        try:
            cls = classify_asymptotics(spec)
        except ClassificationError:
            cls = None
    return PotentialProfile(spec, max_order, tuple(pieces), cls)


def schrodinger_potential(profile: PotentialProfile, x: float, side: str | None = None) -> float:
    """V_S = f' + f^2."""
    f, fp = profile.f_derivs(x, 1, side=side)
    return fp + f * f


def classify_asymptotics(spec: PotentialSpec, sample: bool = False) -> AsymptoticClass:
    """Stored classification for catalog entries, else sampling at x = -2^j."""
    if spec.classification is not None and not sample:
        return spec.classification
    expr = spec.pieces[0][0]
    if not expr.has(X):
        return AsymptoticClass("finite", "zero", "exponential_decay", v0=float(expr))
    f_expr = -sympy.diff(expr, X) / 2
    V = sympy.lambdify(X, expr, modules="mpmath")
    f = sympy.lambdify(X, f_expr, modules="mpmath")
    return classify_samples(V, f)


def mirror_profile(profile: PotentialProfile) -> PotentialProfile:
    return build_profile(profile.spec.mirrored(), profile.max_order)
