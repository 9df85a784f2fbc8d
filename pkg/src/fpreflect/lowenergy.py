"""Low-energy expansion: nested bracket integrals and the coefficients r_n.

A bracket ``[s_1, ..., s_n]_a^b`` is the ordered integral over
a <= z_1 <= ... <= z_n <= b of exp(sum_j s_j V(z_j)).  The ``pm`` variant
replaces the innermost factor by 2 sinh(V0 - V(z_1)).

Evaluation runs outward from the left end: G_1(z) = int_a^z w_1 and
G_j(z) = int_a^z e^{s_j V} G_{j-1}, so the value is G_n(b).  All sign words
in a family share one panel grid and their common prefixes.  On each panel G_j
is stored relative to exp(T_j V_ref) with T_j the running sign sum, which keeps
every stored number of moderate size even where e^{V} itself would overflow.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.polynomial import legendre

from .potential import AsymptoticClass, PotentialProfile

_ORDER = 16
_NODES, _WEIGHTS = legendre.leggauss(_ORDER)


class LowEnergyError(ValueError):
    pass


class BracketDivergenceError(LowEnergyError):
    pass


class LowEnergyValidityError(LowEnergyError):
    pass


def _cumulative_matrix() -> np.ndarray:
    """Rows map node values on [-1, 1] to int_{-1}^{t_i}, last row to int_{-1}^{1}."""
    vander_inv = np.linalg.inv(legendre.legvander(_NODES, _ORDER - 1))
    targets = np.append(_NODES, 1.0)
    out = np.empty((_ORDER + 1, _ORDER))
    for k in range(_ORDER):
        unit = np.zeros(_ORDER)
        unit[k] = 1.0
        out[:, k] = legendre.legval(targets, legendre.legint(unit, lbnd=-1))
    return out @ vander_inv


_CUMULATIVE = _cumulative_matrix()


# ---------------------------------------------------------------------------
# Signatures and values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BracketSignature:
    """Sign word of a bracket.

    In ``pm`` mode the leading slot is the sinh-weighted variable and is
    stored as 0; the remaining entries are +-1.
    """

    signs: tuple[int, ...]
    leading_mode: str = "plain"

    def __post_init__(self):
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
        if not self.signs:
            raise ValueError("a bracket needs at least one sign")
        if self.leading_mode not in ("plain", "pm"):
            raise ValueError(f"unknown leading mode {self.leading_mode!r}")
        head, tail = self.signs[0], self.signs[1:]
        if any(s not in (-1, 1) for s in tail):
            raise ValueError("signs must be +1 or -1")
        if self.leading_mode == "pm" and head != 0:
            raise ValueError("pm signatures store their leading slot as 0")
        if self.leading_mode == "plain" and head not in (-1, 1):
            raise ValueError("signs must be +1 or -1")

    @classmethod
    def parse(cls, text: str) -> BracketSignature:
        text = text.strip()
        if text.startswith(("±", "pm")):
            rest = text[1:] if text.startswith("±") else text[2:]
            return cls((0,) + tuple(_sign(c) for c in rest), "pm")
        return cls(tuple(_sign(c) for c in text))

    def __len__(self) -> int:
        return len(self.signs)

    def __str__(self) -> str:
        head = "±" if self.leading_mode == "pm" else ""
        body = self.signs[1:] if self.leading_mode == "pm" else self.signs
        return head + "".join("+" if s > 0 else "-" for s in body)


def _sign(c: str) -> int:
    if c == "+":
        return 1
    if c == "-":
        return -1
    raise ValueError(f"bad sign character {c!r}")


@dataclass(frozen=True)
class BracketValue:
    value: float
    tail_bound: float
    z_min: float


# ---------------------------------------------------------------------------
# Panel grid and family evaluation
# ---------------------------------------------------------------------------


@dataclass
class _Grid:
    left: np.ndarray
    right: np.ndarray
    z: np.ndarray  # (panels, nodes)
    V: np.ndarray
    V_ref: np.ndarray  # V at each panel's left end


def _build_grid(profile: PotentialProfile, a: float, b: float, dv: float, scale: float) -> _Grid:
    cuts = sorted({a, b, *[p for p in profile.breakpoints if a < p < b]})
    stack = [(lo, hi) for lo, hi in zip(cuts[:-1], cuts[1:])][::-1]
    accepted = []
    while stack:
        lo, hi = stack.pop()
        limit = max(0.5 * scale, 0.25 * (b - hi))
        ok = hi - lo <= limit
        if ok:
            pts = np.concatenate(([lo, hi], lo + (hi - lo) * (_NODES + 1) / 2))
            with np.errstate(all="ignore"):
                v = profile.V_array(pts)
            spread = np.ptp(v) if np.all(np.isfinite(v)) else math.inf
            ok = spread <= dv or hi - lo < 1e-9
        if ok:
            accepted.append((lo, hi))
        else:
            mid = 0.5 * (lo + hi)
            stack.append((mid, hi))
            stack.append((lo, mid))
    left = np.array([p[0] for p in accepted])
    right = np.array([p[1] for p in accepted])
    z = left[:, None] + (right - left)[:, None] * (_NODES[None, :] + 1) / 2
    with np.errstate(all="ignore"):
        V = profile.V_array(z)
        # interior point just right of the panel start keeps one-sided pieces apart
        V_ref = profile.V_array(left + 1e-12 * np.maximum(1.0, np.abs(left)))
    return _Grid(left, right, z, V, V_ref)


def _layer(grid: _Grid, factor: np.ndarray, prev: np.ndarray, t_new: int) -> tuple[np.ndarray, float]:
    """One outward integration layer in scaled form; returns (node values, end value)."""
    half = 0.5 * (grid.right - grid.left)
    local = half[:, None] * ((factor * prev) @ _CUMULATIVE.T)
    out = np.empty_like(prev)
    carry = 0.0
    n = len(half)
    for p in range(n):
        out[p] = carry + local[p, :-1]
        end = carry + local[p, -1]
        if p + 1 < n:
            carry = end * math.exp(t_new * (grid.V_ref[p] - grid.V_ref[p + 1]))
    return out, end


def _family_values(
    grid: _Grid, words: Iterable[BracketSignature], V0: float | None
) -> dict[BracketSignature, float]:
    cache: dict[tuple, tuple[np.ndarray, float, int]] = {}
    ones = np.ones_like(grid.z)
    results = {}
    last_ref = grid.V_ref[-1]
    for sig in words:
        prefix: tuple = ()
        g, end, total = ones, 1.0, 0
        for depth, s in enumerate(sig.signs):
            key = (sig.leading_mode,) + sig.signs[: depth + 1]
            if key in cache:
                g, end, total = cache[key]
                continue
            if depth == 0 and sig.leading_mode == "pm":
                factor = 2.0 * np.sinh(V0 - grid.V)
                t_new = 0
            else:
                with np.errstate(over="ignore"):
                    factor = np.exp(s * (grid.V - grid.V_ref[:, None]))
                t_new = total + s
            g, end = _layer(grid, factor, g, t_new)
            total = t_new
            cache[key] = (g, end, total)
        with np.errstate(over="ignore"):
            results[sig] = end * math.exp(total * last_ref) if end != 0 else 0.0
    return results


def _leading_weight(sig: BracketSignature, profile: PotentialProfile, z: float, V0: float | None) -> float:
    v = profile.eval_V(z)
    if sig.leading_mode == "pm":
        return abs(2.0 * math.sinh(V0 - v))
    try:
        return math.exp(sig.signs[0] * v)
    except OverflowError:
        return math.inf


def _require_v0(words, profile: PotentialProfile) -> float | None:
    if not any(w.leading_mode == "pm" for w in words):
        return None
    cls = profile.asymptotic_class
    if cls is None or cls.v_limit != "finite":
        raise LowEnergyError("pm brackets need a potential with finite V(-inf)")
    return cls.v0


def bracket_family(
    words: Sequence[BracketSignature],
    a: float,
    b: float,
    profile: PotentialProfile,
    tol: float = 1e-10,
    max_distance: float = 2.0**30,
) -> dict[BracketSignature, BracketValue]:
    """Evaluate several brackets on one shared grid (see ``bracket``)."""
    words = list(dict.fromkeys(words))
    if not words:
        return {}
    if b > profile.domain_max:
        raise LowEnergyError(f"upper limit {b} beyond the domain x < {profile.domain_max}")
    V0 = _require_v0(words, profile)

    def evaluate(lo, dv=0.5, scale=1.0):
        if lo >= b:
            return {w: 0.0 for w in words}
        return _family_values(_build_grid(profile, lo, b, dv, scale), words, V0)

    def refine_gap(lo, base):
        fine = evaluate(lo, dv=0.25, scale=0.5)
        return max(abs(fine[w] - base[w]) for w in words)

    if math.isfinite(a):
        if a > b:
            raise LowEnergyError("lower limit above upper limit")
        vals = evaluate(a)
        gap = refine_gap(a, vals)
        return {w: BracketValue(float(vals[w]), float(gap), float(a)) for w in words}

    dist = 1.0
    while dist < max_distance:
        z = b - dist
        w = max(_leading_weight(sig, profile, z, V0) for sig in words)
        if math.isfinite(w) and w * dist < tol / 10:
            break
        dist *= 2
    vals = evaluate(b - dist)
    changes: list[float] = []
    while True:
        if dist * 2 > max_distance:
            raise LowEnergyError(
                f"truncation did not reach tolerance {tol:g} within distance {max_distance:g} "
                f"for {', '.join(map(str, words))}"
            )
        nxt = evaluate(b - 2 * dist)
        change = max(abs(nxt[sig] - vals[sig]) for sig in words)
        if not math.isfinite(change):
            raise BracketDivergenceError(f"bracket {', '.join(map(str, words))} diverges at -inf")
        dist *= 2
        vals = nxt
        if change < tol:
            break
        changes.append(change)
        if len(changes) >= 4 and all(c2 >= 0.9 * c1 for c1, c2 in zip(changes[-4:], changes[-3:])):
            bad = [str(sig) for sig in words]
            raise BracketDivergenceError(
                f"bracket {', '.join(bad)} diverges at -inf (tail estimate not decreasing)"
            )
    gap = refine_gap(b - dist, vals)
    bound = max(change, gap)
    return {sig: BracketValue(float(vals[sig]), float(bound), float(b - dist)) for sig in words}


def bracket(
    sig: BracketSignature | str, a: float, b: float, profile: PotentialProfile, tol: float = 1e-10
) -> BracketValue:
    """Nested bracket integral over [a, b]; a may be -inf."""
    if isinstance(sig, str):
        sig = BracketSignature.parse(sig)
    return bracket_family([sig], a, b, profile, tol)[sig]


# ---------------------------------------------------------------------------
# Coefficient constants
# ---------------------------------------------------------------------------


def c_pm_constant(signs: Sequence[int], branch: str) -> tuple[int, int]:
    """Constant c± and the exponent of e^W in C±_{s_1..s_{n-1}}(W)."""
    if branch not in ("plus", "minus"):
        raise ValueError("branch must be 'plus' or 'minus'")
    sigma = 1 if branch == "plus" else -1
    const = 2 * sigma
    running = 0
    for s in signs:
        running += s
        const *= -sigma * s * (1 - sigma * running)
        if const == 0:
            break
    return const, sigma - sum(signs)


@lru_cache(maxsize=None)
def d_representation(signs: tuple[int, ...]) -> tuple[int, tuple[tuple[int, Fraction], ...], int]:
    """D_{s}(W) = e^{a V0} P(t) / (1 + t^2)^p with t = e^{(W - V0)/2}.

    Returns (a, P as (power, coefficient) pairs, p).  Each J± multiplies by
    e^{±W} = e^{±V0} t^{±2} and acts as 1 ± d/dW with d/dW = (t/2) d/dt.
    """
    a = 0
    poly = {2: Fraction(2)}  # (1/2) sech^2(u/2) = 2 t^2 / (1 + t^2)^2
    p = 2
    for s in signs:
        sigma = -s  # J_{-s}
        new: dict[int, Fraction] = {}

        def add(e, c):
            new[e] = new.get(e, Fraction(0)) + c

        for e, c in poly.items():
            # P (1 + t^2)
            add(e, c)
            add(e + 2, c)
            # ± [(t/2) P' (1 + t^2) - p t^2 P]
            dc = Fraction(e, 2) * c
            add(e, sigma * dc)
            add(e + 2, sigma * dc)
            add(e + 2, -sigma * p * c)
        p += 1
        a += sigma
        poly = {e + 2 * sigma: c for e, c in new.items() if c != 0}
    return a, tuple(sorted(poly.items())), p


def d_coefficient(signs: Sequence[int], W: float, V0: float) -> float:
    """D_{s_1..s_{n-1}}(W) = (1/2) J_{-s_{n-1}} ... J_{-s_1} sech^2[(W - V0)/2]."""
    a, poly, p = d_representation(tuple(signs))
    u = W - V0
    log_den = p * float(np.logaddexp(0.0, u))
    return sum(float(c) * math.exp(a * V0 + e * u / 2 - log_den) for e, c in poly)


# ---------------------------------------------------------------------------
# Coefficients r_n
# ---------------------------------------------------------------------------


def low_energy_valid(cls: AsymptoticClass | None) -> bool:
    """Finiteness of every r_n: V diverges faster than log, or converges faster than any power."""
    if cls is None:
        return False
    if cls.v_limit == "finite":
        return cls.growth_tag in ("exponential_decay", "superpolynomial_decay")
    return cls.growth_tag != "logarithmic_or_slower"


@dataclass(frozen=True)
class LowCoeffs:
    order: int
    rbar: Callable[[float], float] = field(repr=False)
    r_at_x: float
    brackets: dict = field(default_factory=dict, repr=False)


def _words(n: int):
    return itertools.product((-1, 1), repeat=n - 1)


def _terms(n: int, cls: AsymptoticClass):
    """(sign word s_1..s_{n-1}, bracket signature, coefficient function of W)."""
    out = []
    for word in _words(n):
        if cls.v_limit == "finite":
            sig = BracketSignature((0,) + word, "pm")
            out.append((word, sig, lambda W, w=word, v0=cls.v0: d_coefficient(w, W, v0)))
            continue
        branch = "plus" if cls.v_limit == "plus_infinity" else "minus"
        const, expo = c_pm_constant(word, branch)
        if const == 0:
            continue
        lead = -1 if branch == "plus" else 1
        sig = BracketSignature((lead,) + word)
        out.append((word, sig, lambda W, c=const, m=expo: c * math.exp(m * W)))
    return out


def describe_terms(n: int, cls: AsymptoticClass) -> str:
    """r_n as a sum of bracket integrals with W-dependent factors, W = V(x) for plain r_n."""
    if n == 0:
        if cls.v_limit == "finite":
            return "-tanh((W - V0)/2)"
        return "1" if cls.v_limit == "plus_infinity" else "-1"
    parts = []
    for word, sig, _ in _terms(n, cls):
        if cls.v_limit == "finite":
            label = "".join("+" if s > 0 else "-" for s in word)
            parts.append(f"D[{label}](W)*({sig}]")
            continue
        const, expo = c_pm_constant(word, "plus" if cls.v_limit == "plus_infinity" else "minus")
        factor = "" if expo == 0 else f"*exp({expo}*W)" if expo != 1 else "*exp(W)"
        parts.append(f"{const}{factor}*[{sig}]")
    return " + ".join(parts).replace("+ -", "- ") or "0"


def low_coeffs(n_max: int, x: float, profile: PotentialProfile, tol: float = 1e-10) -> list[LowCoeffs]:
    """r_0 .. r_{n_max} at x, sharing one bracket grid."""
    cls = profile.asymptotic_class
    if not low_energy_valid(cls):
        what = cls.describe() if cls else "unclassified potential"
        raise LowEnergyValidityError(
            f"low-energy coefficients diverge: V must tend to +-inf faster than log|x| "
            f"or converge faster than any power ({what})"
        )
    Vx = profile.eval_V(x)
    if cls.v_limit == "finite":
        r0 = lambda W, v0=cls.v0: -math.tanh((W - v0) / 2)
    else:
        sign = 1.0 if cls.v_limit == "plus_infinity" else -1.0
        r0 = lambda W, s=sign: s
    out = [LowCoeffs(0, r0, r0(Vx))]
    term_lists = [_terms(n, cls) for n in range(1, n_max + 1)]
    sigs = [sig for terms in term_lists for _, sig, _ in terms]
    values = bracket_family(sigs, -math.inf, x, profile, tol) if sigs else {}
    for n, terms in enumerate(term_lists, start=1):
        used = {sig: values[sig] for _, sig, _ in terms}

        def rbar(W, terms=terms):
            return sum(coef(W) * values[sig].value for _, sig, coef in terms)

        out.append(LowCoeffs(n, rbar, rbar(Vx), used))
    return out


def low_coeff(n: int, x: float, profile: PotentialProfile, tol: float = 1e-10) -> LowCoeffs:
    if n < 0:
        raise ValueError("order must be >= 0")
    return low_coeffs(n, x, profile, tol)[n]


def low_partial_sum(N: int, x: float, k: complex, profile: PotentialProfile, tol: float = 1e-10) -> complex:
    """sum_{n <= N} (ik)^n r_n(x)."""
    if complex(k).imag < 0:
        raise ValueError("Im k must be >= 0")
    coeffs = low_coeffs(N, x, profile, tol)
    return sum((1j * k) ** c.order * c.r_at_x for c in coeffs)
