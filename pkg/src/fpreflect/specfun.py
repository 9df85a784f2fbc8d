"""Complex special functions used by the closed-form reflection coefficients.

Everything here is a direct series (or Lanczos / Stirling) implementation.
Series are summed in mpmath arithmetic at a working precision that is raised
automatically when the terms cancel, so results are accurate to the requested
number of digits even where double precision would lose everything (large
hypergeometric parameters, Bessel functions of moderately large argument).
mpmath is used only as a multiprecision number type; none of its special
function routines are called.
"""

from __future__ import annotations

import cmath
import math
import itertools
from fractions import Fraction
from dataclasses import dataclass
from functools import lru_cache

import mpmath
from mpmath import mpc, mpf

DEFAULT_DPS = 20
MAX_TERMS = 100_000


class SpecialFunctionError(ArithmeticError):
    """Raised for poles, branch ambiguities and non-convergent series."""


@dataclass(frozen=True)
class SeriesResult:
    value: mpc
    terms_used: int
    converged: bool
    working_dps: int = DEFAULT_DPS

    def __complex__(self) -> complex:
        return complex(self.value)


# ---------------------------------------------------------------------------
# Gamma function
# ---------------------------------------------------------------------------

_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _is_nonpositive_integer(z) -> bool:
    if isinstance(z, (mpc, mpf)):
        z = mpc(z)
        return z.imag == 0 and z.real <= 0 and z.real == mpmath.floor(z.real)
    z = complex(z)
    return z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real)


def gamma_c(z: complex) -> complex:
    """Gamma function in double precision (Lanczos, reflection for Re z < 1/2)."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise SpecialFunctionError(f"gamma has a pole at {z}")
    if z.real < 0.5:
        return cmath.pi / (cmath.sin(cmath.pi * z) * gamma_c(1 - z))
    z -= 1
    acc = _LANCZOS[0]
    for i, c in enumerate(_LANCZOS[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return cmath.sqrt(2 * cmath.pi) * t ** (z + 0.5) * cmath.exp(-t) * acc


_BERNOULLI = [Fraction(1)]
_BERNOULLI_RATIOS: list[tuple[int, int]] = []


def _bernoulli_ratios():
    """Yield B_2j / (2j (2j-1)) as exact (num, den) pairs, j = 1, 2, ...; extended on demand."""
    j = 0
    while True:
        j += 1
        while len(_BERNOULLI_RATIOS) < j:
            n = 2 * len(_BERNOULLI_RATIOS) + 2
            while len(_BERNOULLI) <= n:
                m = len(_BERNOULLI)
                if m > 1 and m % 2:
                    _BERNOULLI.append(Fraction(0))
                    continue
                s = sum(math.comb(m + 1, i) * b for i, b in enumerate(_BERNOULLI) if b)
                _BERNOULLI.append(-s / (m + 1))
            r = _BERNOULLI[n] / (n * (n - 1))
            _BERNOULLI_RATIOS.append((r.numerator, r.denominator))
        yield _BERNOULLI_RATIOS[j - 1]


def _log_sin_pi(z: mpc) -> mpc:
    # log sin(pi z) without overflow for large |Im z|
    if z.imag >= 0:
        e = mpmath.exp(2j * mpmath.pi * z)
        return -1j * mpmath.pi * z + mpmath.log((e - 1) / 2j)
    e = mpmath.exp(-2j * mpmath.pi * z)
    return 1j * mpmath.pi * z + mpmath.log((1 - e) / 2j)


def loggamma_mp(z) -> mpc:
    """log Gamma(z) at the current mpmath precision (Stirling series with shift).

    The imaginary part is not reduced to the principal branch; only
    exp(loggamma_mp(z)) and differences are meaningful.
    """
    z = mpc(z)
    if _is_nonpositive_integer(z):
        raise SpecialFunctionError(f"gamma has a pole at {complex(z)}")
    if z.real < 0.5:
        return mpmath.log(mpmath.pi) - _log_sin_pi(z) - loggamma_mp(1 - z)
    dps = mpmath.mp.dps
    radius = 0.5 * dps + 8
    shift = 0
    prod = mpc(1)
    while abs(z + shift) < radius:
        prod *= z + shift
        shift += 1
    w = z + shift
    s = (w - mpf(0.5)) * mpmath.log(w) - w + mpmath.log(2 * mpmath.pi) / 2
    tol = mpf(10) ** (-dps - 5) * max(1, abs(s))
    w2 = w * w
    wpow = w
    for num, den in itertools.islice(_bernoulli_ratios(), int(dps) + 20):
        term = mpf(num) / den / wpow
        s += term
        if abs(term) < tol:
            break
        wpow *= w2
    else:
        raise SpecialFunctionError("Stirling series did not reach tolerance")
    return s - mpmath.log(prod)


def gamma_mp(z) -> mpc:
    return mpmath.exp(loggamma_mp(z))


def rgamma_mp(z) -> mpc:
    """1/Gamma(z), zero at the poles."""
    if _is_nonpositive_integer(z):
        return mpc(0)
    return mpmath.exp(-loggamma_mp(z))


# ---------------------------------------------------------------------------
# Hypergeometric series
# ---------------------------------------------------------------------------


def _summed(next_ratio, dps, max_terms, what):
    """Sum 1 + t_1 + t_2 + ... with t_{n+1} = t_n * next_ratio(n).

    Precision is raised until the cancellation loss (largest term over the
    sum) fits inside the working precision.
    """
    target = dps or DEFAULT_DPS
    wp = target + 10
    for _ in range(8):
        with mpmath.workdps(wp):
            term = mpc(1)
            total = mpc(1)
            biggest = mpf(1)
            eps = mpf(10) ** (-wp)
            n = 0
            ok = False
            while n < max_terms:
                ratio = next_ratio(n)
                term *= ratio
                n += 1
                total += term
                mag = abs(term)
                if mag > biggest:
                    biggest = mag
                if term == 0:
                    ok = True
                    break
                r = abs(ratio)
                if r < 0.95 and mag <= eps * (1 - r) * abs(total):
                    ok = True
                    break
            if not ok:
                raise SpecialFunctionError(f"{what}: no convergence within {max_terms} terms")
            if total == 0:
                return SeriesResult(total, n, True, wp)
            loss = float(mpmath.log10(biggest / abs(total)))
            if loss + target + 3 <= wp:
                return SeriesResult(+total, n, True, wp)
            wp = int(target + loss + 12)
    raise SpecialFunctionError(f"{what}: cancellation could not be resolved")


def hyp1f1(a, c, z, dps: int | None = None, max_terms: int = MAX_TERMS) -> SeriesResult:
    """Confluent hypergeometric function 1F1(a; c; z) by its power series."""
    if _is_nonpositive_integer(c):
        raise SpecialFunctionError(f"1F1 undefined for c = {c}")
    with mpmath.workdps((dps or DEFAULT_DPS) + 60):
        a_, c_, z_ = mpc(a), mpc(c), mpc(z)

    def ratio(n):
        return (a_ + n) / ((c_ + n) * (n + 1)) * z_

    return _summed(ratio, dps, max_terms, "1F1")


def hyp2f1(a, b, c, z, dps: int | None = None, max_terms: int = MAX_TERMS) -> SeriesResult:
    """Gauss hypergeometric function 2F1(a, b; c; z) for |z| < 0.9."""
    if _is_nonpositive_integer(c):
        raise SpecialFunctionError(f"2F1 undefined for c = {c}")
    if abs(complex(z)) >= 0.9:
        raise SpecialFunctionError(f"2F1 series used outside |z| < 0.9 (z = {complex(z)})")
    with mpmath.workdps((dps or DEFAULT_DPS) + 60):
        a_, b_, c_, z_ = mpc(a), mpc(b), mpc(c), mpc(z)

    def ratio(n):
        return (a_ + n) * (b_ + n) / ((c_ + n) * (n + 1)) * z_

    return _summed(ratio, dps, max_terms, "2F1")


def bessel_j(nu, z, dps: int | None = None, max_terms: int = MAX_TERMS) -> SeriesResult:
    """Bessel J_nu(z) for complex order and argument, principal branch of (z/2)^nu."""
    nu_c, z_c = complex(nu), complex(z)
    if abs(z_c) > 250:
        raise SpecialFunctionError(f"bessel_j series regime exceeded (|z| = {abs(z_c):.3g})")
    if _is_nonpositive_integer(nu_c) and nu_c != 0:
        n = int(-nu_c.real)
        r = bessel_j(n, z, dps, max_terms)
        return SeriesResult((-1) ** n * r.value, r.terms_used, r.converged, r.working_dps)
    integer_order = nu_c.imag == 0 and nu_c.real == math.floor(nu_c.real)
    if z_c.imag == 0 and z_c.real < 0 and not integer_order:
        raise SpecialFunctionError("bessel_j: argument on the branch cut (negative real axis)")
    if z_c == 0:
        if nu_c == 0:
            return SeriesResult(mpc(1), 0, True)
        if nu_c.real > 0:
            return SeriesResult(mpc(0), 0, True)
        raise SpecialFunctionError("bessel_j: singular at z = 0 for Re nu <= 0")
    with mpmath.workdps((dps or DEFAULT_DPS) + 60):
        nu_, z_ = mpc(nu), mpc(z)
        q = -(z_ * z_) / 4

    def ratio(m):
        return q / ((m + 1) * (nu_ + m + 1))

    series = _summed(ratio, dps, max_terms, "bessel_j")
    with mpmath.workdps(series.working_dps):
        half = mpc(z) / 2
        prefac = mpmath.exp(mpc(nu) * mpmath.log(half)) * rgamma_mp(mpc(nu) + 1)
        value = prefac * series.value
    return SeriesResult(value, series.terms_used, series.converged, series.working_dps)


# ---------------------------------------------------------------------------
# Real auxiliary functions
# ---------------------------------------------------------------------------

_EULER_GAMMA = 0.57721566490153286061


def _e1_continued_fraction(y: float) -> float:
    # modified Lentz for E1(y), y > 0
    tiny = 1e-300
    b = y + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h * math.exp(-y)
    raise SpecialFunctionError("E1 continued fraction did not converge")


def _ei_series(x: float) -> float:
    total = 0.0
    term = 1.0
    for n in range(1, 1000):
        term *= x / n
        add = term / n
        total += add
        if abs(add) < 1e-17 * abs(total):
            break
    return _EULER_GAMMA + math.log(abs(x)) + total


def real_aux(kind: str, x: float) -> float:
    """erfc, Ei or Shi of a real argument.

    Ei(x) = -int_{-x}^inf e^{-t}/t dt is supported for x < 0 (and by series for
    small positive x); Shi(x) = int_0^x sinh(t)/t dt.
    """
    x = float(x)
    if not math.isfinite(x):
        raise SpecialFunctionError(f"{kind}: non-finite argument")
    if kind == "erfc":
        return math.erfc(x)
    if kind == "Ei":
        if x == 0:
            raise SpecialFunctionError("Ei has a logarithmic singularity at 0")
        if x < 0:
            y = -x
            if y > 2.0:
                return -_e1_continued_fraction(y)
            return _ei_series(x)
        if x > 40:
            raise SpecialFunctionError("Ei: argument out of supported range")
        return _ei_series(x)
    if kind == "Shi":
        if abs(x) > 700:
            raise SpecialFunctionError("Shi: argument out of supported range")
        x2 = x * x
        term = x
        total = x
        k = 0
        while True:
            term *= x2 / ((2 * k + 2) * (2 * k + 3))
            k += 1
            add = term / (2 * k + 1)
            total += add
            if abs(add) <= 1e-17 * abs(total):
                return total
    raise ValueError(f"unknown auxiliary function {kind!r}")
