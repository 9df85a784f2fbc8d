"""Remainder scaling sweeps, validity verdicts and the Green function.

A sweep evaluates the exact R_r and the truncated high-energy
(sum c_n/(2ik)^n) or low-energy (sum (ik)^n r_n) series on a geometric grid
of |k| along one of three paths in the upper half plane, then fits the decay
order of each residual.  Exact values and partial sums are kept to 30
significant digits so residuals far below double precision stay meaningful.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from . import lowenergy, reference, series_algebra
from .potential import AsymptoticClass, PotentialProfile, PotentialSpec, build_profile, catalog, parse_potential

DIGITS = 30
MODES = ("ray", "fixed_im", "real_axis")
SIDES = ("high", "low")
THREADS_ENV = "FPREFLECT_THREADS"


class AnalysisError(ValueError):
    pass


# ---------------------------------------------------------------------------
# High-precision complex columns
# ---------------------------------------------------------------------------


def _fmt(z) -> str:
    with mpmath.workdps(DIGITS + 10):
        z = mpmath.mpc(z)
        return f"{mpmath.nstr(z.real, DIGITS, min_fixed=1, max_fixed=0)},{mpmath.nstr(z.imag, DIGITS, min_fixed=1, max_fixed=0)}"


def _parse(text: str) -> mpmath.mpc:
    re_, im_ = text.split(",")
    with mpmath.workdps(DIGITS + 10):
        return mpmath.mpc(mpmath.mpf(re_), mpmath.mpf(im_))


def _quantize(z) -> mpmath.mpc:
    with mpmath.workdps(DIGITS + 10):
        return _parse(_fmt(z))


# ---------------------------------------------------------------------------
# Sweep specification and report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    potential: str
    x: float
    side: str
    mode: str
    k_magnitudes: tuple[float, ...]
    orders: tuple[int, ...]
    theta: float | None = None
    im_part: float | None = None
    alpha: float | None = None

    def __post_init__(self):
        if self.side not in SIDES:
            raise AnalysisError(f"side must be one of {SIDES}")
        if self.mode not in MODES:
            raise AnalysisError(f"mode must be one of {MODES}")
        grid = tuple(float(v) for v in self.k_magnitudes)
        object.__setattr__(self, "k_magnitudes", grid)
        object.__setattr__(self, "orders", tuple(sorted(int(n) for n in self.orders)))
        if len(grid) < 3 or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] <= 0:
            raise AnalysisError("k grid must be positive, strictly increasing, with at least 3 points")
        if not self.orders or self.orders[0] < 0:
            raise AnalysisError("orders must be a nonempty set of N >= 0")
        if self.mode == "ray" and not (self.theta is not None and 0 < self.theta < math.pi):
            raise AnalysisError("ray mode needs 0 < theta < pi")
        if self.mode == "fixed_im" and not (self.im_part is not None and self.im_part > 0):
            raise AnalysisError("fixed_im mode needs Im k = b > 0")

    @staticmethod
    def geometric(kmin: float, kmax: float, points: int) -> tuple[float, ...]:
        if not 0 < kmin < kmax or points < 3:
            raise AnalysisError("need 0 < kmin < kmax and at least 3 points")
        return tuple(float(v) for v in np.geomspace(kmin, kmax, points))

    def k_values(self) -> list[complex]:
        if self.mode == "ray":
            return [m * complex(math.cos(self.theta), math.sin(self.theta)) for m in self.k_magnitudes]
        if self.mode == "fixed_im":
            return [complex(m, self.im_part) for m in self.k_magnitudes]
        return [complex(m, 0.0) for m in self.k_magnitudes]

    def potential_spec(self) -> PotentialSpec:
        return resolve_potential(self.potential)


@dataclass
class SweepRow:
    k: complex
    exact: mpmath.mpc | None
    partial: dict[int, mpmath.mpc]
    ok: bool = True
    note: str = ""

    def residual(self, N: int) -> float:
        if not self.ok:
            return math.nan
        with mpmath.workdps(DIGITS + 10):
            return float(abs(self.exact - self.partial[N]))

    def __eq__(self, other):
        if not isinstance(other, SweepRow):
            return NotImplemented
        return (
            self.k == other.k
            and self.ok == other.ok
            and self.note == other.note
            and self._canonical() == other._canonical()
        )

    def _canonical(self):
        exact = _fmt(self.exact) if self.exact is not None else None
        return exact, {n: _fmt(v) for n, v in self.partial.items()}


@dataclass
class SweepReport:
    spec: SweepSpec
    rows: list[SweepRow]
    fitted_slope: dict[int, float]
    verdict: dict[int, str]
    oracle: str = ""

    def residuals(self, N: int) -> list[float]:
        return [r.residual(N) for r in self.rows]

    # -- serialization ----------------------------------------------------
    def to_json(self) -> str:
        spec = {
            "potential": self.spec.potential,
            "x": self.spec.x,
            "side": self.spec.side,
            "mode": self.spec.mode,
            "k_magnitudes": list(self.spec.k_magnitudes),
            "orders": list(self.spec.orders),
            "theta": self.spec.theta,
            "im_part": self.spec.im_part,
            "alpha": self.spec.alpha,
        }
        rows = [
            {
                "k": [r.k.real, r.k.imag],
                "ok": r.ok,
                "note": r.note,
                "exact": _fmt(r.exact) if r.ok else None,
                "partial": {str(n): _fmt(v) for n, v in r.partial.items()},
                "residual": {str(n): r.residual(n) for n in self.spec.orders},
            }
            for r in self.rows
        ]
        return json.dumps(
            {
                "schema": "fpreflect.sweep/1",
                "spec": spec,
                "oracle": self.oracle,
                "fitted_slope": {str(n): _nan_safe(v) for n, v in self.fitted_slope.items()},
                "verdict": {str(n): v for n, v in self.verdict.items()},
                "rows": rows,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> SweepReport:
        data = json.loads(text)
        s = data["spec"]
        spec = SweepSpec(
            s["potential"], s["x"], s["side"], s["mode"], tuple(s["k_magnitudes"]), tuple(s["orders"]),
            s["theta"], s["im_part"], s["alpha"],
        )
        rows = [
            SweepRow(
                complex(*r["k"]),
                _parse(r["exact"]) if r["exact"] is not None else None,
                {int(n): _parse(v) for n, v in r["partial"].items()},
                r["ok"],
                r["note"],
            )
            for r in data["rows"]
        ]
        slopes = {int(n): (math.nan if v is None else v) for n, v in data["fitted_slope"].items()}
        verdict = {int(n): v for n, v in data["verdict"].items()}
        return cls(spec, rows, slopes, verdict, data.get("oracle", ""))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["k_re", "k_im", "exact_re", "exact_im"]
        for n in self.spec.orders:
            header += [f"partial_re_{n}", f"partial_im_{n}", f"residual_{n}"]
        header.append("ok")
        writer.writerow(header)
        for r in self.rows:
            line = [repr(r.k.real), repr(r.k.imag)]
            line += _fmt(r.exact).split(",") if r.ok else ["", ""]
            for n in self.spec.orders:
                if r.ok:
                    line += _fmt(r.partial[n]).split(",") + [repr(r.residual(n))]
                else:
                    line += ["", "", ""]
            line.append("1" if r.ok else "0")
            writer.writerow(line)
        return buf.getvalue()

    def __eq__(self, other):
        if not isinstance(other, SweepReport):
            return NotImplemented
        same_slopes = self.fitted_slope.keys() == other.fitted_slope.keys() and all(
            (math.isnan(a) and math.isnan(other.fitted_slope[n])) or a == other.fitted_slope[n]
            for n, a in self.fitted_slope.items()
        )
        return (
            self.spec == other.spec
            and self.rows == other.rows
            and same_slopes
            and self.verdict == other.verdict
            and self.oracle == other.oracle
        )


def _nan_safe(v: float):
    return None if v is None or math.isnan(v) else v


# ---------------------------------------------------------------------------
# Potentials and oracles
# ---------------------------------------------------------------------------


def resolve_potential(name: str) -> PotentialSpec:
    head = name.partition(":")[0]
    from .potential import CATALOG_NAMES

    if head in CATALOG_NAMES:
        return catalog(name)
    return parse_potential(name)


@lru_cache(maxsize=32)
def _profile_for(name: str, max_order: int) -> PotentialProfile:
    return build_profile(resolve_potential(name), max_order)


def oracle_name(spec: PotentialSpec, x: float) -> str:
    ex = spec.example
    if ex == 7 and float((1 + spec.param("alpha")) / 2).is_integer():
        return "semiinfinite_rr"
    if ex is not None and not (ex == 8 and x <= 0) and not (ex in (6, 7) and x >= 0):
        return "closed_form"
    return "semiinfinite_rr"


def exact_value(spec: PotentialSpec, profile: PotentialProfile, x: float, k: complex, rtol: float = reference.ODE_RTOL):
    """(multiprecision R_r, oracle name): closed form when the catalog has one."""
    if oracle_name(spec, x) == "closed_form":
        alpha = spec.param("alpha") if spec.example == 7 else 0.5
        return reference.closed_form_mp(spec.example, x, k, alpha=alpha), "closed_form"
    energy = reference.ComplexEnergy(k).with_default_shift(profile)
    return mpmath.mpc(reference.semiinfinite_rr(profile, x, energy, rtol=rtol)), "semiinfinite_rr"


def high_partial_sums(profile: PotentialProfile, x: float, k: complex, orders) -> dict[int, mpmath.mpc]:
    n_max = max(orders)
    coeffs = [series_algebra.evaluate(c, profile, x) for _, c in series_algebra.high_coeffs(max(n_max, 1))]
    out = {}
    with mpmath.workdps(DIGITS + 10):
        kk = mpmath.mpc(k)
        total = mpmath.mpc(0)
        terms = [mpmath.mpf(c) / (2j * kk) ** (n + 1) for n, c in enumerate(coeffs)]
        for N in sorted(orders):
            out[N] = _quantize(sum(terms[:N], mpmath.mpc(0)))
    return out


def low_partial_sums(r_values, k: complex, orders) -> dict[int, mpmath.mpc]:
    out = {}
    with mpmath.workdps(DIGITS + 10):
        kk = mpmath.mpc(k)
        for N in sorted(orders):
            out[N] = _quantize(sum((1j * kk) ** n * mpmath.mpf(r_values[n]) for n in range(N + 1)))
    return out


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def fit_decay_order(mags, residuals, side: str) -> float:
    """Least-squares decay order over the inner 80% of the usable points.

    High side: -d log(res)/d log|k|; low side: +d log(res)/d log|k|.
    """
    pts = [(m, r) for m, r in zip(mags, residuals) if r > 0 and math.isfinite(r)]
    n = len(pts)
    trim = int(round(0.1 * n))
    pts = pts[trim : n - trim] if n - 2 * trim >= 3 else pts
    if len(pts) < 3:
        return math.nan
    lx = np.log([p[0] for p in pts])
    ly = np.log([p[1] for p in pts])
    slope = float(np.polyfit(lx, ly, 1)[0])
    return -slope if side == "high" else slope


def fit_power_law(mags, values) -> tuple[float, float]:
    """(exponent, prefactor) of a least-squares fit values ~ prefactor * mags^exponent."""
    lx, ly = np.log(np.asarray(mags, float)), np.log(np.asarray(values, float))
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(math.exp(intercept))


def verdict_from_slope(order: float, N: int) -> str:
    """Decay of the scaled remainder |k|^{±N} * residual."""
    if math.isnan(order):
        return "inconclusive"
    scaled = order - N
    if scaled >= 0.9:
        return "vanishes"
    if scaled < 0.1:
        return "persists"
    return "inconclusive"


def _row(args) -> SweepRow:
    potential, x, side, k, orders, max_order, r_values, rtol = args
    spec = resolve_potential(potential)
    profile = _profile_for(potential, max_order)
    try:
        exact, _ = exact_value(spec, profile, x, k, rtol)
        exact = _quantize(exact)
        if side == "high":
            partial = high_partial_sums(profile, x, k, orders)
        else:
            partial = low_partial_sums(r_values, k, orders)
        return SweepRow(k, exact, partial)
    except (ArithmeticError, ValueError) as exc:
        return SweepRow(k, None, {}, ok=False, note=f"{type(exc).__name__}: {exc}")


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run_sweep(spec: SweepSpec, tol: float = 1e-10, rtol: float = reference.ODE_RTOL, workers: int | None = None) -> SweepReport:
    """Evaluate every grid point, fit decay orders and assign verdicts.

    ``tol`` is the bracket quadrature tolerance (low side), ``rtol`` the ODE
    tolerance of the numerical oracle.  Rows run in a process pool when
    ``workers`` (default: $FPREFLECT_THREADS, else 1) exceeds one; the row
    order of the report is always the grid order.
    """
    pspec = spec.potential_spec()
    max_order = max(max(spec.orders), 1) + 1
    profile = _profile_for(spec.potential, max_order)
    r_values = None
    if spec.side == "low":
        r_values = [c.r_at_x for c in lowenergy.low_coeffs(max(spec.orders), spec.x, profile, tol)]
    jobs = [(spec.potential, spec.x, spec.side, k, spec.orders, max_order, r_values, rtol) for k in spec.k_values()]
    workers = workers or _workers()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row, jobs))
    else:
        rows = [_row(j) for j in jobs]
    oracle = oracle_name(pspec, spec.x) if spec.side == "high" or pspec.example is None else "closed_form"
    good = [r for r in rows if r.ok]
    mags = [abs(r.k) for r in good]
    slopes, verdicts = {}, {}
    for N in spec.orders:
        order = fit_decay_order(mags, [r.residual(N) for r in good], spec.side)
        slopes[N] = order
        verdicts[N] = verdict_from_slope(order, N)
    return SweepReport(spec, rows, slopes, verdicts, oracle)


# ---------------------------------------------------------------------------
# Verdict table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    valid: bool
    expected: str
    reason: str
    convergent: bool | None = None


def validity_verdict(cls: AsymptoticClass, mode: str, side: str) -> Verdict:
    """Expected fate of the scaled remainder for a potential class, limit mode and side."""
    if mode not in MODES or side not in SIDES:
        raise AnalysisError(f"unknown mode/side {mode!r}/{side!r}")

    def out(valid, reason, convergent=None):
        return Verdict(valid, "vanishes" if valid else "persists", reason, convergent)

    if side == "high":
        if mode == "ray":
            return out(True, "fixed arg k: valid whenever f^(N-1) is continuous and piecewise differentiable")
        if mode == "fixed_im":
            if cls.f_limit in ("plus_infinity", "minus_infinity") and cls.growth_tag == "exponential_or_faster":
                return out(False, "fixed Im k: f diverges exponentially or faster")
            return out(True, "fixed Im k: f does not diverge exponentially")
        if cls.f_finite:
            return out(True, "real axis: f(-inf) is finite")
        return out(False, "real axis: f(-inf) is infinite")
    if cls.v_limit == "finite":
        valid = cls.growth_tag in ("exponential_decay", "superpolynomial_decay")
        convergent = cls.growth_tag == "exponential_decay" if valid else None
        reason = "V converges faster than any power" if valid else "V converges like a power or slower"
        return out(valid, reason, convergent)
    valid = cls.growth_tag != "logarithmic_or_slower"
    convergent = cls.f_limit != "zero" if valid else None
    reason = "V diverges faster than log|x|" if valid else "V diverges logarithmically or slower (fractional powers)"
    return out(valid, reason, convergent)


# ---------------------------------------------------------------------------
# Remainders
# ---------------------------------------------------------------------------


def integral_remainder_high(N: int, x: float, k, profile: PotentialProfile, tol: float = 1e-13) -> complex:
    """delta_N = (2ik)^{-N} int_{-inf}^x tau^2 K_N(z, R_l) dz."""
    if N < 0:
        raise ValueError("N must be >= 0")
    kv = reference.ComplexEnergy.of(k).value
    kernel, _ = series_algebra.remainder_kernel(N)
    order = max(kernel.max_order(), 0)
    if order > profile.max_order:
        raise AnalysisError(f"profile needs derivatives up to order {order}")
    if kernel.coeffs == () or all(a.is_zero() for a in kernel.coeffs):
        return 0j

    def integrand(z, tau, rl):
        return tau * tau * kernel.evaluate(profile.f_derivs(z, order), rl)

    integral = reference.interior_sweep(profile, x, kv, 0.0, integrand, tol)
    return integral / (2j * kv) ** N


def difference_remainder_high(N: int, x: float, k, profile: PotentialProfile, exact: complex | None = None) -> complex:
    kv = reference.ComplexEnergy.of(k).value
    if exact is None:
        exact = reference.semiinfinite_rr(profile, x, kv)
    coeffs = [series_algebra.evaluate(c, profile, x) for _, c in series_algebra.high_coeffs(max(N, 1))]
    return exact - sum(c / (2j * kv) ** (n + 1) for n, c in enumerate(coeffs[:N]))


# ---------------------------------------------------------------------------
# Green function
# ---------------------------------------------------------------------------


@dataclass
class GreenFunction:
    """S(x; k) and G_S(x, x'; k) for a potential on the whole line.

    R_r(z, -inf) and R_l(inf, z) are seeded by the semi-infinite oracle at the
    ends of [x', x] and carried across it by their Riccati flows, so S and its
    integral come from one dense solution per side.
    """

    profile: PotentialProfile
    k: complex
    tol: float = 1e-12
    rtol: float = reference.ODE_RTOL
    mirror: PotentialProfile = field(init=False)

    def __post_init__(self):
        self.k = reference.ComplexEnergy.of(self.k).value
        if self.k.imag <= 0:
            raise AnalysisError("Green function assembly needs Im k > 0")
        spec = self.profile.spec
        if spec.domain_max != math.inf or len(spec.pieces) != 1:
            raise AnalysisError("mirror construction needs a smooth potential on the whole line")
        self.mirror = build_profile(spec.mirrored(), max(self.profile.max_order, 1))

    def r_right(self, x: float) -> complex:
        return reference.semiinfinite_rr(self.profile, x, self.k, self.tol, rtol=self.rtol)

    def r_left(self, x: float) -> complex:
        """R_l(inf, x; k) of V equals R_r(-x, -inf; k) of V(-.)."""
        return reference.semiinfinite_rr(self.mirror, -x, self.k, self.tol, rtol=self.rtol)

    @staticmethod
    def _s(rl, rr):
        if abs(1 + rl) < 1e-14 or abs(1 + rr) < 1e-14:
            raise AnalysisError("1 + R = 0: S(x; k) is singular")
        return rl / (1 + rl) + rr / (1 + rr)

    def s_value(self, x: float) -> complex:
        return self._s(self.r_left(x), self.r_right(x))

    def _tracks(self, x_prime: float, x: float):
        k = self.k
        f = self.profile.pieces[0].f[0]

        def right(z, y):
            return [2j * k * y[0] + f(z) * (1 - y[0] ** 2)]

        def left(z, y):
            return [-2j * k * y[0] + f(z) * (1 - y[0] ** 2)]

        rr = reference._solve(right, x_prime, x, [self.r_right(x_prime)], rtol=self.rtol, dense=True)
        rl = reference._solve(left, x, x_prime, [self.r_left(x)], rtol=self.rtol, dense=True)
        return rr, rl

    def __call__(self, x: float, x_prime: float) -> complex:
        if x < x_prime:
            raise AnalysisError("assembly formula needs x >= x'")
        k = self.k
        if x == x_prime:
            s_x = s_xp = self.s_value(x)
            integral = 0j
        else:
            rr, rl = self._tracks(x_prime, x)
            s_at = lambda z: self._s(complex(rl.sol(z)[0]), complex(rr.sol(z)[0]))
            s_x, s_xp = s_at(x), s_at(x_prime)
            nodes, weights = np.polynomial.legendre.leggauss(20)
            edges = np.linspace(x_prime, x, max(1, int(math.ceil(abs(x - x_prime)))) + 1)
            integral = 0j
            for a, b in zip(edges[:-1], edges[1:]):
                half = 0.5 * (b - a)
                integral += half * sum(w * s_at(a + half * (t + 1)) for w, t in zip(weights, nodes))
        root = np.sqrt(complex((1 - s_x) * (1 - s_xp)))
        # branch: the root tends to 1 as S -> 0 (free limit)
        if root.real < 0:
            root = -root
        phase = 1j * k * (x - x_prime) - 1j * k * integral
        return complex(-1j / (2 * k * root) * np.exp(phase))


def greens(profile: PotentialProfile, x: float, x_prime: float, k, tol: float = 1e-12, rtol: float = reference.ODE_RTOL) -> complex:
    """G_S(x, x'; k).

    For x < x' the value comes from the mirrored potential,
    G_V(x, x') = G_{V(-.)}(-x, -x'), an independent evaluation path.
    """
    g = GreenFunction(profile, k, tol, rtol)
    if x >= x_prime:
        return g(x, x_prime)
    mirrored = GreenFunction(g.mirror, k, tol, rtol)
    return mirrored(-x, -x_prime)


def s_value(profile: PotentialProfile, x: float, k, tol: float = 1e-12) -> complex:
    return GreenFunction(profile, k, tol).s_value(x)
