"""The twelve acceptance criteria as runnable checks.

Each check returns a ``CriterionResult``; ``run_all`` drives them in order and
is what ``fpreflect verify`` and the acceptance test module call.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import analysis, lowenergy, reference, series_algebra
from .potential import build_profile, catalog, parse_potential
from .reference import EXAMPLE_ANCHORS
from .series_algebra import DiffPolynomial, XiPolynomial

EXAMPLE_NAMES = {
    1: "linear",
    2: "parabolic",
    3: "exp-growth",
    4: "exp-decay",
    5: "logcosh",
    6: "sqrt-growth",
    7: "log-growth:0.5",
    8: "kink",
}


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0
    budget: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d}: {self.title} -- {self.detail} ({self.seconds:.1f}s / {self.budget:g}s)"


def _poly(*terms) -> DiffPolynomial:
    """terms: (coefficient, {order: power})."""
    return DiffPolynomial.parse_terms((Fraction(c), e) for c, e in terms)


F0, F1, F2, F3 = ({0: 1}, {1: 1}, {2: 1}, {3: 1})


def _golden_tables():
    f2f1 = {0: 2, 1: 1}
    ctilde = {
        1: [_poly((-1, F0))],
        2: [_poly((-1, F1)), _poly((1, {0: 2}))],
        3: [_poly((-1, F2), (1, {0: 3})), _poly((2, {0: 1, 1: 1})), _poly((-1, {0: 3}))],
        4: [
            _poly((-1, F3), (5, f2f1)),
            _poly((-2, {0: 4}), (1, {1: 2}), (2, {0: 1, 2: 1})),
            _poly((-3, f2f1)),
            _poly((1, {0: 4})),
        ],
    }
    c = {n: v[0] for n, v in ctilde.items()}
    h = {
        (0, 0): _poly((1, F0)),
        (1, 0): _poly((1, F1)),
        (1, 1): _poly((-2, {0: 2})),
        (2, 0): _poly((1, F2), (-1, {0: 3})),
        (2, 1): _poly((-4, {0: 1, 1: 1})),
        (2, 2): _poly((3, {0: 3})),
        (3, 0): _poly((1, F3), (-5, f2f1)),
        (3, 1): _poly((4, {0: 4}), (-2, {1: 2}), (-4, {0: 1, 2: 1})),
        (3, 2): _poly((9, f2f1)),
        (3, 3): _poly((-4, {0: 4})),
    }
    return {n: XiPolynomial(v) for n, v in ctilde.items()}, c, h


def criterion_1():
    ctilde, c, h = _golden_tables()
    bad = []
    for n in range(1, 5):
        if series_algebra.ctilde(n) != ctilde[n]:
            bad.append(f"c~_{n}")
        if series_algebra.high_coeffs(n)[-1][1] != c[n]:
            bad.append(f"c_{n}")
    for N in range(4):
        _, hs = series_algebra.remainder_kernel(N)
        for m in range(N + 1):
            if hs[m] != h[(N, m)]:
                bad.append(f"h_{N}{m}")
    return not bad, "all 18 polynomials equal" if not bad else "mismatch: " + ", ".join(bad)


def _constant_value(poly: DiffPolynomial) -> Fraction:
    # f = 1, all derivatives zero: only pure powers of f survive
    return sum((cf for key, cf in poly.terms.items() if len(key) <= 1), Fraction(0))


def criterion_2():
    want = [-1, 0, 1, 0, -2, 0, 5, 0, -14]
    got = [_constant_value(c) for _, c in series_algebra.high_coeffs(9)]
    return got == want, f"c_1..c_9 = {[int(v) if v.denominator == 1 else str(v) for v in got]}"


def criterion_3():
    mags = np.geomspace(0.3, 20, 4)
    args = (math.pi / 6, math.pi / 2, 5 * math.pi / 6)
    worst, where = 0.0, None
    for ex in range(1, 6):
        profile = build_profile(catalog(EXAMPLE_NAMES[ex]), 2)
        x = EXAMPLE_ANCHORS[ex]
        for m in mags:
            for th in args:
                k = m * cmath.exp(1j * th)
                closed = reference.closed_form_rr(ex, x, k)
                ode = reference.semiinfinite_rr(profile, x, k)
                rel = abs(closed - ode) / abs(closed)
                if rel > worst:
                    worst, where = rel, (ex, k)
    return worst <= 1e-6, f"max relative difference {worst:.2e} (example {where[0]}, k = {where[1]:.3g})"


def criterion_4():
    rng = np.random.default_rng(20240601)
    profile = build_profile(catalog("linear"), 2)
    worst = 0.0
    for _ in range(20):
        k = complex(rng.uniform(-5, 5), rng.uniform(0.1, 5))
        exact = 1j * k + cmath.sqrt(1 - k * k)  # principal root: Re >= 0 is the decaying branch
        worst = max(worst, abs(reference.semiinfinite_rr(profile, 0.0, k) - exact))
    return worst <= 1e-8, f"max |R - (ik + sqrt(1 - k^2))| = {worst:.2e} over 20 random k"


def criterion_5():
    profile = build_profile(catalog("linear"), 2)
    r = [c.r_at_x for c in lowenergy.low_coeffs(3, 0.0, profile, 1e-11)]
    want = [1, 1, 0.5, 0]
    err1 = max(abs(a - b) for a, b in zip(r, want))
    profile2 = build_profile(catalog("parabolic"), 2)
    err2 = 0.0
    for x in (-2.0, -1.0):
        r1 = lowenergy.low_coeff(1, x, profile2, 1e-11).r_at_x
        exact = math.sqrt(math.pi) * math.exp(x * x) * math.erfc(-x)
        err2 = max(err2, abs(r1 - exact) / exact)
    ok = err1 <= 1e-8 and err2 <= 1e-6
    return ok, f"example 1 r_0..r_3 max error {err1:.1e}; example 2 r_1 relative error {err2:.1e}"


def _low_sweep():
    spec = analysis.SweepSpec(
        "linear", 0.0, "low", "ray", analysis.SweepSpec.geometric(1e-3, 1e-1, 12), (0, 1, 2), theta=math.pi / 2
    )
    return analysis.run_sweep(spec)


def criterion_6():
    report = _low_sweep()
    need = {0: 1.9, 1: 1.9, 2: 3.9}
    slopes = report.fitted_slope
    ok = all(slopes[n] >= need[n] for n in need)
    text = ", ".join(f"N={n}: {slopes[n]:.3f} (need >= {need[n]})" for n in need)
    return ok, text


def criterion_7():
    grid = analysis.SweepSpec.geometric(10, 100, 12)
    texts, ok = [], True
    for ex in range(1, 5):
        spec = analysis.SweepSpec(EXAMPLE_NAMES[ex], EXAMPLE_ANCHORS[ex], "high", "ray", grid, (2, 6), theta=math.pi / 4)
        report = analysis.run_sweep(spec)
        for N in (2, 6):
            ok &= report.fitted_slope[N] >= N + 0.9
        texts.append(f"ex{ex}: {report.fitted_slope[2]:.2f}/{report.fitted_slope[6]:.2f}")
    return ok, "slopes N=2/N=6 " + ", ".join(texts)


def validity_matrix(examples=range(1, 8), modes=analysis.MODES, orders=(2,)):
    """[(example, mode, fitted verdict, expected verdict, slope)] for the high side."""
    grid = analysis.SweepSpec.geometric(10, 100, 12)
    rows = []
    for ex in examples:
        name = EXAMPLE_NAMES[ex]
        cls = build_profile(catalog(name), 2).asymptotic_class
        for mode in modes:
            spec = analysis.SweepSpec(name, EXAMPLE_ANCHORS[ex], "high", mode, grid, orders, theta=math.pi / 4, im_part=0.5)
            report = analysis.run_sweep(spec)
            expected = analysis.validity_verdict(cls, mode, "high").expected
            for N in orders:
                rows.append((ex, mode, report.verdict[N], expected, report.fitted_slope[N]))
    return rows


def criterion_8():
    rows = validity_matrix()
    wrong = [f"ex{ex}/{mode}: {got} vs {want}" for ex, mode, got, want, _ in rows if got != want]
    return not wrong, f"{len(rows) - len(wrong)}/{len(rows)} cells agree" + ("; " + "; ".join(wrong) if wrong else "")


def fractional_power_fit(alpha: float = 0.5, x: float = -1.0, theta: float = math.pi / 2, points: int = 13):
    mags = np.geomspace(1e-4, 1e-2, points)
    values = [abs(reference.closed_form_rr(7, x, m * cmath.exp(1j * theta), alpha=alpha) - 1) for m in mags]
    exponent, prefactor = analysis.fit_power_law(mags, values)
    predicted = 2 ** (1 - alpha) * math.gamma((1 - alpha) / 2) / math.gamma((1 + alpha) / 2) * (-x) ** alpha
    return exponent, prefactor, predicted


def criterion_9():
    exponent, prefactor, predicted = fractional_power_fit()
    ratio = prefactor / predicted
    ok = abs(exponent - 0.5) <= 0.05 and abs(ratio - 1) <= 0.02
    return ok, f"exponent {exponent:.4f} (0.5 +- 0.05), prefactor/predicted {ratio:.4f} (1 +- 0.02)"


def criterion_10():
    worst_316 = 0.0
    for ex in (1, 3, 4):
        profile = build_profile(catalog(EXAMPLE_NAMES[ex]), 2)
        for xi in (0.0, 0.3):
            for k in (1j, 1 + 1j):
                worst_316 = max(worst_316, reference.identity_316_residual(profile, EXAMPLE_ANCHORS[ex], xi, k))
    worst_k0 = 0.0
    for ex, (y, x) in ((1, (-1.5, 0.5)), (4, (-2.0, 1.0)), (5, (-1.0, 0.7))):
        profile = build_profile(catalog(EXAMPLE_NAMES[ex]), 2)
        for W in (-0.4, 0.8):
            xi = reference.xi_from_W(W, profile, x)
            want = reference.k0_forms(x, y, W, profile)
            tau, rl = reference.sweep_triple(profile, x, y, 0.0, xi)
            got = reference.generalize(reference.finite_interval(profile, y, x, 0.0), xi, profile)
            worst_k0 = max(
                worst_k0,
                abs(tau - want.tau_bar),
                abs(rl - want.r_l_bar),
                abs(got.tau_bar - want.tau_bar),
                abs(got.r_r_bar - want.r_r_bar),
                abs(got.r_l_bar - want.r_l_bar),
            )
    worst_unit, bound_ok = 0.0, True
    for ex, (y, x) in ((1, (-3.0, 0.0)), (2, (-2.0, 1.0)), (5, (-1.0, 2.0)), (8, (-1.5, 1.5))):
        profile = build_profile(catalog(EXAMPLE_NAMES[ex]), 2)
        for k in (0.3, 1.0, 4.0, -2.5):
            t = reference.finite_interval(profile, y, x, k)
            worst_unit = max(worst_unit, abs(abs(t.r_r) ** 2 + abs(t.tau) ** 2 - 1))
        for k in (0.3, 1.0 + 0.5j, 2j, -1.5 + 0.2j):
            t = reference.finite_interval(profile, y, x, k)
            bound_ok &= abs(t.tau) <= math.exp(-complex(k).imag * (x - y)) * (1 + 1e-9)
            bound_ok &= abs(t.r_l) <= 1 + 1e-9
    ok = worst_316 < 1e-5 and worst_k0 <= 1e-10 and worst_unit <= 1e-8 and bound_ok
    return ok, (
        f"identity residual {worst_316:.1e}; k=0 forms {worst_k0:.1e}; unitarity {worst_unit:.1e}; "
        f"bounds {'hold' if bound_ok else 'violated'}"
    )


def criterion_11():
    worst = 0.0
    for ex in range(1, 5):
        profile = build_profile(catalog(EXAMPLE_NAMES[ex]), 5)
        x = EXAMPLE_ANCHORS[ex]
        for k in (0.5j, 1 + 1j, 2 + 0.5j, -1 + 0.7j):
            exact = reference.closed_form_rr(ex, x, k)
            for N in range(4):
                a = analysis.integral_remainder_high(N, x, k, profile)
                b = analysis.difference_remainder_high(N, x, k, profile, exact)
                worst = max(worst, abs(a - b) / abs(b))
    return worst <= 1e-5, f"max relative difference {worst:.2e} over N <= 3, examples 1-4"


def criterion_12():
    free = build_profile(parse_potential("0"), 2)
    worst_free = 0.0
    for (x, xp), k in (((0.3, -0.2), 1j), ((1.5, -0.5), 0.5 + 1j), ((0.0, 0.0), 2 + 0.3j)):
        want = -1j / (2 * k) * cmath.exp(1j * k * (x - xp))
        worst_free = max(worst_free, abs(analysis.greens(free, x, xp, k) - want))
    even = build_profile(catalog("logcosh"), 2)
    worst_sym = 0.0
    for x, xp in ((0.5, -0.3), (1.2, 0.4), (-0.7, -1.5), (2.0, -2.0), (0.1, 0.0)):
        worst_sym = max(worst_sym, abs(analysis.greens(even, x, xp, 1j) - analysis.greens(even, xp, x, 1j)))
    ok = worst_free <= 1e-10 and worst_sym <= 1e-6
    return ok, f"free-case error {worst_free:.1e}; symmetry defect {worst_sym:.1e}"


CRITERIA: list[tuple[int, str, Callable[[], tuple[bool, str]], float]] = [
    (1, "symbolic goldens", criterion_1, 1),
    (2, "constant-drift series", criterion_2, 1),
    (3, "closed forms vs numerical oracle", criterion_3, 60),
    (4, "linear potential exactness", criterion_4, 5),
    (5, "low-energy coefficient goldens", criterion_5, 30),
    (6, "low-side slopes", criterion_6, 30),
    (7, "high-side slopes along a ray", criterion_7, 120),
    (8, "mode-validity map", criterion_8, 300),
    (9, "fractional-power detection", criterion_9, 60),
    (10, "identity suite", criterion_10, 60),
    (11, "remainder equivalence", criterion_11, 60),
    (12, "Green function", criterion_12, 30),
]


def run_criterion(number: int) -> CriterionResult:
    _, title, check, budget = CRITERIA[number - 1]
    start = time.perf_counter()
    try:
        passed, detail = check()
    except Exception as exc:  # a crash is a failed criterion, reported with its diagnostic
        passed, detail = False, f"error: {type(exc).__name__}: {exc}"
    return CriterionResult(number, title, bool(passed), detail, time.perf_counter() - start, budget)


def run_all(numbers=None, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    results = []
    for number, *_ in CRITERIA:
        if numbers is not None and number not in numbers:
            continue
        result = run_criterion(number)
        if echo:
            echo(result.line())
        results.append(result)
    return results
