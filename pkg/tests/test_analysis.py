import cmath
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from fpreflect import analysis, reference
from fpreflect.analysis import SweepReport, SweepSpec
from fpreflect.potential import AsymptoticClass

RAY = math.pi / 4


def test_sweep_spec_validation():
    grid = SweepSpec.geometric(10, 100, 5)
    with pytest.raises(analysis.AnalysisError):
        SweepSpec("linear", 0.0, "high", "ray", grid, (2,))
    with pytest.raises(analysis.AnalysisError):
        SweepSpec("linear", 0.0, "high", "fixed_im", grid, (2,), im_part=0.0)
    with pytest.raises(analysis.AnalysisError):
        SweepSpec("linear", 0.0, "sideways", "ray", grid, (2,), theta=RAY)
    with pytest.raises(analysis.AnalysisError):
        SweepSpec("linear", 0.0, "high", "ray", (1.0, 1.0, 2.0), (2,), theta=RAY)


def test_k_paths():
    grid = (1.0, 2.0, 4.0)
    assert SweepSpec("linear", 0, "high", "fixed_im", grid, (1,), im_part=0.5).k_values()[1] == 2 + 0.5j
    assert SweepSpec("linear", 0, "high", "real_axis", grid, (1,)).k_values()[2] == 4
    k = SweepSpec("linear", 0, "high", "ray", grid, (1,), theta=RAY).k_values()[0]
    assert cmath.phase(k) == pytest.approx(RAY)


def test_parabola_ray_slope():
    spec = SweepSpec("parabolic", -2.0, "high", "ray", SweepSpec.geometric(10, 100, 12), (2,), theta=RAY)
    report = analysis.run_sweep(spec)
    assert report.fitted_slope[2] >= 2.9
    assert report.verdict[2] == "vanishes"


def test_parabola_real_axis_persists():
    spec = SweepSpec("parabolic", -2.0, "high", "real_axis", SweepSpec.geometric(10, 100, 12), (1,))
    assert analysis.run_sweep(spec).verdict[1] == "persists"


def test_linear_low_side_slope():
    spec = SweepSpec("linear", 0.0, "low", "ray", SweepSpec.geometric(1e-3, 1e-1, 12), (2,), theta=math.pi / 2)
    assert analysis.run_sweep(spec).fitted_slope[2] >= 3.9


def test_residual_columns_are_consistent():
    spec = SweepSpec("exp-decay", 0.0, "high", "fixed_im", SweepSpec.geometric(5, 50, 6), (1, 3), im_part=0.5)
    report = analysis.run_sweep(spec)
    for row in report.rows:
        for N in spec.orders:
            assert row.residual(N) == pytest.approx(float(abs(row.exact - row.partial[N])), rel=1e-12)


def test_json_round_trip():
    spec = SweepSpec("exp-growth", 0.0, "high", "ray", SweepSpec.geometric(10, 40, 5), (2, 4), theta=RAY)
    report = analysis.run_sweep(spec)
    again = SweepReport.from_json(report.to_json())
    assert again == report
    assert again.residuals(4) == report.residuals(4)


def test_csv_layout():
    spec = SweepSpec("linear", 0.0, "high", "ray", SweepSpec.geometric(10, 40, 4), (1, 2), theta=RAY)
    lines = analysis.run_sweep(spec).to_csv().splitlines()
    assert lines[0].split(",")[:4] == ["k_re", "k_im", "exact_re", "exact_im"]
    assert "residual_2" in lines[0]
    assert len(lines) == 5


def test_parallel_rows_match_serial():
    spec = SweepSpec("logcosh", -0.5, "high", "ray", SweepSpec.geometric(10, 40, 4), (2,), theta=RAY)
    assert analysis.run_sweep(spec, workers=2) == analysis.run_sweep(spec, workers=1)


def test_fit_decay_order():
    mags = np.geomspace(1, 100, 11)
    assert analysis.fit_decay_order(mags, mags**-3.0, "high") == pytest.approx(3.0)
    assert analysis.fit_decay_order(mags, mags**2.0, "low") == pytest.approx(2.0)
    assert analysis.verdict_from_slope(3.95, 3) == "vanishes"
    assert analysis.verdict_from_slope(3.05, 3) == "persists"
    assert analysis.verdict_from_slope(3.5, 3) == "inconclusive"


def test_validity_verdicts(profiles):
    exp_growth = profiles("exp-growth").asymptotic_class
    assert not analysis.validity_verdict(exp_growth, "fixed_im", "high").valid
    assert analysis.validity_verdict(exp_growth, "ray", "high").valid
    log_growth = profiles("log-growth:0.5").asymptotic_class
    assert analysis.validity_verdict(log_growth, "ray", "low").expected == "persists"
    zero = AsymptoticClass("finite", "zero", "exponential_decay", v0=0.0)
    for mode in analysis.MODES:
        for side in analysis.SIDES:
            assert analysis.validity_verdict(zero, mode, side).valid
    assert analysis.validity_verdict(profiles("linear").asymptotic_class, "ray", "low").convergent


def test_integral_remainder_trivial(profiles):
    assert analysis.integral_remainder_high(0, 0.0, 1j, profiles("0")) == 0


def test_integral_remainder_linear(profiles):
    k = 2j
    exact = 1j * k + cmath.sqrt(1 - k * k)
    got = analysis.integral_remainder_high(1, 0.0, k, profiles("linear"))
    assert abs(got - (exact + 1 / (2j * k))) < 1e-6


def test_integral_remainder_exponential_decay(profiles):
    p = profiles("exp-decay")
    a = analysis.integral_remainder_high(2, 0.0, 1 + 1j, p)
    b = analysis.difference_remainder_high(2, 0.0, 1 + 1j, p)
    assert abs(a - b) <= 1e-5 * abs(b)


def test_free_green_function(profiles):
    for (x, xp), k in (((0.3, -0.2), 1j), ((2.0, 1.0), 0.3 + 0.8j)):
        want = -1j / (2 * k) * cmath.exp(1j * k * (x - xp))
        assert analysis.greens(profiles("0.4"), x, xp, k) == pytest.approx(want, abs=1e-12)
        assert abs(analysis.s_value(profiles("0.4"), x, k)) < 1e-14


def test_even_potential_symmetry(profiles):
    p = profiles("logcosh")
    for x, xp in ((0.5, -0.3), (1.2, 0.4)):
        assert analysis.greens(p, x, xp, 1j) == pytest.approx(analysis.greens(p, xp, x, 1j), abs=1e-6)
    assert reference.semiinfinite_rr(p, -0.7, 1j) == pytest.approx(GreenLeft(p, 0.7), abs=1e-10)


def GreenLeft(profile, x):
    return analysis.GreenFunction(profile, 1j).r_left(x)


def _wronskian_green(profile, x, xp, k, span=12.0):
    """G_S from decaying Schrodinger solutions integrated inward from +-span."""

    def rhs(z, y):
        f, fp = profile.f_derivs(z, 1)
        return [y[1], (fp + f * f - k * k) * y[0]]

    def decaying(z0, direction):
        f = profile.eval_f(z0)
        q = cmath.sqrt(f * f - k * k)
        return [1.0 + 0j, -direction * q]

    lo = solve_ivp(rhs, (-span, xp), decaying(-span, -1), rtol=1e-12, atol=1e-14, method="DOP853").y[:, -1]
    lo_at_x = solve_ivp(rhs, (-span, x), decaying(-span, -1), rtol=1e-12, atol=1e-14, method="DOP853").y[:, -1]
    hi = solve_ivp(rhs, (span, x), decaying(span, 1), rtol=1e-12, atol=1e-14, method="DOP853").y[:, -1]
    hi_at_xp = solve_ivp(rhs, (span, xp), decaying(span, 1), rtol=1e-12, atol=1e-14, method="DOP853").y[:, -1]
    wronskian = lo[0] * hi_at_xp[1] - lo[1] * hi_at_xp[0]
    return lo[0] * hi[0] / wronskian


def test_linear_green_matches_wronskian(profiles):
    p = profiles("linear")
    g = analysis.greens(p, 0.4, 0.4, 1j)
    assert g == pytest.approx(_wronskian_green(p, 0.4, 0.4, 1j), abs=1e-5)
    assert g == pytest.approx(-1 / (2 * math.sqrt(2)), abs=1e-10)


def test_asymmetric_potential_green(profiles):
    # V = x^2 + 0.6 x has no mirror symmetry: the two evaluation paths differ
    p = profiles("x^2 + 0.6*x")
    k = 0.5 + 1j
    for x, xp in ((0.7, -0.4), (1.1, 0.9)):
        a = analysis.greens(p, x, xp, k)
        assert a == pytest.approx(analysis.greens(p, xp, x, k), abs=1e-8)
        assert a == pytest.approx(_wronskian_green(p, x, xp, k, span=9.0), abs=1e-6)


def test_green_rejects_half_line(profiles):
    with pytest.raises(analysis.AnalysisError):
        analysis.greens(profiles("sqrt-growth"), -0.5, -1.0, 1j)


def test_fractional_power_leading_term():
    # the leading term of |R_r - 1| is recovered once |k| is small enough
    alpha, x = 0.5, -1.0
    predicted = 2 ** (1 - alpha) * math.gamma((1 - alpha) / 2) / math.gamma((1 + alpha) / 2) * (-x) ** alpha
    for k in (1e-10j, 1e-12):
        ratio = abs(reference.closed_form_rr(7, x, k, alpha=alpha) - 1) / (predicted * abs(k) ** alpha)
        assert ratio == pytest.approx(1, abs=1e-4)
