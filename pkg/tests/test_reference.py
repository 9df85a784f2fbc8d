import cmath
import math

import numpy as np
import pytest

from fpreflect import reference, specfun
from fpreflect.reference import ComplexEnergy, ScatteringTriple


def test_empty_interval(profiles):
    t = reference.finite_interval(profiles("parabolic"), 0.3, 0.3, 1 + 1j)
    assert (t.tau, t.r_r, t.r_l) == (1, 0, 0)


def test_free_propagation(profiles):
    t = reference.finite_interval(profiles("2"), 0.0, 1.0, 1.0)
    assert t.tau == pytest.approx(cmath.exp(1j), abs=1e-10)
    assert abs(t.r_r) < 1e-10 and abs(t.r_l) < 1e-10


def test_long_interval_approaches_semiinfinite(profiles):
    k = 0.5 + 0.5j
    t = reference.finite_interval(profiles("linear"), -8.0, 0.0, k)
    assert abs(t.r_r - (1j * k + cmath.sqrt(1 - k * k))) < 1e-4


@pytest.mark.parametrize("k", [0.3 + 0.4j, 2j, -3 + 0.2j, 0.01 + 0.01j])
def test_linear_exact(profiles, k):
    assert reference.semiinfinite_rr(profiles("linear"), 0.0, k) == pytest.approx(1j * k + cmath.sqrt(1 - k * k), abs=1e-10)


def test_zero_drift_has_no_reflection(profiles):
    assert abs(reference.semiinfinite_rr(profiles("1.5"), 0.2, 0.7 + 0.3j)) < 1e-14


def test_exponential_decay_bessel_form(profiles):
    k = 2j
    nu = 1j * k + 0.5
    z = -0.5j
    want = -1j * complex(specfun.bessel_j(1 - nu, z).value) / complex(specfun.bessel_j(-nu, z).value)
    assert reference.semiinfinite_rr(profiles("exp-decay"), 0.0, k) == pytest.approx(want, rel=1e-9)


def test_closed_form_values():
    assert reference.closed_form_rr(1, 0.0, 2j) == pytest.approx(-2 + math.sqrt(5), rel=1e-14)
    assert reference.closed_form_rr(1, 0.0, 0) == 1
    assert reference.closed_form_rr(4, 0.0, 0) == pytest.approx(-math.tanh(0.5))


@pytest.mark.parametrize("example, name, x", [
    (2, "parabolic", -2.0), (3, "exp-growth", 0.0), (4, "exp-decay", 0.0), (5, "logcosh", -0.5),
    (6, "sqrt-growth", -1.0), (7, "log-growth:0.5", -1.0), (8, "kink", 1.0),
])
@pytest.mark.parametrize("k", [0.4 + 0.3j, 3j, -5 + 1j])
def test_closed_forms_match_ode(profiles, example, name, x, k):
    closed = reference.closed_form_rr(example, x, k)
    ode = reference.semiinfinite_rr(profiles(name, 2), x, k)
    assert abs(closed - ode) <= 1e-8 * abs(closed)


@pytest.mark.parametrize("example, name, x, k", [(3, "exp-growth", 0.0, 0.5j), (2, "parabolic", -2.0, 2.0)])
def test_removable_points(profiles, example, name, x, k):
    closed = reference.closed_form_rr(example, x, k)
    energy = ComplexEnergy(k).with_default_shift(profiles(name, 2))
    ode = reference.semiinfinite_rr(profiles(name, 2), x, energy, richardson=True)
    assert abs(closed - ode) < 1e-5


def test_printed_example8_variant_differs(profiles):
    k = 1.5 + 0.5j
    ode = reference.semiinfinite_rr(profiles("kink", 2), 1.0, k)
    assert abs(reference.closed_form_rr(8, 1.0, k) - ode) < 1e-9
    assert abs(reference.closed_form_rr(8, 1.0, k, variant="printed") - ode) > 1e-3


def test_closed_form_domain_checks():
    with pytest.raises(ValueError):
        reference.closed_form_rr(6, 0.5, 1j)
    with pytest.raises(ValueError):
        reference.closed_form_rr(8, -0.5, 1j)


def test_paths_agree(profiles):
    d = reference.semiinfinite_detail(profiles("logcosh"), 0.3, 1.2 + 0.4j)
    assert d.riccati is not None and d.linear is not None
    assert abs(d.riccati - d.linear) < 1e-9


def test_real_k_on_branch_cut_needs_shift(profiles):
    # constant drift f = 1: real k below the threshold decays, above it oscillates
    assert not ComplexEnergy(0.5).requires_shift(profiles("linear"))
    assert ComplexEnergy(1.5).requires_shift(profiles("linear"))
    assert ComplexEnergy(1.5).with_default_shift(profiles("linear")).epsilon_shift > 0


def test_generalize_identity_and_empty_interval(profiles):
    t = ScatteringTriple(0.3 + 0.1j, -0.2j, 0.4, (0.0, 1.0))
    g = reference.generalize(t, 0.0)
    assert (g.tau_bar, g.r_r_bar, g.r_l_bar) == (t.tau, t.r_r, t.r_l)
    xi = 0.35
    g = reference.generalize(reference.finite_interval(profiles("parabolic"), 0.2, 0.2, 1j), xi)
    assert (g.tau_bar, g.r_r_bar, g.r_l_bar) == pytest.approx((math.sqrt(1 - xi * xi), -xi, xi))


def test_zero_energy_forms(profiles):
    p = profiles("logcosh")
    g = reference.k0_forms(0.5, -1.0, p.eval_V(-1.0), p)
    assert g.tau_bar == 1 and g.r_r_bar == 0
    for W in (-0.5, 1.1):
        want = reference.k0_forms(0.5, -1.0, W, p)
        got = reference.generalize(reference.finite_interval(p, -1.0, 0.5, 0.0), reference.xi_from_W(W, p, 0.5), p)
        assert (got.tau_bar, got.r_r_bar, got.r_l_bar) == pytest.approx((want.tau_bar, want.r_r_bar, want.r_l_bar), abs=1e-10)


@pytest.mark.parametrize("k", [0.7, 2.0, -3.3])
def test_unitarity_at_real_k(profiles, k):
    t = reference.finite_interval(profiles("kink"), -1.0, 2.0, k)
    assert abs(t.r_r) ** 2 + abs(t.tau) ** 2 == pytest.approx(1, abs=1e-9)
    assert abs(t.r_l) ** 2 + abs(t.tau) ** 2 == pytest.approx(1, abs=1e-9)


@pytest.mark.parametrize("k", [1j, 1 + 1j, -2 + 0.3j])
def test_bounds(profiles, k):
    for y, x in ((-2.0, 0.0), (-0.5, 1.5)):
        t = reference.finite_interval(profiles("parabolic"), y, x, k)
        assert abs(t.tau) <= math.exp(-k.imag * (x - y)) * (1 + 1e-10)
        assert abs(t.r_l) <= 1 + 1e-10


def test_sweep_matches_generalized_interval(profiles):
    p = profiles("exp-growth")
    tau, rl = reference.sweep_triple(p, 0.5, -1.0, 1 + 0.5j, 0.3)
    g = reference.generalize(reference.finite_interval(p, -1.0, 0.5, 1 + 0.5j), 0.3)
    assert (tau, rl) == pytest.approx((g.tau_bar, g.r_l_bar), abs=1e-10)


def test_identity_residuals(profiles):
    assert reference.identity_316_residual(profiles("linear"), 0.0, 0.0, 1j) < 1e-6
    assert reference.identity_316_residual(profiles("exp-decay"), 0.0, 0.3, 1 + 1j) < 1e-5
    assert reference.identity_316_residual(profiles("0"), 0.0, 0.4, 0.5 + 0.5j) < 1e-14


def test_truncation_error_for_slow_decay(profiles):
    with pytest.raises(reference.TruncationError):
        reference.semiinfinite_rr(profiles("log-growth:0.5"), -1.0, 1e-7j, max_distance=1e3)
