import math

import pytest
from scipy import integrate

from fpreflect import lowenergy
from fpreflect.lowenergy import BracketSignature, LowEnergyValidityError


def test_signature_parsing():
    assert BracketSignature.parse("--+").signs == (-1, -1, 1)
    assert BracketSignature.parse("pm-") == BracketSignature.parse("±-")
    assert str(BracketSignature.parse("pm-+")) == "±-+"


def test_single_bracket_linear(profiles):
    lin = profiles("linear")
    for x in (-1.0, 0.0, 0.8):
        assert lowenergy.bracket("-", -math.inf, x, lin).value == pytest.approx(math.exp(2 * x) / 2, rel=1e-10)


def test_corrected_third_order_bracket_linear(profiles):
    lin = profiles("linear")
    for x in (-0.5, 0.0, 1.0):
        assert lowenergy.bracket("--+", -math.inf, x, lin).value == pytest.approx(math.exp(2 * x) / 16, rel=1e-9)


@pytest.mark.parametrize("word", ["-", "+-", "-+-", "++-+"])
def test_zero_potential_simplex_volume(profiles, word):
    zero = profiles("0")
    n = len(word)
    got = lowenergy.bracket(word, 0.0, 2.0, zero).value
    assert got == pytest.approx(2.0**n / math.factorial(n), rel=1e-12)


def test_two_level_bracket_against_quadrature(profiles):
    # [-+] for V = x^2 on [-1, 0.5]: independent double quadrature as oracle
    sq = profiles("parabolic")
    want, _ = integrate.dblquad(lambda z2, z1: math.exp(-z1 * z1 + z2 * z2), -1.0, 0.5, lambda z1: z1, lambda z1: 0.5)
    assert lowenergy.bracket("-+", -1.0, 0.5, sq).value == pytest.approx(want, rel=1e-9)


def test_tail_bound_is_reported(profiles):
    v = lowenergy.bracket("-", -math.inf, -2.0, profiles("parabolic"))
    assert 0 <= v.tail_bound < 1e-8
    assert v.z_min < -2.0


def test_divergent_bracket_is_reported(profiles):
    with pytest.raises(lowenergy.BracketDivergenceError):
        lowenergy.bracket("-++", -math.inf, 0.0, profiles("linear"))


def test_c_pm_constants():
    assert lowenergy.c_pm_constant((), "plus") == (2, 1)
    assert lowenergy.c_pm_constant((-1,), "plus") == (4, 2)
    assert lowenergy.c_pm_constant((1, 1), "plus")[0] == 0
    assert lowenergy.c_pm_constant((), "minus") == (-2, -1)
    assert lowenergy.c_pm_constant((1, -1), "minus") == (4, -1)


def test_d_coefficient_first_order():
    for W, V0 in ((0.3, 0.0), (-1.2, 0.5), (2.0, 2.0)):
        want = 0.5 / math.cosh((W - V0) / 2) ** 2
        assert lowenergy.d_coefficient((), W, V0) == pytest.approx(want, rel=1e-14)
    assert lowenergy.d_coefficient((), 0.7, 0.7) == pytest.approx(0.5)


@pytest.mark.parametrize("W, V0", [(0.0, 0.0), (0.9, -0.3), (-1.5, 0.4)])
def test_d_coefficient_second_order(W, V0):
    sech3 = 1 / math.cosh((W - V0) / 2) ** 3
    assert lowenergy.d_coefficient((-1,), W, V0) == pytest.approx(0.5 * sech3 * math.exp((V0 + W) / 2), rel=1e-13)
    assert lowenergy.d_coefficient((1,), W, V0) == pytest.approx(0.5 * sech3 * math.exp(-(V0 + W) / 2), rel=1e-13)


def test_linear_low_coefficients(profiles):
    r = [c.r_at_x for c in lowenergy.low_coeffs(4, 0.3, profiles("linear"))]
    assert r[:4] == pytest.approx([1, 1, 0.5, 0], abs=1e-9)
    assert r[4] == pytest.approx(-0.125, abs=1e-8)


def test_constant_potential_has_vanishing_coefficients(profiles):
    const = profiles("0.7")
    assert [c.r_at_x for c in lowenergy.low_coeffs(3, -0.4, const)] == pytest.approx([0, 0, 0, 0], abs=1e-14)


@pytest.mark.parametrize("x", [-2.0, -1.0, 0.5])
def test_parabola_first_coefficient(profiles, x):
    r1 = lowenergy.low_coeff(1, x, profiles("parabolic")).r_at_x
    assert r1 == pytest.approx(math.sqrt(math.pi) * math.exp(x * x) * math.erfc(-x), rel=1e-8)


def test_partial_sum_linear(profiles):
    got = lowenergy.low_partial_sum(2, 0.0, 0.1, profiles("linear"))
    assert got == pytest.approx(1 + 0.1j - 0.005, abs=1e-10)
    exact = 0.1j + math.sqrt(1 - 0.01)
    assert abs(got - exact) < 1e-4


def test_partial_sum_exponential_decay(profiles):
    for x in (-1.0, 0.0, 0.6):
        got = lowenergy.low_partial_sum(0, x, 0.01j, profiles("exp-decay"))
        assert got == pytest.approx(-math.tanh(math.exp(x) / 2), abs=1e-14)


def test_partial_sum_at_V0_is_zero(profiles):
    # V = exp(x) - 1 + 1: V(x) = V0 never happens; use a bump that returns to V0
    bump = profiles("exp(-x^2)")
    assert lowenergy.low_partial_sum(0, -40.0, 0.01, bump) == pytest.approx(0, abs=1e-12)


def test_describe_terms(profiles):
    cls = profiles("linear").asymptotic_class
    assert lowenergy.describe_terms(3, cls) == "12*exp(3*W)*[---] - 4*exp(W)*[--+]"


def test_validity_rejection(profiles):
    with pytest.raises(LowEnergyValidityError):
        lowenergy.low_coeffs(1, -1.0, profiles("log-growth:0.5"))
