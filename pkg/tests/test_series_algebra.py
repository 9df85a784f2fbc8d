from fractions import Fraction

import pytest

from fpreflect import series_algebra as sa
from fpreflect.potential import build_profile, parse_potential
from fpreflect.series_algebra import DiffPolynomial, MissingDerivativeError, XiPolynomial

f = DiffPolynomial.deriv(0)
fp = DiffPolynomial.deriv(1)
fpp = DiffPolynomial.deriv(2)
fppp = DiffPolynomial.deriv(3)


def test_M_of_f():
    assert sa.apply_M(XiPolynomial([f])) == XiPolynomial([fp, -(f * f)])
    assert sa.ctilde(2) == XiPolynomial([-fp, f * f])


def test_M_is_linear_at_zero():
    assert sa.apply_M(XiPolynomial([])) == XiPolynomial([])


def test_M_squared():
    want = XiPolynomial([fpp - f * f * f, f * fp * -2, f * f * f])
    assert sa.apply_M(sa.apply_M(XiPolynomial([f]))) == want


def test_ctilde_4():
    want = XiPolynomial([
        -fppp + f * f * fp * 5,
        -(f * f * f * f * 2 - fp * fp - f * fpp * 2),
        f * f * fp * -3,
        f * f * f * f,
    ])
    assert sa.ctilde(4) == want


def test_c4_string_form():
    assert str(sa.high_coeffs(4)[-1][1]) == "-f''' + 5*f^2*f'"
    assert str(sa.high_coeffs(1)[0][1]) == "-f"
    assert sa.high_coeffs(1)[0][0].degree == 0


def test_remainder_kernel_goldens():
    K0, h0 = sa.remainder_kernel(0)
    assert h0 == [f]
    _, h2 = sa.remainder_kernel(2)
    assert h2 == [fpp - f * f * f, f * fp * -4, f * f * f * 3]
    _, h3 = sa.remainder_kernel(3)
    assert h3[1] == f * f * f * f * 4 - fp * fp * 2 - f * fpp * 4


def test_weights_are_homogeneous():
    for n in range(1, 9):
        c = sa.high_coeffs(n)[-1][1]
        assert c.weights() <= {n}
        for j, a in enumerate(sa.ctilde(n).coeffs):
            assert a.is_zero() or a.weights() == {n}


def test_no_zero_coefficients_are_stored():
    p = f * fp - f * fp + f
    assert p.terms == {(1,): Fraction(1)}


def test_evaluate_constant_drift():
    lin = build_profile(parse_potential("-2*x"), 4)
    assert sa.evaluate(sa.high_coeffs(3)[-1][1], lin, 0.4) == pytest.approx(1.0)


def test_evaluate_zero_drift():
    zero = build_profile(parse_potential("0"), 6)
    for n in range(1, 6):
        assert sa.evaluate(sa.high_coeffs(n)[-1][1], zero, 1.3) == 0


def test_evaluate_c4_on_parabola():
    sq = build_profile(parse_potential("x^2"), 4)
    assert sa.evaluate(sa.high_coeffs(4)[-1][1], sq, 1.0) == pytest.approx(-5.0)


def test_missing_derivative_is_reported():
    with pytest.raises(MissingDerivativeError):
        sa.high_coeffs(5)[-1][1].evaluate([1.0, 0.0])


def test_cbar():
    assert sa.cbar(0) == XiPolynomial([DiffPolynomial(), DiffPolynomial.constant(-1)])
    assert sa.cbar(1) == XiPolynomial([-f, DiffPolynomial(), f])


def test_json_round_trip():
    c = sa.high_coeffs(6)[-1][1]
    assert DiffPolynomial.from_json(c.to_json()) == c
