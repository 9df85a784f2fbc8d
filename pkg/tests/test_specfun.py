import cmath
import math

import mpmath
import pytest

from fpreflect import specfun


def test_gamma_values():
    assert specfun.gamma_c(1) == pytest.approx(1, rel=1e-15)
    assert specfun.gamma_c(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert abs(specfun.gamma_c(1 + 1j)) == pytest.approx(math.sqrt(math.pi / math.sinh(math.pi)), rel=1e-13)


def test_gamma_pole():
    with pytest.raises(specfun.SpecialFunctionError):
        specfun.gamma_c(-2)


@pytest.mark.parametrize("z", [0.7, 3 + 4j, -2.5 + 0.1j, 40j, 0.1 - 7j])
def test_loggamma_against_mpmath(z):
    with mpmath.workdps(40):
        got = mpmath.exp(specfun.loggamma_mp(z))
        want = mpmath.gamma(z)
        assert abs(got - want) / abs(want) < mpmath.mpf(10) ** -35


def test_hyp1f1_identities():
    assert complex(specfun.hyp1f1(0.3, 1.7, 0).value) == 1
    r = specfun.hyp1f1(1, 1, 1)
    assert r.converged
    assert complex(r.value) == pytest.approx(math.e, rel=1e-15)


@pytest.mark.parametrize("a, c, z", [(0.3 + 2j, 1.5, 4.0), (-25j, 0.5, 4.0), (1 - 2500j, 1.5, 4.0)])
def test_hyp1f1_against_mpmath(a, c, z):
    got = specfun.hyp1f1(a, c, z, dps=25).value
    with mpmath.workdps(40):
        want = mpmath.hyp1f1(a, c, z)
        assert abs(got - want) <= mpmath.mpf(10) ** -22 * max(1, abs(want))


def test_hyp2f1_binomial():
    assert complex(specfun.hyp2f1(1, 0.7, 0.7, 0.5).value) == pytest.approx(2, rel=1e-15)


def test_hyp2f1_domain():
    with pytest.raises(specfun.SpecialFunctionError):
        specfun.hyp2f1(1, 1, 2, 0.95)


def test_bessel_values():
    assert complex(specfun.bessel_j(0, 0).value) == 1
    want = math.sqrt(2 / (math.pi * 2)) * math.sin(2)
    assert complex(specfun.bessel_j(0.5, 2).value) == pytest.approx(want, rel=1e-14)
    assert want == pytest.approx(0.5130161, abs=1e-7)


@pytest.mark.parametrize("nu, z", [(0.5 + 3j, -0.5j), (-0.5 - 3j, -0.5j), (0.75, 30j), (2.5 + 1j, 12 - 3j)])
def test_bessel_against_mpmath(nu, z):
    got = complex(specfun.bessel_j(nu, z).value)
    want = complex(mpmath.besselj(nu, z))
    assert abs(got - want) <= 1e-13 * abs(want)


def test_real_aux():
    assert specfun.real_aux("erfc", 0.0) == 1.0
    assert specfun.real_aux("Shi", 0.0) == 0.0
    assert specfun.real_aux("Ei", -1.0) == pytest.approx(-0.21938393439552, rel=1e-12)
    assert specfun.real_aux("Ei", 2.5) == pytest.approx(float(mpmath.ei(2.5)), rel=1e-13)
    assert specfun.real_aux("Shi", 1.5) == pytest.approx(float(mpmath.shi(1.5)), rel=1e-13)
