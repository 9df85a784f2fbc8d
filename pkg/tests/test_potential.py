import math

import pytest

from fpreflect.potential import (
    AsymptoticClass,
    DifferentiabilityError,
    ExpressionError,
    build_profile,
    catalog,
    classify_asymptotics,
    parse_potential,
    schrodinger_potential,
)


def test_parse_linear():
    p = build_profile(parse_potential("-2*x"), 2)
    assert p.eval_V(1.0) == -2.0
    assert p.eval_f(0.3) == pytest.approx(1.0)


def test_parse_zero_potential():
    p = build_profile(parse_potential("0"), 3)
    assert p.eval_V(4.2) == 0.0
    assert all(v == 0 for v in p.f_derivs(-1.3, 3))


def test_parse_square():
    p = build_profile(parse_potential("x^2"), 2)
    assert p.eval_V(2.0) == 4.0
    assert p.eval_f(2.0) == -2.0


def test_power_binds_tighter_than_unary_minus():
    p = build_profile(parse_potential("-x^2"), 1)
    assert p.eval_V(3.0) == -9.0


@pytest.mark.parametrize("text", ["x^", "2**x", "foo(x)", "x^x", "(x", "exp x"])
def test_rejects_bad_expressions(text):
    with pytest.raises(ExpressionError):
        parse_potential(text)


def test_exponential_drift_at_origin():
    p = build_profile(catalog("exp-growth"), 2)
    assert p.eval_f(0.0) == pytest.approx(0.5, rel=1e-15)


def test_constant_potential_has_vanishing_fifth_derivative():
    p = build_profile(parse_potential("3"), 5)
    assert all(p.eval_f_deriv(x, 5) == 0 for x in (-4.0, 0.0, 2.5))


def test_logcosh_drift():
    p = build_profile(parse_potential("2*log(cosh(x))"), 1)
    assert p.eval_f(-0.5) == pytest.approx(math.tanh(0.5), rel=1e-14)
    assert p.eval_f(-0.5) == pytest.approx(0.4621, abs=1e-4)


@pytest.mark.parametrize("name", ["parabolic", "exp-growth", "logcosh", "sqrt-growth", "log-growth:0.5"])
def test_drift_matches_finite_difference(name):
    p = build_profile(catalog(name), 2)
    h = 1e-5
    for x in (-3.1, -1.7, -0.4):
        fd = -(p.eval_V(x + h) - p.eval_V(x - h)) / (4 * h)
        assert p.eval_f(x) == pytest.approx(fd, rel=1e-8)
        assert p.eval_f_deriv(x, 0) == p.eval_f(x)


def test_schrodinger_potential_examples():
    assert schrodinger_potential(build_profile(parse_potential("-2*x"), 1), 0.7) == pytest.approx(1.0)
    assert schrodinger_potential(build_profile(parse_potential("5"), 1), 0.7) == 0.0
    sq = build_profile(parse_potential("x^2"), 1)
    for x in (-2.0, 0.5):
        assert schrodinger_potential(sq, x) == pytest.approx(x * x - 1)


@pytest.mark.parametrize(
    "source, want",
    [
        ("exp(-x)", ("plus_infinity", "plus_infinity", "exponential_or_faster")),
        ("exp(x)", ("finite", "zero", "exponential_decay")),
        ("sqrt(-x)", ("plus_infinity", "zero", "sublinear_superlog")),
        ("-2*x", ("plus_infinity", "nonzero", "linear")),
        ("x^2", ("plus_infinity", "plus_infinity", "superlinear")),
        ("exp(-x^2)", ("finite", "zero", "exponential_decay")),
        ("1/(1+x^2)", ("finite", "zero", "power_decay_or_slower")),
        ("0.5*log(-x)", ("plus_infinity", "zero", "logarithmic_or_slower")),
    ],
)
def test_sampled_classification(source, want):
    domain = 0.0 if "log(-x)" in source or "sqrt(-x)" in source else math.inf
    cls = classify_asymptotics(parse_potential(source, domain), sample=True)
    assert (cls.v_limit, cls.f_limit, cls.growth_tag) == want


@pytest.mark.parametrize("name", ["linear", "parabolic", "exp-growth", "exp-decay", "logcosh", "sqrt-growth", "log-growth:0.5", "kink"])
def test_catalog_classification_is_reproduced_by_sampling(name):
    spec = catalog(name)
    stored = spec.classification
    sampled = classify_asymptotics(spec, sample=True)
    assert (sampled.v_limit, sampled.f_limit, sampled.growth_tag) == (stored.v_limit, stored.f_limit, stored.growth_tag)


def test_class_invariants():
    with pytest.raises(ValueError):
        AsymptoticClass("finite", "nonzero", "exponential_decay", v0=0.0)
    with pytest.raises(ValueError):
        AsymptoticClass("plus_infinity", "plus_infinity", "linear")


def test_kink_breakpoint_needs_a_side():
    p = build_profile(catalog("kink"), 2)
    assert p.breakpoints == (0.0,)
    assert p.eval_f(0.0, side="left") == pytest.approx(0.5)
    assert p.eval_f(0.0, side="right") == pytest.approx(0.5)
    assert p.eval_f_deriv(0.0, 1, side="left") == pytest.approx(-0.5)
    assert p.eval_f_deriv(0.0, 1, side="right") == 0.0
    with pytest.raises(DifferentiabilityError):
        p.f_derivs(0.0, 1)


def test_mirror_of_half_line_potential_is_rejected():
    from fpreflect.potential import DomainError

    with pytest.raises(DomainError):
        catalog("sqrt-growth").mirrored()
