import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import dblquad

from grushin.errors import DegenerateFamilyError, DivergenceError, ParameterError
from grushin.solver import ModeField
from grushin.vanishing import (
    AngularProfile,
    DiniProfile,
    RadialLaw,
    SeparableField,
    ball_mass,
    critical_exponent,
    dini_check,
    equivalence_report,
    holder_psi_check,
    order_fit,
)

ONE = AngularProfile("sin_power", c=0.0)


def _cyl_integral(f, r=1.0):
    """int_{B_r} f(|z|, t) dz dt for N = 2 in cylindrical coordinates (s = |z|)."""
    # t = t_max(s) sin(theta) removes the square-root edge of the t-range; f is even in t
    def g(theta, s):
        tm = 0.5 * math.sqrt(max(r**4 - s**4, 0.0))
        return 4 * math.pi * s * tm * math.cos(theta) * f(s, tm * math.sin(theta))

    val, _ = dblquad(g, 0, r, 0, math.pi / 2, epsabs=1e-12, epsrel=1e-10)
    return val


def _rho(s, t):
    return (s**4 + 4 * t * t) ** 0.25


def test_unit_function_mass_is_ball_volume():
    u = SeparableField(2, RadialLaw("power", 0.0), ONE)
    assert ball_mass(u, 1.0) == pytest.approx(math.pi**2 / 4, rel=1e-12)
    # the normalized constant mode carries 1/sqrt(|Omega|)
    v = SeparableField(2, RadialLaw("power", 0.0), AngularProfile("mode", (0, 0, 0)), coeff=math.sqrt(4 * math.pi))
    assert ball_mass(v, 1.0) == pytest.approx(math.pi**2 / 4, rel=1e-12)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_power_mass_matches_cylindrical_quadrature(a):
    u = SeparableField(2, RadialLaw("power", a), ONE)
    ref = _cyl_integral(lambda s, t: _rho(s, t) ** (2 * a))
    assert ball_mass(u, 1.0) == pytest.approx(ref, rel=1e-8)
    ref_psi = _cyl_integral(lambda s, t: _rho(s, t) ** (2 * a) * s * s / max(_rho(s, t), 1e-300) ** 2)
    assert ball_mass(u, 1.0, "psi") == pytest.approx(ref_psi, rel=1e-8)


@pytest.mark.parametrize("N", [2, 3])
@pytest.mark.parametrize("a", [1.0, 2.0, 5.0])
def test_order_fit_power(N, a):
    fit = order_fit(SeparableField.power(N, a))
    assert abs(fit.slope - (2 * a + N + 2)) <= 1e-3
    assert not fit.infinite_order
    assert fit.residual <= 1e-8


def test_order_fit_n2_a1_slope_six():
    assert order_fit(SeparableField.power(2, 1.0)).slope == pytest.approx(6.0, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 6.0), st.floats(0.05, 2.0), st.floats(1.01, 4.0), st.sampled_from([2, 3]))
def test_mass_monotone_and_homogeneous(a, r, lam, N):
    u = SeparableField.power(N, a, (2, 0, 0))
    m1, m2 = ball_mass(u, r), ball_mass(u, lam * r)
    assert m2 >= m1
    assert m2 / m1 == pytest.approx(lam ** (2 * a + N + 2), rel=1e-10)


def test_exp_law_infinite_order():
    u = SeparableField(2, RadialLaw("exp", 1.0), AngularProfile("mode", (2, 0, 0)))
    fit = order_fit(u)
    assert fit.infinite_order
    assert all(b > a for a, b in zip(fit.window_slopes, fit.window_slopes[1:]))
    assert fit.window_slopes[-1] > 40


def test_zero_field_flags_infinite_order():
    fit = order_fit(SeparableField.zero(2))
    assert fit.infinite_order and fit.slope is None
    rep = equivalence_report(SeparableField.zero(2))
    assert rep.unweighted.infinite_order and rep.weighted.infinite_order
    assert rep.slope_difference is None
    z = ModeField.power_mode(2, 1.0, (1, 1, 0), coeff=0.0)
    assert order_fit(z).infinite_order


def test_mode_field_agrees_with_separable():
    f = ModeField.power_mode(2, 2.0, (2, 0, 0))
    u = SeparableField.power(2, 2.0, (2, 0, 0))
    for r in (0.25, 1.0):
        assert ball_mass(f, r) == pytest.approx(ball_mass(u, r), rel=1e-10)
        assert ball_mass(f, r, "psi") == pytest.approx(ball_mass(u, r, "psi"), rel=1e-10)


@pytest.mark.parametrize(
    "u",
    [
        SeparableField.power(2, 2.0),
        SeparableField.power(3, 1.0, (3, 1, 0)),
        SeparableField(2, RadialLaw("power", 1.0), AngularProfile("sin_power", c=3.0)),
        SeparableField(3, RadialLaw("exp", 0.5), AngularProfile("mode", (2, 2, 1))),
    ],
)
def test_psi_equivalence(u):
    rep = equivalence_report(u, [2.0**-i for i in range(1, 9)])
    if rep.unweighted.slope is not None and not rep.unweighted.infinite_order:
        assert rep.slope_difference <= 1e-6
    lu = rep.unweighted.log_masses
    lw = rep.weighted.log_masses
    np.testing.assert_allclose(np.subtract(lu, lw), math.log(rep.angular_ratio), atol=1e-9)


def test_sin_power_angular_ratio_closed_form():
    # int sin^6 sin^(-1) dOmega / int sin^6 dOmega with dOmega = sin dphi domega (N = 2)
    u = SeparableField(2, RadialLaw("power", 1.0), AngularProfile("sin_power", c=3.0))
    rep = equivalence_report(u)
    beta = lambda m: math.gamma((m + 1) / 2) * math.gamma(0.5) / math.gamma(m / 2 + 1)
    assert rep.angular_ratio == pytest.approx(beta(6) / beta(7), rel=1e-12)


def test_degenerate_family():
    u = SeparableField(2, RadialLaw("power", 1.0), AngularProfile("zero"))
    with pytest.raises(DegenerateFamilyError):
        equivalence_report(u)


def test_divergence_errors():
    with pytest.raises(DivergenceError):
        ball_mass(SeparableField.power(2, -3.0), 1.0)
    with pytest.raises(DivergenceError):
        ball_mass(SeparableField(2, RadialLaw("power", 1.0), AngularProfile("sin_power", c=-1.5)), 1.0)


def test_holder_example_and_oracle():
    assert critical_exponent(2) == 4.0
    u = SeparableField(2, RadialLaw("power", 1.0), ONE)
    h = holder_psi_check(u, 1.0, 3.0)
    assert h.holds and math.isfinite(h.weight_term)
    assert h.lhs == pytest.approx(_cyl_integral(lambda s, t: _rho(s, t)), rel=1e-8)
    assert h.weight_term == pytest.approx(_cyl_integral(lambda s, t: _rho(s, t) / s), rel=1e-6)
    assert h.weighted_term == pytest.approx(_cyl_integral(lambda s, t: _rho(s, t) ** 3 * s * s / _rho(s, t) ** 2), rel=1e-8)


def test_holder_bump_and_zero():
    bump = SeparableField(2, RadialLaw("bump", 0.8), ONE)
    h = holder_psi_check(bump, 1.0, 3.0)
    assert h.holds and h.ratio < 1
    z = holder_psi_check(SeparableField.zero(2), 1.0, 3.0)
    assert z.lhs == 0.0 and z.rhs == 0.0 and z.holds
    with pytest.raises(ParameterError):
        holder_psi_check(bump, 1.0, 2.0)
    with pytest.raises(ParameterError):
        holder_psi_check(bump, 1.0, 4.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.0, 4.0), st.floats(0.1, 2.0), st.sampled_from([2, 3]))
def test_holder_always_holds(frac, a, r, N):
    q = 2 + (critical_exponent(N) - 2) * frac
    u = SeparableField.power(N, a, (2, 0, 0) if N == 2 else (3, 1, 0))
    assert holder_psi_check(u, r, q).holds


def test_dini_named_families():
    rep = dini_check(DiniProfile("power", 0.5), R0=0.5)
    assert rep.classification == "dini"
    assert rep.value == pytest.approx(0.5**0.5 / 0.5, rel=1e-9)
    rep = dini_check(DiniProfile("log_power", 2.0), R0=0.5)
    assert rep.classification == "dini"
    assert rep.value == pytest.approx(1 / math.log(2), rel=1e-9)
    rep = dini_check(DiniProfile("log_power", 1.0), R0=0.5)
    assert rep.classification == "not_dini"
    assert rep.value == math.inf


def test_dini_slow_log_power():
    rep = dini_check(DiniProfile("log_power", 1.2), R0=0.5)
    assert rep.classification == "dini"
    assert rep.value == pytest.approx(math.log(2) ** -0.2 / 0.2, rel=1e-6)
    assert rep.value == pytest.approx(5.38, abs=5e-3)


def test_dini_input_errors():
    with pytest.raises(ParameterError):
        dini_check(DiniProfile("power", 0.5), R0=1.5)
    with pytest.raises(ParameterError):
        dini_check(DiniProfile("custom", f=lambda r: 1 / r), R0=0.5)
    with pytest.raises(ParameterError):
        DiniProfile("bogus").of_y(1.0)


def test_radii_validation():
    u = SeparableField.power(2, 1.0)
    with pytest.raises(ParameterError):
        order_fit(u, radii=[0.5, 0.25, 0.125])
    with pytest.raises(ParameterError):
        order_fit(u, radii=[1, 0.5, 0.3, 0.2, 0.1, 0.05])
