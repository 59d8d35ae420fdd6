import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from decolab.core import DomainError
from decolab.numerics import (EULER, OdeError, OdeSettings, QuadratureSettings, ShootingError,
                              antisymmetric_ei, coth_half, exp_integral_ei, integrate_finite,
                              integrate_semi_infinite, integrate_trig_sum, kappa,
                              kappa1_reduced, kappa_derivative, ode_solve_final,
                              ode_solve_path, shoot_scalar, sine_kernel_h, symmetric_ei,
                              symmetric_ei_direct, thermal_factor, wynn_epsilon)

import oracles

TIGHT = QuadratureSettings(abs_tol=1e-13, rel_tol=1e-12)


# ------------------------------------------------------------ quadrature


def test_exponential():
    r = integrate_semi_infinite(lambda x: np.exp(-x), TIGHT)
    assert r.converged
    assert r.value == pytest.approx(1.0, rel=1e-12)


def test_damped_cosine():
    r = integrate_semi_infinite(lambda x: np.exp(-x) * np.cos(x), TIGHT, period=2 * math.pi)
    assert r.value == pytest.approx(0.5, rel=1e-12)


def _brute_force(f, upper=2000.0, pieces=4000):
    edges = np.linspace(0.0, upper, pieces + 1)
    return math.fsum(quad(f, a, b, epsabs=0, epsrel=1e-13, limit=200)[0]
                     for a, b in zip(edges[:-1], edges[1:]))


def test_lorentzian_cut_cosine_against_closed_form():
    G, t = 10.0, 1.0

    def f(x):
        return (1 - np.cos(t * x)) / (x * x * (1 + x * x / G ** 2))

    closed = 0.5 * math.pi * (t - (1 - math.exp(-G * t)) / G)
    # brute-force oracle: fixed panels up to a cutoff, analytic tail of the mean part
    tail = 0.5 * G * G / 2000.0 ** 3 / 3 * 2  # int_X^inf G^2/x^4 dx, leading order
    brute = _brute_force(lambda x: float(f(x)) if x > 0 else t * t / 2) + tail
    assert brute == pytest.approx(closed, rel=1e-8)

    def full(x):
        return 2 * np.sin(0.5 * t * x) ** 2 / (x * x * (1 + x * x / G ** 2))

    amp = lambda x: 1.0 / (x * x * (1 + x * x / G ** 2))  # noqa: E731
    r = integrate_trig_sum(amp, [(1.0, 0.0, "cos"), (-1.0, t, "cos")], 1.0 / t, TIGHT, full=full)
    assert r.converged
    assert r.value == pytest.approx(closed, rel=1e-11)


def test_slowly_decaying_oscillation():
    # int_0^inf sin x / x = pi/2
    r = integrate_semi_infinite(lambda x: np.sinc(x / math.pi), TIGHT, period=2 * math.pi)
    assert r.value == pytest.approx(math.pi / 2, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(-50.0, 50.0).filter(lambda c: abs(c) > 1e-3))
def test_linearity(c):
    f = lambda x: np.exp(-0.7 * x) * np.cos(3 * x) / (1 + x)  # noqa: E731
    a = integrate_semi_infinite(f, TIGHT, period=2 * math.pi / 3).value
    b = integrate_semi_infinite(lambda x: c * f(x), TIGHT, period=2 * math.pi / 3).value
    assert b / a == pytest.approx(c, rel=1e-12)


def test_budget_exhaustion_is_flagged():
    s = QuadratureSettings(abs_tol=1e-15, rel_tol=1e-15, panel_budget=16)
    r = integrate_semi_infinite(lambda x: 1.0 / (1.0 + x), s)
    assert not r.converged
    assert math.isfinite(r.value)


def test_non_finite_integrand_raises():
    with pytest.raises(Exception):
        integrate_finite(lambda x: np.where(x > 0.5, np.nan, 1.0), 0.0, 1.0)


def test_settings_invariants():
    with pytest.raises(ValueError):
        QuadratureSettings(abs_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSettings(panel_budget=8)


def test_wynn_accelerates_alternating_series():
    sums = np.cumsum([(-1) ** k / (k + 1) for k in range(20)])
    val, err = wynn_epsilon(sums)
    assert val == pytest.approx(math.log(2), abs=1e-9)


# ------------------------------------------------------------ special functions


def test_ei_examples():
    assert exp_integral_ei(1.0) == pytest.approx(1.8951178163559368, rel=1e-14)
    assert exp_integral_ei(-1.0) == pytest.approx(-0.21938393439552026, rel=1e-14)
    assert float(oracles.ei_series(1.0)) == pytest.approx(1.8951178163559368, rel=1e-15)
    assert float(oracles.ei_series(-1.0)) == pytest.approx(-0.21938393439552026, rel=1e-15)


@pytest.mark.parametrize("x", [-50, -31, -12.5, -3, -0.2, -1e-6, 1e-6, 0.3, 2, 9.9, 29, 31, 50])
def test_ei_against_series(x):
    assert exp_integral_ei(x) == pytest.approx(float(oracles.ei_series(x)), rel=1e-12)


def test_ei_small_argument_limit():
    for x in (1e-3, 1e-6, -1e-6):
        assert abs(exp_integral_ei(x) - math.log(abs(x)) - EULER) < 2 * abs(x)


def test_ei_zero_is_domain_error():
    with pytest.raises(DomainError):
        exp_integral_ei(0.0)


def test_symmetric_ei_small_z():
    for z in (1e-2, 1e-3):
        lead = (EULER + math.log(z)) * (1 + z * z / 2) - 0.75 * z * z
        assert abs(symmetric_ei(z) - lead) < 10 * z ** 4 * abs(math.log(z))
    assert abs(symmetric_ei(1e-8) - (EULER + math.log(1e-8))) < 1e-14


def test_symmetric_ei_large_z():
    g = symmetric_ei(50.0)
    assert 0 < g < 1e-3
    assert g == pytest.approx(float(oracles.sym_ei_asymptotic(50.0)), rel=1e-15)
    assert g == pytest.approx(float(oracles.sym_ei(50.0)), rel=1e-13)


def test_symmetric_ei_switchover_continuity():
    for z0 in (2.0, 30.0):
        lo, hi = symmetric_ei(z0 * (1 - 1e-12)), symmetric_ei(z0 * (1 + 1e-12))
        assert abs(hi - lo) <= 1e-10 * abs(lo)
    assert symmetric_ei(30.0) == pytest.approx(symmetric_ei_direct(30.0), rel=1e-10)


def test_symmetric_ei_domain():
    with pytest.raises(DomainError):
        symmetric_ei(0.0)
    with pytest.raises(DomainError):
        symmetric_ei(-1.0)


def test_kappa_small_z():
    z = 1e-3
    approx = 0.5 * z * z * (1.5 - EULER - math.log(z))
    assert kappa(3, z) == pytest.approx(approx, rel=1e-5)


def test_kappa_large_z():
    for z in (20.0, 50.0):
        assert abs(kappa(3, z) - EULER - math.log(z)) < 1.5 / z ** 2


def test_kappa_zero_limits():
    assert kappa(1, 0.0) == 0.0 and kappa(3, 0.0) == 0.0
    assert abs(kappa(1, 1e-8)) < 1e-15 and abs(kappa(3, 1e-8)) < 1e-14


def test_kappa_domain():
    with pytest.raises(DomainError):
        kappa(2, 1.0)
    with pytest.raises(DomainError):
        kappa(3, -1.0)


@pytest.mark.parametrize("n", [1, 3])
def test_kappa_derivative_smooth_across_branches(n):
    for z0 in (2.0, 30.0):
        h = 1e-5 * z0
        fd_lo = (kappa(n, z0) - kappa(n, z0 - h)) / h
        fd_hi = (kappa(n, z0 + h) - kappa(n, z0)) / h
        assert abs(fd_hi - fd_lo) <= 1e-6 * abs(fd_lo) + 4 * h * abs(kappa_derivative(n, 2, z0))


@pytest.mark.parametrize("n", [1, 3])
@pytest.mark.parametrize("z", [1e-2, 0.7, 3.0, 25.0])
def test_kappa_derivative_matches_oracle(n, z):
    import mpmath as mp
    f = lambda x: oracles.kappa(n, x, dps=150)  # noqa: E731
    with mp.workdps(40):
        for order in (1, 2, 4):
            ref = float(mp.diff(f, mp.mpf(z), order, h=mp.mpf("1e-12")))
            assert kappa_derivative(n, order, z) == pytest.approx(ref, rel=1e-9, abs=1e-14)


def test_kappa1_reduced():
    for z in (1e-6, 1e-2, 1.0, 5.0):
        ref = float(oracles.kappa(1, z)) + 0.75 * z * z
        assert kappa1_reduced(z) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("b", [1e-6, 1e-3, 0.4, 1.9, 2.1, 12.0, -0.7])
def test_sine_kernel_h(b):
    assert sine_kernel_h(b) == pytest.approx(float(oracles.sine_h(b)), rel=1e-12)


def test_antisymmetric_ei_is_fourier_sine_transform():
    z = 1.3
    ref = quad(lambda u: 1 / (1 + u * u), 0, np.inf, weight="sin", wvar=z)[0]
    assert antisymmetric_ei(z) == pytest.approx(ref, rel=1e-10)


def test_coth_half():
    assert coth_half(2.0) == pytest.approx((math.e ** 2 + 1) / (math.e ** 2 - 1), rel=1e-15)
    assert coth_half(1e4) == 1.0
    assert coth_half(1e-6) == pytest.approx(2e6, rel=1e-12)
    with pytest.raises(DomainError):
        coth_half(0.0)
    arr = coth_half(np.array([1e-5, 1.0, 50.0]))
    assert arr.shape == (3,)


def test_thermal_factor_zero_temperature():
    assert thermal_factor(3.0, math.inf) == 1.0


# ------------------------------------------------------------ ODE and shooting


def test_ode_exponential_backward():
    y0 = ode_solve_final(lambda t, y: y, math.e, 1.0, 0.0)
    assert y0 == pytest.approx(1.0, rel=1e-9)


def test_ode_linear_exact():
    k = 2.5
    y = ode_solve_final(lambda t, y: k, k * 3.0, 3.0, 0.0)
    assert y == pytest.approx(0.0, abs=1e-12)


def test_ode_stiffish():
    s = OdeSettings(rtol=1e-10, atol=1e-14)
    y = ode_solve_final(lambda t, y: 50.0 * y, 1.0, 0.0, 0.2, s)
    assert y == pytest.approx(math.exp(10.0), rel=1e-8)


def test_ode_round_trip():
    s = OdeSettings(rtol=1e-10, atol=1e-12)
    rhs = lambda t, y: -np.sin(y) + 0.3 * t  # noqa: E731
    y1 = ode_solve_final(rhs, 0.4, 0.0, 2.0, s)
    back = ode_solve_final(rhs, y1, 2.0, 0.0, s)
    assert back == pytest.approx(0.4, abs=10 * 1e-10 * 1.0 + 1e-11)


def test_ode_path():
    ys = ode_solve_path(lambda t, y: y, math.e, 1.0, [0.0, 0.5, 1.0])
    assert np.allclose(ys[:, 0], np.exp([0.0, 0.5, 1.0]), rtol=1e-9)


def test_ode_errors():
    with pytest.raises(OdeError):
        ode_solve_final(lambda t, y: np.nan, 1.0, 1.0, 0.0)
    with pytest.raises(OdeError):
        ode_solve_final(lambda t, y: np.cos(1e3 * t), 0.0, 100.0, 0.0, OdeSettings(max_steps=5))
    with pytest.raises(ValueError):
        OdeSettings(rtol=0.0)


def test_shooting_examples():
    assert shoot_scalar(lambda x: x * x - 2, (1, 2), 1e-14) == pytest.approx(math.sqrt(2), abs=1e-13)
    assert shoot_scalar(lambda x: x - 0.3, (0, 1)) == pytest.approx(0.3, abs=1e-12)
    assert shoot_scalar(lambda x: x - 1.0, (0, 1)) == 1.0
    with pytest.raises(ShootingError):
        shoot_scalar(lambda x: x * x + 1, (-1, 1))
