import math

import numpy as np
import pytest
from scipy.integrate import quad

from decolab.core import CouplingProfile, DomainError
from decolab.field import (DampedPropagatorSpec, DensityGrid, closed_form_report,
                           decoherence_DL_highT, decoherence_DL_numeric, decoherence_DL_zeroT,
                           dipole_kernels, eta_moment, evolve_master, local_eta_moment,
                           make_field_spec, master_coefficients, overdamped_Vn_Vd, plate_power,
                           propagators_damped, propagators_free, report_json)
from decolab.numerics import QuadratureError

import oracles


# ------------------------------------------------------------ oracle for the D_L integrals


def quadpack_DL(n, g, T, G, t, L):
    """Field decoherence integral via QUADPACK: head on [0, c] plus Fourier-weighted tails."""
    def th(k):
        return 1.0 if T == 0 else 1.0 / math.tanh(k / (2 * T))

    power = 3 if n == 1 else 1
    amp = lambda k: G * G / (k * k + G * G) * th(k) / k ** power  # noqa: E731
    if n == 1:
        full = lambda k: amp(k) * math.sin(0.5 * k * t) ** 2 * (1 - math.cos(k * L))  # noqa: E731
        terms = [(0.5, 0.0, "cos", amp), (-0.5, t, "cos", amp), (-0.5, L, "cos", amp),
                 (0.25, t + L, "cos", amp), (0.25, abs(t - L), "cos", amp)]
        pref = 2 * g * g / math.pi
    else:
        def full(k):
            x = k * L
            sd = x * x / 6 - x ** 4 / 120 if x < 1e-3 else 1 - math.sin(x) / x
            return amp(k) * math.sin(0.5 * k * t) ** 2 * sd
        sub = lambda k: amp(k) / (k * L)  # noqa: E731
        terms = [(0.5, 0.0, "cos", amp), (-0.5, t, "cos", amp), (-0.5, L, "sin", sub),
                 (0.25, L + t, "sin", sub), (0.25 * math.copysign(1, L - t), abs(L - t), "sin", sub)]
        pref = g * g / math.pi ** 2
    c = 50.0 / max(t, L)
    val = quad(full, 0, c, epsabs=0, epsrel=1e-13, limit=1000)[0]
    for coef, w, kind, f in terms:
        if w == 0 and kind == "sin":
            continue
        if w == 0:
            val += coef * quad(f, c, np.inf, epsabs=0, epsrel=1e-13, limit=500)[0]
        elif coef != 0:
            val += coef * quad(f, c, np.inf, weight=kind, wvar=w, epsabs=1e-16, limlst=200)[0]
    return pref * val


CASES = [(1, 0.0), (1, 0.7), (3, 0.0), (3, 0.7)]
POINTS = [(0.5, 2.0), (2.0, 2.0), (3.0, 0.7), (7.0, 10.0), (0.05, 0.3)]


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("n,T", CASES)
@pytest.mark.parametrize("t,L", POINTS)
def test_numeric_DL_against_quadpack(n, T, t, L):
    fs = make_field_spec(n, 0.8, T=T, Gamma=1.3)
    ref = quadpack_DL(n, 0.8, T, 1.3, t, L)
    assert decoherence_DL_numeric(fs, t, L) == pytest.approx(ref, rel=1e-7)


def test_numeric_trivial_zeros():
    fs = make_field_spec(3, 1.0, T=1.0)
    assert decoherence_DL_numeric(fs, 0.0, 2.0) == 0.0
    assert decoherence_DL_numeric(fs, 2.0, 0.0) == 0.0
    with pytest.raises(DomainError):
        decoherence_DL_numeric(fs, -1.0, 1.0)


@pytest.mark.parametrize("T", [0.0, 2.0])
def test_numeric_n1_symmetric(T):
    fs = make_field_spec(1, 1.0, T=T)
    for t, L in [(0.3, 2.0), (1.0, 5.0), (4.0, 0.01)]:
        assert decoherence_DL_numeric(fs, t, L) == pytest.approx(decoherence_DL_numeric(fs, L, t), rel=1e-9)


def test_numeric_highT_n3_at_two_two():
    fs = make_field_spec(3, 1.0, T=50.0)
    num = decoherence_DL_numeric(fs, 2.0, 2.0, thermal="classical")
    assert decoherence_DL_highT(fs, 2.0, 2.0) == pytest.approx(num, rel=1e-9)
    # exact coth approaches the classical form at T >> Gamma
    exact = decoherence_DL_numeric(make_field_spec(3, 1.0, T=1e4), 2.0, 2.0)
    assert exact / 1e4 == pytest.approx(num / 50.0, rel=1e-4)


# ------------------------------------------------------------ closed forms


@pytest.mark.parametrize("n", [1, 3])
def test_highT_branch_continuity(n):
    fs = make_field_spec(n, 1.0, T=3.0)
    for x in (0.2, 1.0, 6.0):
        lo = decoherence_DL_highT(fs, x * (1 - 1e-12), x)
        hi = decoherence_DL_highT(fs, x * (1 + 1e-12), x)
        assert hi == pytest.approx(lo, rel=1e-9)


@pytest.mark.parametrize("n", [1, 3])
def test_highT_zeros_and_symmetry(n):
    fs = make_field_spec(n, 1.0, T=3.0)
    assert decoherence_DL_highT(fs, 0.0, 2.0) == 0.0 and decoherence_DL_highT(fs, 2.0, 0.0) == 0.0
    # the printed forms are symmetric; for n = 1 the quadrature-validated form is too
    for t, L in [(0.5, 3.0), (2.0, 9.0), (1e-3, 0.5)]:
        a = decoherence_DL_highT(fs, t, L, printed=True)
        assert a == pytest.approx(decoherence_DL_highT(fs, L, t, printed=True), rel=1e-12)
        if n == 1:
            assert decoherence_DL_highT(fs, t, L) == pytest.approx(decoherence_DL_highT(fs, L, t), rel=1e-12)


def test_n3_integral_is_not_symmetric():
    fs = make_field_spec(3, 1.0, T=3.0)
    a = decoherence_DL_numeric(fs, 0.5, 3.0, thermal="classical")
    b = decoherence_DL_numeric(fs, 3.0, 0.5, thermal="classical")
    assert abs(a - b) / max(a, b) > 0.01
    rep = closed_form_report(fs, "highT", [0.5, 3.0])
    assert rep["numeric_t_L_asymmetry_rel"] > 0.01


@pytest.mark.parametrize("n", [1, 3])
@pytest.mark.parametrize("t,L", [(0.5, 3.0), (4.0, 1.2), (3.0, 3.0), (1e-4, 2.0), (2.0, 1e-4)])
def test_highT_against_classical_quadrature(n, t, L):
    fs = make_field_spec(n, 1.0, T=2.0, Gamma=1.7)
    num = decoherence_DL_numeric(fs, t, L, thermal="classical")
    assert decoherence_DL_highT(fs, t, L) == pytest.approx(num, rel=1e-8)


@pytest.mark.parametrize("n", [1, 3])
def test_zeroT_zeros_and_symmetry(n):
    fs = make_field_spec(n, 1.0, T=0.0)
    assert decoherence_DL_zeroT(fs, 2.0, 0.0) == 0.0
    assert decoherence_DL_zeroT(fs, 0.0, 2.0) == 0.0
    assert decoherence_DL_zeroT(fs, 1.5, 1.5) > 0
    if n == 1:
        assert decoherence_DL_zeroT(fs, 0.4, 3.0) == pytest.approx(decoherence_DL_zeroT(fs, 3.0, 0.4), rel=1e-12)


def zeroT_oracle(n, u, v):
    """Extended-precision evaluation of the zero-temperature closed forms."""
    import mpmath as mp
    with mp.workdps(60):
        if n == 1:
            k = lambda z: 0 if z == 0 else oracles.kappa(1, z, 120)  # noqa: E731
            val = k(u) + k(v) - k(u + v) / 2 - k(abs(u - v)) / 2
            return float(val / mp.pi)
        h = lambda z: 0 if z == 0 else oracles.sine_h(z, 120)  # noqa: E731
        val = oracles.kappa(3, u, 120) - (h(v) - h(v + u) / 2 - h(v - u) / 2) / mp.mpf(v)
        return float(val / (2 * mp.pi ** 2))


@pytest.mark.parametrize("n", [1, 3])
@pytest.mark.parametrize("u,v", [(1e-5, 2.0), (2.0, 1e-5), (0.3, 0.3), (1.0, 7.0), (9.0, 2.5), (40.0, 0.5)])
def test_zeroT_against_extended_precision(n, u, v):
    fs = make_field_spec(n, 1.0, T=0.0)
    assert decoherence_DL_zeroT(fs, u, v) == pytest.approx(zeroT_oracle(n, u, v), rel=1e-12)


@pytest.mark.parametrize("n", [1, 3])
@pytest.mark.parametrize("t,L", [(0.5, 3.0), (4.0, 1.2), (3.0, 3.0), (0.01, 2.0), (2.0, 0.01)])
def test_zeroT_against_quadrature(n, t, L):
    fs = make_field_spec(n, 1.0, T=0.0)
    assert decoherence_DL_zeroT(fs, t, L) == pytest.approx(decoherence_DL_numeric(fs, t, L), rel=1e-8)


def test_zeroT_n3_saturates_in_L():
    fs = make_field_spec(3, 1.0, T=0.0)
    vals = [decoherence_DL_zeroT(fs, 2.0, L) for L in (50.0, 100.0, 200.0, 400.0)]
    steps = np.abs(np.diff(vals))
    assert np.all(steps[1:] < 0.6 * steps[:-1])
    assert steps[-1] / vals[-1] < 5e-3


def test_closed_form_report_shape():
    rep = closed_form_report(make_field_spec(3, 1.0, T=10.0), "highT", [0.5, 2.0, 5.0])
    assert rep["grid_points"] == 9
    assert rep["corrected_ok"] and not rep["printed_ok"]
    assert '"case": "highT"' in report_json([rep])


@pytest.mark.parametrize("n", [1, 3])
@pytest.mark.parametrize("T", [0.0, 100.0])
def test_DL_monotone_on_fig2_grid(n, T):
    """D_L >= 0 and non-decreasing in t and in L on Gamma t, Gamma L in [0, 10]."""
    fs = make_field_spec(n, 1.0, T=T)
    f = decoherence_DL_zeroT if T == 0 else decoherence_DL_highT
    g = np.linspace(0.0, 10.0, 41)
    D = np.array([[f(fs, a, b) for b in g] for a in g])
    tol = 1e-12 * D.max()
    assert D.min() >= 0
    assert np.all(np.diff(D, axis=1) >= -tol), "decreasing in L"
    assert np.all(np.diff(D, axis=0) >= -tol), "decreasing in t"


# ------------------------------------------------------------ propagators and kernels


def test_free_propagators():
    gr, gh = propagators_free(2.0, 0.0, math.inf)
    assert gr == 0.0 and gh == pytest.approx(0.25)
    beta = 1e-3
    k, dt = 0.7, 0.4
    ser = 2 / (beta * k) + beta * k / 6 - (beta * k) ** 3 / 360
    assert propagators_free(k, dt, beta)[1] == pytest.approx(math.cos(k * dt) * ser / (2 * k), rel=1e-12)
    with pytest.raises(DomainError):
        propagators_free(0.0, 1.0, 1.0)


def test_damped_reduces_to_free():
    p = DampedPropagatorSpec.constant_damping(0.0, 2.0)
    k = np.array([0.3, 1.0, 4.0])
    for dt in (-0.7, 0.0, 1.3):
        a, b = propagators_damped(p, k, dt), propagators_free(k, dt, 2.0)
        assert np.allclose(a[0], b[0], rtol=1e-13, atol=1e-15)
        assert np.allclose(a[1], b[1], rtol=1e-13, atol=1e-15)


def test_damped_parity():
    p = DampedPropagatorSpec.constant_damping(0.4, 1.5, mass=0.3)
    k = np.array([0.2, 2.0])
    gr1, gh1 = propagators_damped(p, k, 0.9)
    gr2, gh2 = propagators_damped(p, k, -0.9)
    assert np.allclose(gr1, -gr2) and np.allclose(gh1, gh2)


def test_damped_degenerate_denominator():
    # cosh(beta w) - cos(beta Lambda) vanishes as w -> 0 with beta Lambda = 2 pi
    p = DampedPropagatorSpec(lambda k: np.asarray(k, float), lambda k: 2 * math.pi + 0 * np.asarray(k, float), 1.0)
    with pytest.raises(DomainError, match="degenerate"):
        propagators_damped(p, 1e-7, 0.3)


def test_overdamped_time_concentration():
    Lam, k, beta = 50.0, 1.0, 1.0
    p = DampedPropagatorSpec.constant_damping(Lam, beta)
    for idx in (0, 1):
        g = lambda s: abs(propagators_damped(p, k, s)[idx])  # noqa: E731
        inner = quad(g, 0, 3 / Lam, limit=200)[0]
        total = inner + quad(g, 3 / Lam, 60 / Lam, limit=200)[0]
        assert inner / total >= 0.99, f"{'G_r' if idx == 0 else 'G_h'} mass fraction {inner / total:.4f}"


def test_dipole_kernel_parity_and_eta_zero():
    fs = make_field_spec(3, 1.0, T=1.0, window=CouplingProfile.gaussian(1.0, role="spectral"))
    assert dipole_kernels(fs, 0.0)[0] == 0.0
    e1, n1 = dipole_kernels(fs, 0.8)
    e2, n2 = dipole_kernels(fs, -0.8)
    assert e1 == -e2 and n1 == n2


def test_nu_zero_lorentzian_diverges():
    fs = make_field_spec(1, 1.0, T=0.0)
    with pytest.raises(QuadratureError):
        dipole_kernels(fs, 0.0)


@pytest.mark.parametrize("n", [1, 3])
def test_nu_zero_gaussian_against_closed_form(n):
    a = 0.7
    fs = make_field_spec(n, 1.3, T=0.0, window=CouplingProfile.gaussian(a, role="spectral"))
    nu0 = dipole_kernels(fs, 0.0)[1]
    f2 = lambda k: float(CouplingProfile.gaussian(a, role="spectral")(k))  # noqa: E731
    meas = 1 / math.pi if n == 1 else 1 / (2 * math.pi ** 2)
    ref = 1.3 ** 2 / (2 * n) * meas * quad(lambda k: k ** n * f2(k) / 2, 0, np.inf, epsrel=1e-13)[0]
    assert nu0 == pytest.approx(ref, rel=1e-9)


def test_local_limit_improves_with_damping():
    fs = make_field_spec(1, 1.0, T=1.0, window=CouplingProfile.gaussian(1.0, role="spectral"))
    errs = []
    for Lam in (5.0, 10.0, 20.0):
        p = DampedPropagatorSpec.constant_damping(Lam, 1.0)
        num = eta_moment(fs, p, 12.0 / Lam, 401)
        loc = local_eta_moment(fs, p)
        errs.append(abs(num - loc) / abs(loc))
    assert errs[0] > errs[1] > errs[2]


# ------------------------------------------------------------ V_n, V_d


@pytest.fixture(scope="module")
def overdamped():
    fs = make_field_spec(1, 1.0, T=1.0, window=CouplingProfile.gaussian(0.5, role="spectral"))
    return fs, DampedPropagatorSpec.constant_damping(3.0, 0.5)


def test_vn_small_r(overdamped):
    fs, p = overdamped
    assert overdamped_Vn_Vd(fs, p, 0.0)[0] == 0.0
    r1, r2 = 1e-3, 2e-3
    assert overdamped_Vn_Vd(fs, p, r2)[0] / overdamped_Vn_Vd(fs, p, r1)[0] == pytest.approx(4.0, rel=1e-3)


def test_vn_vd_large_r(overdamped):
    fs, p = overdamped
    vn_a, vd_a = overdamped_Vn_Vd(fs, p, 50.0)
    vn_b, vd_b = overdamped_Vn_Vd(fs, p, 100.0)
    assert vn_a > 0 and vn_b == pytest.approx(vn_a, rel=1e-6)
    vd0 = overdamped_Vn_Vd(fs, p, 0.0)[1]
    assert abs(vd_b) < 1e-3 * abs(vd0)


def test_vd_finite_at_origin_quadratic_approach(overdamped):
    fs, p = overdamped
    vd0 = overdamped_Vn_Vd(fs, p, 0.0)[1]
    d1 = overdamped_Vn_Vd(fs, p, 0.01)[1] - vd0
    d2 = overdamped_Vn_Vd(fs, p, 0.02)[1] - vd0
    assert math.isfinite(vd0) and vd0 > 0
    assert d2 / d1 == pytest.approx(4.0, rel=1e-2)


@pytest.mark.parametrize("n", [1, 3])
def test_vn_vd_against_scipy(n):
    fs = make_field_spec(n, 1.0, T=1.0, window=CouplingProfile.gaussian(0.5, role="spectral"))
    p = DampedPropagatorSpec.constant_damping(3.0, 0.5)
    f2 = lambda k: math.exp(-k * k / (2 * 0.5))  # noqa: E731
    r = 1.7
    meas = 1 / math.pi if n == 1 else 1 / (2 * math.pi ** 2)

    def th(k):
        return math.sinh(0.5 * k) / (math.cosh(0.5 * k) - math.cos(1.5))

    if n == 1:
        an = lambda k: 1 - math.cos(k * r)  # noqa: E731
        ad = lambda k: k * r * math.sin(k * r)  # noqa: E731
    else:
        an = lambda k: 1 - math.sin(k * r) / (k * r)  # noqa: E731
        ad = lambda k: math.sin(k * r) / (k * r) - math.cos(k * r)  # noqa: E731
    vn = 0.5 * meas * quad(lambda k: k ** (n - 1) * f2(k) * th(k) / (3.0 * k) * an(k), 0, 40, limit=400, epsrel=1e-13)[0]
    vd = 0.5 * meas / r ** 2 * quad(lambda k: k ** (n - 1) * f2(k) / 27.0 * ad(k), 0, 40, limit=400, epsrel=1e-13)[0]
    got = overdamped_Vn_Vd(fs, p, r)
    assert got[0] == pytest.approx(vn, rel=1e-9)
    assert got[1] == pytest.approx(vd, rel=1e-9)


# ------------------------------------------------------------ master equation


def packet_grid(n=64, L=8.0):
    x = np.linspace(-L / 2, L / 2, n)
    psi1 = np.exp(-(x - 1.2) ** 2)
    psi2 = np.exp(-(x + 1.2) ** 2)
    return DensityGrid.from_wavefunctions(x, [psi1 + psi2])


def test_master_pure_decoherence(overdamped):
    fs, p = overdamped
    g = packet_grid()
    c = master_coefficients(fs, p, g.step, g.n).without_dissipation()
    out = evolve_master(g, c, 0.01, 200, hamiltonian="none")
    idx = np.abs(np.arange(g.n)[:, None] - np.arange(g.n)[None, :])
    ref = g.values * np.exp(-c.vn[idx] * 2.0)
    assert np.max(np.abs(out.values - ref)) < 1e-8
    assert np.allclose(np.diag(out.values), np.diag(g.values), rtol=0, atol=1e-15)


def test_master_full_evolution(overdamped):
    fs, p = overdamped
    g = packet_grid()
    c = master_coefficients(fs, p, g.step, g.n)
    mon = []
    out = evolve_master(g, c, 0.002, 250, hamiltonian="harmonic", Omega=1.0, monitor=mon)
    assert out.hermiticity_error() < 1e-8
    drift = max(abs(m - g.trace()) for m in mon)
    assert drift / out.time < 1e-6
    assert out.time == pytest.approx(0.5)


def test_master_stability_rejected(overdamped):
    fs, p = overdamped
    g = packet_grid()
    c = master_coefficients(fs, p, g.step, g.n)
    with pytest.raises(DomainError, match="time step"):
        evolve_master(g, c, 1.0, 1)


def test_master_needs_n1():
    fs = make_field_spec(3, 1.0, T=1.0, window=CouplingProfile.gaussian(0.5, role="spectral"))
    with pytest.raises(DomainError):
        master_coefficients(fs, DampedPropagatorSpec.constant_damping(3.0, 1.0), 0.1, 8)


# ------------------------------------------------------------ plate


def test_plate_scalings():
    P = plate_power(1.0, 2.0, 3.0, 0.5)
    assert P == pytest.approx(1.0 * 2.0 * 9.0 / (16 * math.pi * 0.125), rel=1e-15)
    assert plate_power(1.0, 2.0, 3.0, 1.0) == pytest.approx(P / 8, rel=1e-15)
    assert plate_power(1.0, 2.0, 6.0, 0.5) == pytest.approx(4 * P, rel=1e-15)
    Pb = plate_power(1.0, 2.0, 3.0, 0.5, b=0.1)
    assert plate_power(1.0, 2.0, 3.0, 1.0, b=0.1) == pytest.approx(Pb / 16, rel=1e-15)
    assert plate_power(1.0, 2.0, 3.0, 0.5, b=0.75, thin_layer=False) == pytest.approx(P, rel=1e-15)


def test_plate_domain():
    with pytest.raises(DomainError):
        plate_power(0.0, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        plate_power(1.0, 1.0, 1.0, 1.0, b=1.5)
