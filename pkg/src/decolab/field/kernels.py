"""Field environment parameters, propagators, dipole kernels and the
overdamped master-equation coefficients V_n, V_d.

Radial reduction: int d^n k / (2 pi)^n -> (S_n / (2 pi)^n) int k^(n-1) dk
with S_1 = 2 and S_3 = 4 pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..core import CouplingProfile, DomainError
from ..numerics import (QuadratureError, QuadratureSettings, QuadResult, integrate_finite,
                        integrate_semi_infinite, integrate_trig_sum, thermal_factor)

#: S_n / (2 pi)^n for the radial reduction.
RADIAL_MEASURE = {1: 1.0 / math.pi, 3: 1.0 / (2.0 * math.pi ** 2)}


@dataclass(frozen=True)
class FieldSpec:
    """Dimension n, coupling g, inverse temperature beta and spectral window f_k^2."""

    n: int
    g: float
    beta: float
    window: CouplingProfile = field(default_factory=lambda: CouplingProfile.lorentzian(1.0))

    @property
    def T(self) -> float:
        return 0.0 if math.isinf(self.beta) else 1.0 / self.beta

    @property
    def Gamma(self) -> float:
        if self.window.kind != "lorentzian_k":
            raise DomainError("closed forms need the Lorentzian window")
        return self.window.width

    def f2(self, k):
        return self.window(k)


def make_field_spec(n: int, g: float, T: Optional[float] = None, beta: Optional[float] = None,
                    Gamma: float = 1.0, window: Optional[CouplingProfile] = None) -> FieldSpec:
    """Validated :class:`FieldSpec`; give either T (0 allowed) or beta (inf allowed)."""
    if n not in (1, 3):
        raise DomainError("field dimension n must be 1 or 3")
    if not (g > 0 and math.isfinite(g)):
        raise DomainError("coupling g must be > 0")
    if (T is None) == (beta is None):
        raise DomainError("give exactly one of T and beta")
    if T is not None:
        if not T >= 0:
            raise DomainError("temperature T must be >= 0")
        beta = math.inf if T == 0 else 1.0 / T
    if not beta > 0:
        raise DomainError("beta must be > 0")
    if window is None:
        if not Gamma > 0:
            raise DomainError("cutoff Gamma must be > 0")
        window = CouplingProfile.lorentzian(Gamma)
    if window.role != "spectral":
        raise DomainError("field window must have the spectral role")
    return FieldSpec(n, float(g), float(beta), window)


@dataclass(frozen=True)
class DampedPropagatorSpec:
    """Dispersion omega(k) and damping Lambda(k) (vectorized callables)."""

    omega: Callable
    Lam: Callable
    beta: float

    @classmethod
    def constant_damping(cls, Lam0: float, beta: float, mass: float = 0.0) -> "DampedPropagatorSpec":
        """omega = sqrt(k^2 + mass^2), Lambda = Lam0."""
        if Lam0 < 0:
            raise DomainError("damping must be >= 0")
        return cls(lambda k: np.sqrt(np.asarray(k, float) ** 2 + mass * mass),
                   lambda k: np.full(np.shape(k), float(Lam0)) if np.ndim(k) else float(Lam0),
                   beta)


def _check_k(k):
    k = np.asarray(k, dtype=float)
    if np.any(~(k > 0)):
        raise DomainError("wavenumber k must be > 0")
    return k


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def propagators_free(k, dt, beta: float):
    """G_r = sin(k dt)/(2k), G_h = cos(k dt) coth(beta k/2)/(2k)."""
    k = _check_k(k)
    dt = np.asarray(dt, dtype=float)
    gr = np.sin(k * dt) / (2.0 * k)
    gh = np.cos(k * dt) * thermal_factor(k, beta) / (2.0 * k)
    return _out(gr), _out(gh)


def _damped_thermal(w, lam, beta):
    """(sinh bw / (cosh bw - cos bL), sin bL / (cosh bw - cos bL)); beta = inf -> (1, 0)."""
    if math.isinf(beta):
        return np.ones_like(w), np.zeros_like(w)
    bw, bl = beta * w, beta * lam
    big = bw > 40.0
    bw_s = np.where(big, 0.0, bw)
    den = np.cosh(bw_s) - np.cos(bl)
    if np.any((den <= 1e-12) & ~big):
        raise DomainError("degenerate damped propagator: cosh(beta w) - cos(beta Lambda) <= 1e-12")
    with np.errstate(divide="ignore", invalid="ignore"):
        c1 = np.where(big, 1.0, np.sinh(bw_s) / den)
        c2 = np.where(big, 0.0, np.sin(bl) / den)
    return c1, c2


def propagators_damped(pspec: DampedPropagatorSpec, k, dt):
    """Damped propagators with dispersion omega(k) and damping Lambda(k)."""
    k = _check_k(k)
    dt = np.asarray(dt, dtype=float)
    w = np.asarray(pspec.omega(k), dtype=float)
    lam = np.asarray(pspec.Lam(k), dtype=float)
    if np.any(lam < 0) or np.any(~(w > 0)):
        raise DomainError("need Lambda >= 0 and omega > 0")
    env = np.exp(-lam * np.abs(dt))
    c1, c2 = _damped_thermal(w, lam, pspec.beta)
    gr = env * np.sin(w * dt) / (2.0 * w)
    gh = env * (c1 * np.cos(w * dt) + c2 * np.sin(w * np.abs(dt))) / (2.0 * w)
    return _out(gr), _out(gh)


# ---------------------------------------------------------------- quadrature

_SETTINGS = QuadratureSettings(abs_tol=1e-13, rel_tol=1e-10)


def trig_parts_integral(parts: Sequence[tuple[Callable, Sequence[tuple]]], full: Callable,
                        split: float, settings: Optional[QuadratureSettings] = None) -> QuadResult:
    """int_0^inf sum_p amp_p(k) sum_j c_j trig(w_j k) dk.

    ``full`` is a cancellation-free form of the whole integrand used on
    [0, split]; beyond ``split`` each (amplitude, terms) part is integrated
    term by term.
    """
    s = settings or _SETTINGS
    head = integrate_finite(full, 0.0, split, s)
    value, error, ok, panels = head.value, head.error, head.converged, head.panels
    for amp, terms in parts:
        r = integrate_trig_sum(amp, terms, split, s, lower=split)
        value += r.value
        error += r.error
        ok = ok and r.converged
        panels += r.panels
    return QuadResult(value, error, ok, panels)


def _require(res: QuadResult, what: str) -> float:
    if not res.converged:
        raise QuadratureError(f"{what}: quadrature did not converge (best estimate {res.value:.6g})")
    return res.value


def _k_scale(fspec: FieldSpec) -> float:
    return fspec.window.width if fspec.window.kind != "sampled" else 1.0


def _check_decay(f: Callable, scale: float, what: str) -> None:
    """Reject a non-oscillatory integrand whose tail is not integrable.

    Extrapolated panel sums can settle on a finite value for a
    logarithmically divergent integral, so the local power law of the tail
    is measured directly.
    """
    K = 1e4 * scale
    a, b = float(f(K)), float(f(2.0 * K))
    if a == 0.0 or b == 0.0:
        return
    p = math.log(abs(b / a)) / math.log(2.0)
    if p > -1.05:
        raise QuadratureError(f"{what}: integral diverges (integrand ~ k^{p:.3g} at large k)")


def dipole_kernels(fspec: FieldSpec, t: float, pspec: Optional[DampedPropagatorSpec] = None,
                   settings: Optional[QuadratureSettings] = None) -> tuple[float, float]:
    """(eta(t), nu(t)) = g^2/(2n) int d^n k/(2pi)^n k^2 f_k^2 G_(r,h)(k, t).

    Uses the free massless propagators unless ``pspec`` is given.  Raises
    :class:`QuadratureError` when an integral does not converge (nu(0) with
    a Lorentzian window diverges for both n).
    """
    n = fspec.n
    pref = fspec.g ** 2 / (2 * n) * RADIAL_MEASURE[n]
    sgn = 1.0 if t >= 0 else -1.0
    ta = abs(t)
    split = min(_k_scale(fspec), 1.0 / ta) if ta > 0 else _k_scale(fspec)

    if pspec is None:
        # k^(n+1) f^2 / (2k) times sin / cos(k t) coth
        amp_r = lambda k: k ** n * fspec.f2(k) / 2.0  # noqa: E731
        amp_h = lambda k: k ** n * fspec.f2(k) * thermal_factor(k, fspec.beta) / 2.0  # noqa: E731
        if ta == 0:
            _check_decay(amp_h, _k_scale(fspec), "nu(0)")
        er = trig_parts_integral([(amp_r, [(1.0, ta, "sin")])],
                                 lambda k: amp_r(k) * np.sin(ta * k), split, settings)
        eh = trig_parts_integral([(amp_h, [(1.0, ta, "cos")])],
                                 lambda k: amp_h(k) * np.cos(ta * k), split, settings)
        eta = 0.0 if ta == 0 else sgn * pref * _require(er, f"eta({t})")
        nu = pref * _require(eh, f"nu({t})")
        return eta, nu

    def gr(k):
        return k ** (n + 1) * fspec.f2(k) * np.asarray(propagators_damped(pspec, k, ta)[0])

    def gh(k):
        return k ** (n + 1) * fspec.f2(k) * np.asarray(propagators_damped(pspec, k, ta)[1])

    # general dispersion: no single period, so geometric panels
    s = settings or _SETTINGS
    eta = 0.0
    if ta > 0:
        r = integrate_semi_infinite(gr, s, breakpoints=[split], scale=split)
        eta = sgn * pref * _require(r, f"eta({t})")
    h = integrate_semi_infinite(gh, s, breakpoints=[split], scale=split)
    nu = pref * _require(h, f"nu({t})")
    return eta, nu


def local_eta_moment(fspec: FieldSpec, pspec: DampedPropagatorSpec,
                     settings: Optional[QuadratureSettings] = None) -> float:
    """Overdamped-limit prediction for int t eta(t) dt over the real line.

    G_r -> (2/Lambda^3) delta' carries first moment 2/Lambda^3 (in
    magnitude), so the prediction is g^2/(2n) int d^n k/(2pi)^n k^2 f^2 2/Lambda^3.
    """
    n = fspec.n
    pref = fspec.g ** 2 / (2 * n) * RADIAL_MEASURE[n]

    def f(k):
        lam = np.asarray(pspec.Lam(k), dtype=float)
        return k ** (n + 1) * fspec.f2(k) * 2.0 / lam ** 3

    r = integrate_semi_infinite(f, settings or _SETTINGS, scale=_k_scale(fspec))
    return pref * _require(r, "local moment")


def eta_moment(fspec: FieldSpec, pspec: DampedPropagatorSpec, t_max: float, n_t: int = 401,
               settings: Optional[QuadratureSettings] = None) -> float:
    """int_{-t_max}^{t_max} t eta(t) dt from sampled eta (Simpson on [0, t_max], doubled)."""
    from scipy.integrate import simpson
    ts = np.linspace(0.0, t_max, n_t)
    eta = np.array([dipole_kernels(fspec, float(t), pspec, settings)[0] for t in ts])
    return 2.0 * float(simpson(ts * eta, x=ts))


# ------------------------------------------------------------ overdamped limit


def _sinc_deficit(x):
    """1 - sin(x)/x, series below 1e-2."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    xs = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, x2 / 6.0 - x2 * x2 / 120.0 + x2 ** 3 / 5040.0, 1.0 - np.sin(xs) / xs)


def _sph_dipole(x):
    """sin(x)/x - cos(x), series below 1e-2."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    xs = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, x2 / 3.0 - x2 * x2 / 30.0 + x2 ** 3 / 840.0, np.sin(xs) / xs - np.cos(xs))


def overdamped_Vn_Vd(fspec: FieldSpec, pspec: DampedPropagatorSpec, r: float,
                     settings: Optional[QuadratureSettings] = None) -> tuple[float, float]:
    """Master-equation coefficients V_n(r) (real decay rate) and V_d(r).

    V_n = (g^2/2) int d^n k/(2pi)^n f^2/(Lambda w) * th(k) * (1 - <cos k.r>)
    V_d = (g^2/(2 r^2)) int d^n k/(2pi)^n f^2/Lambda^3 * <(k.r) sin(k.r)>

    with th = sinh(beta w)/(cosh(beta w) - cos(beta Lambda)) and angular
    averages 1 - cos(kr), kr sin(kr) for n = 1 and 1 - sinc(kr),
    sin(kr)/(kr) - cos(kr) for n = 3.  V_d(0) is the r -> 0 limit.
    """
    if r < 0:
        raise DomainError("r must be >= 0")
    n = fspec.n
    meas = RADIAL_MEASURE[n]
    g2 = fspec.g ** 2
    beta = pspec.beta

    def base_n(k):
        w = np.asarray(pspec.omega(k), float)
        lam = np.asarray(pspec.Lam(k), float)
        th, _ = _damped_thermal(w, lam, beta)
        return k ** (n - 1) * fspec.f2(k) * th / (lam * w)

    def base_d(k):
        lam = np.asarray(pspec.Lam(k), float)
        return k ** (n - 1) * fspec.f2(k) / lam ** 3

    scale = _k_scale(fspec)
    if r == 0:
        vn = 0.0
        # kr sin kr -> (kr)^2 ; sin x/x - cos x -> x^2/3
        c = 1.0 if n == 1 else 1.0 / 3.0
        res = integrate_semi_infinite(lambda k: c * k * k * base_d(k), settings or _SETTINGS, scale=scale)
        vd = 0.5 * g2 * meas * _require(res, "V_d(0)")
        return vn, vd

    split = 1.0 / r
    if n == 1:
        rn = trig_parts_integral([(base_n, [(1.0, 0.0, "cos"), (-1.0, r, "cos")])],
                                 lambda k: base_n(k) * 2.0 * np.sin(0.5 * k * r) ** 2, split, settings)
        rd = trig_parts_integral([(lambda k: base_d(k) * k * r, [(1.0, r, "sin")])],
                                 lambda k: base_d(k) * k * r * np.sin(k * r), split, settings)
    else:
        rn = trig_parts_integral([(base_n, [(1.0, 0.0, "cos")]),
                                  (lambda k: -base_n(k) / (k * r), [(1.0, r, "sin")])],
                                 lambda k: base_n(k) * _sinc_deficit(k * r), split, settings)
        rd = trig_parts_integral([(lambda k: base_d(k) / (k * r), [(1.0, r, "sin")]),
                                  (lambda k: -base_d(k), [(1.0, r, "cos")])],
                                 lambda k: base_d(k) * _sph_dipole(k * r), split, settings)
    vn = 0.5 * g2 * meas * _require(rn, f"V_n({r})")
    vd = 0.5 * g2 * meas * _require(rd, f"V_d({r})") / (r * r)
    return vn, vd


__all__ = [
    "RADIAL_MEASURE",
    "FieldSpec",
    "make_field_spec",
    "DampedPropagatorSpec",
    "propagators_free",
    "propagators_damped",
    "trig_parts_integral",
    "dipole_kernels",
    "local_eta_moment",
    "eta_moment",
    "overdamped_Vn_Vd",
]
