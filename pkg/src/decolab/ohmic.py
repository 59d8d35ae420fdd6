"""Early-time decoherence of a two-coherent-state superposition in Ohmic QBM.

The bath is Ohmic with a Lorentzian cutoff, f_w^2 = Gamma^2/(w^2 + Gamma^2).
Everything is in natural units (hbar = k_B = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid

from .core import DomainError, OscillatorSpec
from .numerics import QuadratureSettings, integrate_trig_sum, thermal_factor

#: Early-time validity window, Omega * t <= this value.
EARLY_TIME_LIMIT = 0.1


class QuadratureWarning(RuntimeWarning):
    pass


class ValidityError(DomainError):
    pass


@dataclass(frozen=True)
class WignerPoint:
    Q: float
    P: float
    W_mix: float
    W_int: float

    @property
    def total(self) -> float:
        return self.W_mix + self.W_int


def _prefactor(spec: OscillatorSpec, normalization: str) -> float:
    x = spec.M * spec.Omega * spec.a ** 2
    if normalization == "printed":
        # (1 - e^{-M Omega a^2})^{-1} / pi
        return 1.0 / (-math.expm1(-x) * math.pi)
    if normalization == "renormalized":
        return 1.0 / ((1.0 + math.exp(-x)) * math.pi)
    raise DomainError(f"unknown normalization {normalization!r}")


def wigner_initial(spec: OscillatorSpec, Q, P, normalization: str = "printed") -> WignerPoint:
    """Wigner function of the even superposition of coherent states at +-a.

    ``normalization="printed"`` uses the (1 - e^{-M Omega a^2})^{-1}
    prefactor; ``"renormalized"`` rescales so the phase-space integral of
    W_mix + W_int is exactly one.
    """
    M, Om, a = spec.M, spec.Omega, spec.a
    Q = np.asarray(Q, dtype=float)
    P = np.asarray(P, dtype=float)
    c = _prefactor(spec, normalization)
    base = P ** 2 / M + M * Om ** 2 * Q ** 2
    # cosh(2 M Om a Q) exp(-M Om a^2) written as a sum of the two displaced Gaussians
    w_mix = 0.5 * c * (np.exp(-(P ** 2 / M + M * Om ** 2 * (Q - a) ** 2) / Om)
                       + np.exp(-(P ** 2 / M + M * Om ** 2 * (Q + a) ** 2) / Om))
    w_int = c * np.cos(2.0 * a * P) * np.exp(-base / Om)
    if w_mix.ndim == 0:
        return WignerPoint(float(Q), float(P), float(w_mix), float(w_int))
    return WignerPoint(Q, P, w_mix, w_int)


def normalization_report(spec: OscillatorSpec, n_sigma: float = 8.0, n: int = 401) -> dict:
    """Phase-space integral of W under both prefactor signs.

    The integral is computed on a grid extending ``n_sigma`` widths past
    the outer peaks; the sign whose total is closest to one is reported.
    """
    M, Om, a = spec.M, spec.Omega, spec.a
    sq = 1.0 / math.sqrt(2.0 * M * Om)
    sp = math.sqrt(M * Om / 2.0)
    q = np.linspace(-a - n_sigma * sq, a + n_sigma * sq, n)
    p = np.linspace(-n_sigma * sp, n_sigma * sp, n)
    Qg, Pg = np.meshgrid(q, p, indexing="ij")
    totals = {}
    for norm in ("printed", "renormalized"):
        w = wigner_initial(spec, Qg, Pg, norm)
        totals[norm] = float(trapezoid(trapezoid(w.W_mix + w.W_int, p, axis=1), q))
    best = min(totals, key=lambda k: abs(totals[k] - 1.0))
    sign = "minus" if best == "printed" else "plus"
    return {"integral_printed": totals["printed"],
            "integral_renormalized": totals["renormalized"],
            "normalizing_sign": sign}


def decoherence_exponent_ohmic(spec: OscillatorSpec, t: float,
                               settings: Optional[QuadratureSettings] = None,
                               return_result: bool = False):
    """D(t) = (8 M gamma a^2 / pi) int_0^inf dw/w f_w^2 coth(beta w/2) (1 - cos w t)."""
    if t < 0:
        raise DomainError("t must be >= 0")
    if t == 0:
        return 0.0
    G, beta = spec.Gamma, spec.beta

    def amp(w):
        return G * G / (w * (w * w + G * G)) * thermal_factor(w, beta)

    def full(w):
        return 2.0 * np.sin(0.5 * w * t) ** 2 * amp(w)

    split = min(G, 1.0 / t)
    res = integrate_trig_sum(amp, [(1.0, 0.0, "cos"), (-1.0, t, "cos")], split,
                             settings, full=full)
    pref = 8.0 * spec.M * spec.gamma * spec.a ** 2 / math.pi
    if not res.converged:
        import warnings
        warnings.warn(f"D(t) quadrature did not converge at t={t}", QuadratureWarning)
    value = pref * res.value
    if return_result:
        return value, res
    return value


def decoherence_exponent_highT(spec: OscillatorSpec, t: float) -> float:
    """High-temperature closed form 8 M gamma T a^2 (t - (1 - e^{-Gamma t})/Gamma)."""
    if t < 0:
        raise DomainError("t must be >= 0")
    G = spec.Gamma
    # t - (1-e^{-Gt})/G, cancellation-free for small G t
    x = G * t
    if x < 1e-3:
        core = t * (x / 2 - x * x / 6 + x ** 3 / 24 - x ** 4 / 120)
    else:
        core = t + math.expm1(-x) / G
    return 8.0 * spec.M * spec.gamma * spec.T * spec.a ** 2 * core


@dataclass(frozen=True)
class Timescales:
    tau_dec: float
    tau_dec_prime: float
    regime: str


def decoherence_timescales(spec: OscillatorSpec) -> Timescales:
    """Linear-law and quadratic-law decoherence times and the applicable regime."""
    if spec.T <= 0:
        raise DomainError("decoherence timescales need T > 0")
    M, g, a, T, G = spec.M, spec.gamma, spec.a, spec.T, spec.Gamma
    if g <= 0:
        raise DomainError("decoherence timescales need gamma > 0")
    tau = 1.0 / (8.0 * M * g * a * a * T)
    tau_p = 1.0 / (2.0 * a * math.sqrt(M * g * G * T))
    if G * tau >= 10.0:
        regime = "linear"
    elif G * tau_p <= 0.1:
        regime = "quadratic"
    else:
        regime = "crossover"
    return Timescales(tau, tau_p, regime)


def wigner_evolved(spec: OscillatorSpec, Q, P, t: float, *, override: bool = False,
                   normalization: str = "printed",
                   settings: Optional[QuadratureSettings] = None) -> WignerPoint:
    """Early-time Wigner function: interference term damped by exp(-D(t))."""
    if spec.Omega * t > EARLY_TIME_LIMIT and not override:
        raise ValidityError(
            f"Omega*t = {spec.Omega * t:.3g} exceeds the early-time window {EARLY_TIME_LIMIT}"
        )
    w0 = wigner_initial(spec, Q, P, normalization)
    damp = math.exp(-decoherence_exponent_ohmic(spec, t, settings))
    return WignerPoint(w0.Q, w0.P, w0.W_mix, w0.W_int * damp)


__all__ = [
    "EARLY_TIME_LIMIT",
    "ValidityError",
    "WignerPoint",
    "wigner_initial",
    "normalization_report",
    "decoherence_exponent_ohmic",
    "decoherence_exponent_highT",
    "Timescales",
    "decoherence_timescales",
    "wigner_evolved",
]
