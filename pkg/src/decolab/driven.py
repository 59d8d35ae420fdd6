"""Decoherence of a cat state prepared by a finite-duration drive.

The particle couples to the bath through the Ohmic spectral weight p(w)^2
of the diagonalized oscillator-plus-bath Hamiltonian.  Four kernels built
from p^2 (r, s, y, z) and two frequencies (Omega_1, Omega_2) determine the
decoherence exponent D_alpha(t) of a state driven by alpha(t).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DomainError, DriveProfile, OscillatorSpec, SampledCurve, curve_eval
from .numerics import QuadratureSettings, QuadratureError, integrate_semi_infinite

#: Multiply the drive-convolved exponent by a^2 so that D_alpha is
#: dimensionless (alpha enters the coupling as a * alpha(t)).  Set to False
#: to reproduce the literal formula.
APPLY_DISPLACEMENT_SCALE = True

#: Offsets (in units of gamma) around the resonance used as breakpoints.
_RESONANCE_OFFSETS = (1.0, 3.0, 10.0, 30.0, 100.0, 300.0)

_KERNEL_SETTINGS = QuadratureSettings(abs_tol=1e-13, rel_tol=1e-11)


class NegativeExponentWarning(RuntimeWarning):
    pass


def spectral_weight_p2(spec: OscillatorSpec, omega):
    """p(w)^2 = g^2 w^4 Gamma^2 / (pi (w^2+Gamma^2) [(w^2-Omega^2+gamma^2)^2 + 4 Omega^2 gamma^2])."""
    w = np.asarray(omega, dtype=float)
    if np.any(~(w > 0)):
        raise DomainError("spectral weight needs omega > 0")
    G, Om, g = spec.Gamma, spec.Omega, spec.gamma
    w2 = w * w
    res = (w2 - Om * Om + g * g) ** 2 + 4.0 * Om * Om * g * g
    out = spec.g2 * w2 * w2 * G * G / (math.pi * (w2 + G * G) * res)
    return float(out) if out.ndim == 0 else out


def _breakpoints(spec: OscillatorSpec) -> list[float]:
    Om, g = spec.Omega, spec.gamma
    pts = {0.5 * Om, 2.0 * Om}
    for c in _RESONANCE_OFFSETS:
        for sgn in (-1.0, 1.0):
            p = Om + sgn * c * g
            if 0 < p < 2.0 * Om:
                pts.add(p)
    pts.add(Om)
    return sorted(pts)


def _moment(spec: OscillatorSpec, power: int, t: float = 0.0, trig: str = "cos",
            settings: Optional[QuadratureSettings] = None) -> float:
    """int_0^inf p^2 / w^power * trig(w t) dw."""
    s = settings or _KERNEL_SETTINGS

    if trig == "cos":
        f = lambda w: spectral_weight_p2(spec, w) / w ** power * np.cos(w * t)  # noqa: E731
    else:
        if t == 0.0:
            return 0.0
        f = lambda w: spectral_weight_p2(spec, w) / w ** power * np.sin(w * t)  # noqa: E731
    period = 2.0 * math.pi / t if t > 0 else None
    r = integrate_semi_infinite(f, s, lower=0.0, period=period,
                                breakpoints=_breakpoints(spec), scale=spec.Omega)
    if not r.converged:
        raise QuadratureError(f"kernel quadrature did not converge at t={t!r}")
    return r.value


@dataclass(frozen=True)
class Frequencies:
    Omega1: float
    Omega2: float
    sum_rule: float  # int p^2/w^2 dw / M with the printed weight


def frequencies_omega12(spec: OscillatorSpec, normalized: bool = True,
                        settings: Optional[QuadratureSettings] = None) -> Frequencies:
    """Omega_1 = (1/M) int p^2/w and Omega_2 = M / int p^2/w^3.

    With ``normalized`` the weight is rescaled so that (1/M) int p^2/w^2 = 1,
    which makes r(0) = 1 exactly.
    """
    M = spec.M
    m2 = _moment(spec, 2, settings=settings) / M
    c = 1.0 / m2 if normalized else 1.0
    o1 = c * _moment(spec, 1, settings=settings) / M
    o2 = M / (c * _moment(spec, 3, settings=settings))
    return Frequencies(o1, o2, m2)


@dataclass(frozen=True)
class KernelSet:
    r: SampledCurve
    s: SampledCurve
    y: SampledCurve
    z: SampledCurve
    Omega1: float
    Omega2: float


def kernel_values(spec: OscillatorSpec, t: float, freqs: Frequencies,
                  normalized: bool = True,
                  settings: Optional[QuadratureSettings] = None) -> tuple[float, float, float, float]:
    """(r, s, y, z) at a single time."""
    M = spec.M
    c = 1.0 / freqs.sum_rule if normalized else 1.0
    r = c * _moment(spec, 2, t, "cos", settings) / M
    s_ = c * _moment(spec, 1, t, "sin", settings) / (M * freqs.Omega2)
    y = c * _moment(spec, 1, t, "cos", settings) / (M * freqs.Omega1)
    z = c * _moment(spec, 2, t, "sin", settings) / M
    return r, s_, y, z


def kernels(spec: OscillatorSpec, t_max: float, n_samples: int = 256,
            normalized: bool = True,
            settings: Optional[QuadratureSettings] = None) -> KernelSet:
    """Sample r, s, y, z on a uniform grid over [0, t_max]."""
    if not t_max > 0:
        raise DomainError("t_max must be > 0")
    if n_samples < 64:
        raise DomainError("n_samples must be >= 64")
    freqs = frequencies_omega12(spec, normalized, settings)
    ts = np.linspace(0.0, t_max, n_samples)
    vals = np.empty((4, n_samples))
    for i, t in enumerate(ts):
        try:
            vals[:, i] = kernel_values(spec, float(t), freqs, normalized, settings)
        except QuadratureError as exc:
            raise QuadratureError(f"kernel evaluation failed at t={t!r}: {exc}") from exc
    step = t_max / (n_samples - 1)
    curves = [SampledCurve(0.0, step, v) for v in vals]
    return KernelSet(*curves, Omega1=freqs.Omega1, Omega2=freqs.Omega2)


def _grid(kernel: SampledCurve, t: float) -> np.ndarray:
    if t > kernel.stop * (1 + 1e-12) or t < 0:
        raise DomainError(f"kernel covers [0, {kernel.stop}], need [0, {t}]")
    n = max(int(math.ceil(t / kernel.step - 1e-9)) + 1, 2)
    return np.linspace(0.0, t, n)


def _trap_weights(x: np.ndarray) -> np.ndarray:
    w = np.full(x.size, x[1] - x[0] if x.size > 1 else 0.0)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def drive_convolution(drive: DriveProfile, kernel: SampledCurve, t: float) -> float:
    """int_0^t alpha(t') kernel(t - t') dt' (trapezoid on the kernel grid).

    The delta drive counts the full weight of the boundary delta, so it
    returns strength * kernel(t).
    """
    if drive.kind == "delta":
        return drive.strength * curve_eval(kernel, t)
    if t == 0:
        return 0.0
    x = _grid(kernel, t)
    vals = np.asarray(drive(x)) * np.asarray(curve_eval(kernel, np.clip(t - x, 0.0, kernel.stop)))
    return float(np.dot(_trap_weights(x), vals))


def self_convolution(drive: DriveProfile, y: SampledCurve, t: float, method: str = "2d") -> float:
    """int_0^t int_0^t alpha(t') alpha(t'') y(|t' - t''|) dt' dt''.

    ``method="2d"`` is a tensor trapezoid; ``method="lag"`` rewrites the
    same discrete sum as sum_k y(k h) C_k over lags, with C_k the
    autocorrelation of the trapezoid-weighted drive.
    """
    if drive.kind == "delta":
        return drive.strength ** 2 * curve_eval(y, 0.0)
    if t == 0:
        return 0.0
    x = _grid(y, t)
    wa = _trap_weights(x) * np.asarray(drive(x))
    if method == "2d":
        lag = np.abs(x[:, None] - x[None, :])
        yy = np.asarray(curve_eval(y, np.clip(lag, 0.0, y.stop)))
        return float(wa @ yy @ wa)
    if method == "lag":
        n = x.size
        corr = np.correlate(wa, wa, mode="full")[n - 1:]
        corr[1:] *= 2.0
        yv = np.asarray(curve_eval(y, np.clip(x - x[0], 0.0, y.stop)))
        return float(np.dot(yv, corr))
    raise DomainError(f"unknown self-convolution method {method!r}")


@dataclass(frozen=True)
class DrivenExponent:
    value: float
    double_term: float
    y_conv: float
    z_conv: float
    negative: bool


def decoherence_exponent_driven(spec: OscillatorSpec, drive: DriveProfile, t: float,
                                kset: KernelSet, detail: bool = False):
    """D_alpha(t) = M Omega_1 [<<a a y>> - (a*y)(t)^2] - M Omega_2 (a*z)(t)^2.

    Multiplied by a^2 when :data:`APPLY_DISPLACEMENT_SCALE` is set.  A
    negative value raises :class:`NegativeExponentWarning` and is returned
    unchanged.
    """
    if t < 0:
        raise DomainError("t must be >= 0")
    if t == 0:
        out = DrivenExponent(0.0, 0.0, 0.0, 0.0, False)
        return out if detail else 0.0
    M = spec.M
    dbl = self_convolution(drive, kset.y, t)
    cy = drive_convolution(drive, kset.y, t)
    cz = drive_convolution(drive, kset.z, t)
    D = M * kset.Omega1 * (dbl - cy * cy) - M * kset.Omega2 * cz * cz
    if APPLY_DISPLACEMENT_SCALE:
        D *= spec.a ** 2
    neg = D < 0
    if neg:
        warnings.warn(f"negative D_alpha={D:.6g} at t={t!r}", NegativeExponentWarning)
    if detail:
        return DrivenExponent(D, dbl, cy, cz, neg)
    return D


def delta_drive_exponent(spec: OscillatorSpec, kset: KernelSet, t: float,
                         strength: float = 2.0) -> float:
    """Closed form for alpha = strength * delta(t): (s^2 M)[Omega_1 (1 - y^2) - Omega_2 z^2]."""
    y = curve_eval(kset.y, t)
    z = curve_eval(kset.z, t)
    D = strength ** 2 * spec.M * (kset.Omega1 * (1.0 - y * y) - kset.Omega2 * z * z)
    return D * spec.a ** 2 if APPLY_DISPLACEMENT_SCALE else D


def cutoff_sensitivity(spec: OscillatorSpec, drive: DriveProfile, t: float,
                       n_samples: int = 256, factor: float = 2.0) -> float:
    """|D(Gamma factor) - D(Gamma)| / |D(Gamma)| at fixed t."""
    vals = []
    for G in (spec.Gamma, factor * spec.Gamma):
        sp = spec.replace(Gamma=G, strict_regime=False)
        ks = kernels(sp, t, n_samples)
        vals.append(decoherence_exponent_driven(sp, drive, t, ks))
    return abs(vals[1] - vals[0]) / abs(vals[0])


__all__ = [
    "APPLY_DISPLACEMENT_SCALE",
    "NegativeExponentWarning",
    "spectral_weight_p2",
    "Frequencies",
    "frequencies_omega12",
    "KernelSet",
    "kernel_values",
    "kernels",
    "drive_convolution",
    "self_convolution",
    "DrivenExponent",
    "decoherence_exponent_driven",
    "delta_drive_exponent",
    "cutoff_sensitivity",
]
