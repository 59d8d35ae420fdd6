"""Parameter records, drive/coupling profiles and sampled curves.

Natural units are used throughout: hbar = k_B = 1, so temperatures are
energies and every formula below is written with hbar and k_B deleted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class DomainError(ValueError):
    """Raised when an input violates a documented constraint."""


def _check_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise DomainError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class SampledCurve:
    """Uniform-grid samples of a scalar function of one variable.

    Evaluation between samples is linear interpolation; evaluation outside
    ``[start, stop]`` raises.
    """

    start: float
    step: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if self.step <= 0 or not math.isfinite(self.step):
            raise DomainError("step must be positive")
        if vals.ndim != 1 or vals.size < 2:
            raise DomainError("a sampled curve needs at least 2 samples")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, fn: Callable, start: float, stop: float, n: int) -> "SampledCurve":
        x = np.linspace(start, stop, n)
        return cls(start, (stop - start) / (n - 1), np.asarray(fn(x), dtype=float))

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def stop(self) -> float:
        return self.start + self.step * (self.n - 1)

    @property
    def abscissae(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.n)

    def __call__(self, x):
        return curve_eval(self, x)


def curve_eval(curve: SampledCurve, x):
    """Linearly interpolate ``curve`` at ``x`` (scalar or array)."""
    xa = np.asarray(x, dtype=float)
    pos = (xa - curve.start) / curve.step
    last = curve.n - 1
    # tolerate round-off at the ends
    slack = 1e-9
    if np.any(pos < -slack) or np.any(pos > last + slack) or np.any(~np.isfinite(pos)):
        raise DomainError(
            f"x outside sampled range [{curve.start}, {curve.stop}]"
        )
    pos = np.clip(pos, 0.0, last)
    i = np.minimum(np.floor(pos).astype(int), last - 1)
    w = pos - i
    v = curve.values
    out = (1.0 - w) * v[i] + w * v[i + 1]
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class OscillatorSpec:
    """Brownian oscillator plus Ohmic bath parameters.

    Attributes
    ----------
    M : particle mass
    Omega : natural frequency
    gamma : dissipation rate, gamma = pi g^2 / (4 M)
    Gamma : Lorentzian UV cutoff of the bath
    T : bath temperature (energy units, 0 allowed)
    a : displacement / separation scale
    """

    M: float
    Omega: float
    gamma: float
    Gamma: float
    T: float
    a: float
    strict_regime: bool = False

    @property
    def g2(self) -> float:
        """Squared coupling recovered from the dissipation rate."""
        return 4.0 * self.M * self.gamma / math.pi

    @property
    def g(self) -> float:
        return math.sqrt(self.g2)

    @property
    def beta(self) -> float:
        return math.inf if self.T == 0 else 1.0 / self.T

    def replace(self, **changes) -> "OscillatorSpec":
        params = {k: getattr(self, k)
                  for k in ("M", "Omega", "gamma", "Gamma", "T", "a", "strict_regime")}
        params.update(changes)
        return make_oscillator_spec(**params)


REGIME_RATIO = 10.0


def make_oscillator_spec(M: float, Omega: float, gamma: float, Gamma: float,
                         T: float, a: float, strict_regime: bool = True) -> OscillatorSpec:
    """Validate and build an :class:`OscillatorSpec`.

    With ``strict_regime`` the weak-coupling window Gamma >> Omega >> gamma
    is enforced as Gamma/Omega >= 10 and Omega/gamma >= 10.
    """
    _check_finite(M=M, Omega=Omega, gamma=gamma, Gamma=Gamma, T=T, a=a)
    if M <= 0:
        raise DomainError("mass M must be > 0")
    if Omega <= 0:
        raise DomainError("frequency Omega must be > 0")
    if Gamma <= 0:
        raise DomainError("cutoff Gamma must be > 0")
    if gamma < 0:
        raise DomainError("dissipation rate gamma must be >= 0")
    if T < 0:
        raise DomainError("temperature T must be >= 0")
    if a <= 0:
        raise DomainError("separation a must be > 0")
    if strict_regime:
        if Gamma / Omega < REGIME_RATIO or (gamma > 0 and Omega / gamma < REGIME_RATIO):
            raise DomainError(
                f"regime Γ≫Ω≫γ violated (Γ/Ω={Gamma / Omega:.3g}, "
                f"Ω/γ={Omega / gamma if gamma else math.inf:.3g}; need both >= {REGIME_RATIO:g})"
            )
    return OscillatorSpec(float(M), float(Omega), float(gamma), float(Gamma),
                          float(T), float(a), bool(strict_regime))


@dataclass(frozen=True)
class DriveProfile:
    """c-number drive alpha(t) (frequency units).

    ``kind`` is one of ``"delta"`` (alpha = strength * delta(t), with the
    full weight of the boundary delta counted), ``"sine"``
    (amplitude * sin(Lambda t)) or ``"sampled"``.
    """

    kind: str
    strength: float = 2.0
    amplitude: float = 1.0
    Lambda: float = 1.0
    curve: Optional[SampledCurve] = None

    def __post_init__(self):
        if self.kind not in ("delta", "sine", "sampled"):
            raise DomainError(f"unknown drive kind {self.kind!r}")
        if self.kind == "sampled":
            if self.curve is None:
                raise DomainError("sampled drive needs a curve")
            if self.curve.start != 0.0:
                raise DomainError("sampled drive must start at t=0")
            if abs(self.curve.values[0]) > 1e-12:
                raise DomainError("drive must satisfy alpha(0) = 0")

    @classmethod
    def delta(cls, strength: float = 2.0) -> "DriveProfile":
        return cls("delta", strength=strength)

    @classmethod
    def sine(cls, amplitude: float = 1.0, Lambda: float = 1.0) -> "DriveProfile":
        return cls("sine", amplitude=amplitude, Lambda=Lambda)

    @classmethod
    def sampled(cls, curve: SampledCurve) -> "DriveProfile":
        return cls("sampled", curve=curve)

    def __call__(self, t):
        """Smooth part of alpha(t); the delta variant has none."""
        t = np.asarray(t, dtype=float)
        if self.kind == "delta":
            return np.zeros_like(t)
        if self.kind == "sine":
            return self.amplitude * np.sin(self.Lambda * t)
        return curve_eval(self.curve, t)


@dataclass(frozen=True)
class CouplingProfile:
    """Spatial window f(x) or spectral window f_k.

    Variants
    --------
    gaussian : f(y) = (2 a_g / pi)^(1/4) exp(-a_g y^2) in the spatial role
        (unit norm of f^2); f_k^2 = exp(-k^2 / (2 a_g)) in the spectral role.
    lorentzian_k : f_k^2 = Gamma^2 / (k^2 + Gamma^2) (spectral role only).
    sampled : tabulated values; ``norm`` rescales them.
    """

    kind: str
    role: str = "spatial"
    width: float = 1.0  # a_g for gaussian, Gamma for lorentzian_k
    curve: Optional[SampledCurve] = None
    norm: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "lorentzian_k", "sampled"):
            raise DomainError(f"unknown coupling profile {self.kind!r}")
        if self.role not in ("spatial", "spectral"):
            raise DomainError(f"unknown profile role {self.role!r}")
        if self.width <= 0:
            raise DomainError("profile width parameter must be > 0")
        if self.kind == "lorentzian_k" and self.role != "spectral":
            raise DomainError("lorentzian_k is a spectral window")
        if self.kind == "sampled":
            if self.curve is None:
                raise DomainError("sampled profile needs a curve")
            v = np.abs(self.curve.values)
            peak = v.max()
            if peak <= 0:
                raise DomainError("sampled profile is identically zero")
            if self.role == "spatial" and max(v[0], v[-1]) > 1e-6 * peak:
                raise DomainError("sampled spatial profile must decay below 1e-6 of peak at the grid edges")

    @classmethod
    def gaussian(cls, a_g: float, role: str = "spatial") -> "CouplingProfile":
        return cls("gaussian", role=role, width=a_g)

    @classmethod
    def lorentzian(cls, Gamma: float) -> "CouplingProfile":
        return cls("lorentzian_k", role="spectral", width=Gamma)

    @classmethod
    def sampled(cls, curve: SampledCurve, role: str = "spatial", normalize: bool = True) -> "CouplingProfile":
        norm = 1.0
        if normalize and role == "spatial":
            norm = 1.0 / math.sqrt(_trapz(curve.values ** 2, curve.step))
        return cls("sampled", role=role, curve=curve, norm=norm)

    def __call__(self, x):
        """f(x) in the spatial role, f_k^2 in the spectral role."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            a = self.width
            if self.role == "spatial":
                return (2.0 * a / math.pi) ** 0.25 * np.exp(-a * x * x)
            return np.exp(-x * x / (2.0 * a))
        if self.kind == "lorentzian_k":
            G = self.width
            with np.errstate(over="ignore"):
                return G * G / (x * x + G * G)
        xs = self.curve
        inside = (x >= xs.start) & (x <= xs.stop)
        out = np.zeros_like(x)
        if np.any(inside):
            out[inside] = self.norm * np.asarray(curve_eval(xs, x[inside]))
        return out if out.ndim else float(out)

    def square_norm(self) -> float:
        """Integral of f^2 over the line (spatial role)."""
        if self.kind == "gaussian":
            return 1.0
        return self.norm ** 2 * _trapz(self.curve.values ** 2, self.curve.step)


def _trapz(values: np.ndarray, step: float) -> float:
    v = np.asarray(values, dtype=float)
    return float(step * (v.sum() - 0.5 * (v[0] + v[-1])))


__all__ = [
    "DomainError",
    "SampledCurve",
    "curve_eval",
    "OscillatorSpec",
    "make_oscillator_spec",
    "DriveProfile",
    "CouplingProfile",
]
