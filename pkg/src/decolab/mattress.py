"""Exactly solvable 'mattress' model: a particle locally coupled to a continuum
of independent oscillator baths through a spatial window f.

The reduced density matrix is carried in the Rengiw representation
R(k, Delta), the Fourier transform of rho(Sigma + Delta/2, Sigma - Delta/2)
over the mean position Sigma.  Each (k, Delta_f) node evolves along the
characteristic

    M dDelta/dt' - 2 mu U'(Delta) = k,        Delta(t) = Delta_f,

with the overlap U(Delta) = int f(y) [f(y) - f(y - Delta)] dy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .core import CouplingProfile, DomainError, curve_eval
from .numerics import OdeSettings, ShootingError, ode_solve_final, shoot_scalar

# ---------------------------------------------------------------- overlaps


class GaussianOverlap:
    """U = 1 - exp(-a Delta^2 / 2) for f(y) proportional to exp(-a y^2)."""

    def __init__(self, a_g: float):
        if not a_g > 0:
            raise DomainError("Gaussian width parameter must be > 0")
        self.a_g = float(a_g)

    def U(self, d):
        d = np.asarray(d, dtype=float)
        return -np.expm1(-0.5 * self.a_g * d * d)

    def dU(self, d):
        d = np.asarray(d, dtype=float)
        return self.a_g * d * np.exp(-0.5 * self.a_g * d * d)

    def d2U(self, d):
        d = np.asarray(d, dtype=float)
        a = self.a_g
        return a * (1.0 - a * d * d) * np.exp(-0.5 * a * d * d)

    def window(self) -> float:
        return 10.0 / math.sqrt(self.a_g)


class ParabolicOverlap:
    """U = u2 Delta^2 / 2; the linear model with an analytic solution."""

    def __init__(self, u2: float):
        if not u2 > 0:
            raise DomainError("u2 must be > 0")
        self.u2 = float(u2)

    def U(self, d):
        d = np.asarray(d, dtype=float)
        return 0.5 * self.u2 * d * d

    def dU(self, d):
        return self.u2 * np.asarray(d, dtype=float)

    def d2U(self, d):
        return self.u2 * np.ones_like(np.asarray(d, dtype=float))

    def window(self) -> float:
        return 10.0 / math.sqrt(self.u2)


class SampledOverlap:
    """U from a tabulated profile; U' and U'' by five-point stencils."""

    def __init__(self, profile: CouplingProfile):
        if profile.kind != "sampled" or profile.role != "spatial":
            raise DomainError("SampledOverlap needs a sampled spatial profile")
        self.profile = profile
        c = profile.curve
        self._y = c.abscissae
        self._f = profile.norm * c.values
        self._h = c.step
        self._w = np.full(c.n, c.step)
        self._w[[0, -1]] *= 0.5
        self._self = float(np.dot(self._w, self._f ** 2))

    def _shifted(self, d: np.ndarray) -> np.ndarray:
        c = self.profile.curve
        x = self._y[None, :] - d[:, None]
        inside = (x >= c.start) & (x <= c.stop)
        out = np.zeros_like(x)
        out[inside] = self.profile.norm * np.asarray(curve_eval(c, x[inside]))
        return out

    def U(self, d):
        d = np.asarray(d, dtype=float)
        flat = np.atleast_1d(d).ravel()
        cross = self._shifted(flat) @ (self._w * self._f)
        out = (self._self - cross).reshape(np.shape(d))
        return float(out) if out.ndim == 0 else out

    def dU(self, d):
        h = self._h
        d = np.asarray(d, dtype=float)
        return (-self.U(d + 2 * h) + 8 * self.U(d + h) - 8 * self.U(d - h) + self.U(d - 2 * h)) / (12 * h)

    def d2U(self, d):
        h = self._h
        d = np.asarray(d, dtype=float)
        return (-self.U(d + 2 * h) + 16 * self.U(d + h) - 30 * self.U(d)
                + 16 * self.U(d - h) - self.U(d - 2 * h)) / (12 * h * h)

    def window(self) -> float:
        c = self.profile.curve
        return c.stop - c.start


Overlap = Union[GaussianOverlap, ParabolicOverlap, SampledOverlap]


@dataclass(frozen=True)
class MattressSpec:
    """Particle mass M, coupling mu = g^2/(4d), temperature T, overlap U."""

    M: float
    mu: float
    T: float
    overlap: Overlap
    profile: Optional[CouplingProfile] = None

    def with_overlap(self, overlap: Overlap) -> "MattressSpec":
        return MattressSpec(self.M, self.mu, self.T, overlap, None)

    @property
    def u2(self) -> float:
        """U''(0)."""
        return float(self.overlap.d2U(0.0))

    @property
    def rate(self) -> float:
        """Instability rate (2 mu / M) U''(0)."""
        return 2.0 * self.mu * self.u2 / self.M


def make_mattress_spec(M: float, mu: float, T: float, profile) -> MattressSpec:
    """Build a spec from a spatial CouplingProfile or a ready overlap object.

    mu = 0 is accepted (free particle); the profile is taken as normalized
    to int f^2 = 1, the rest of its weight being absorbed into mu.
    """
    for name, v in (("M", M), ("mu", mu), ("T", T)):
        if not math.isfinite(v):
            raise DomainError(f"{name} must be finite")
    if M <= 0:
        raise DomainError("mass M must be > 0")
    if mu < 0:
        raise DomainError("coupling mu must be >= 0")
    if T < 0:
        raise DomainError("temperature T must be >= 0")
    if isinstance(profile, CouplingProfile):
        if profile.role != "spatial":
            raise DomainError("mattress needs a spatial coupling profile")
        if profile.kind == "gaussian":
            overlap = GaussianOverlap(profile.width)
        elif profile.kind == "sampled":
            overlap = SampledOverlap(profile)
        else:
            raise DomainError(f"profile {profile.kind!r} has no overlap")
        return MattressSpec(float(M), float(mu), float(T), overlap, profile)
    return MattressSpec(float(M), float(mu), float(T), profile, None)


def overlap_U(spec: MattressSpec, d, derivative: int = 0):
    """U(Delta) or its first/second derivative."""
    fn = (spec.overlap.U, spec.overlap.dU, spec.overlap.d2U)[derivative]
    out = fn(d)
    return float(out) if np.ndim(out) == 0 else out


# ------------------------------------------------------------ characteristics

_ODE = OdeSettings(rtol=1e-11, atol=1e-13)


def _bundle(spec: MattressSpec, k, d_f, t: float, settings: Optional[OdeSettings] = None):
    """Backward-integrate all nodes at once.

    Returns (Delta(0), int_0^t U dt', dDelta(0)/dk) as arrays.  The
    Jacobian obeys d/dt' J = 1/M + (2 mu/M) U''(Delta) J with J(t) = 0.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    d_f = np.atleast_1d(np.asarray(d_f, dtype=float))
    k, d_f = np.broadcast_arrays(k, d_f)
    n = k.size
    M, mu = spec.M, spec.mu
    ov = spec.overlap
    kk = k.ravel()

    def rhs(_, y):
        d = y[:n]
        return np.concatenate([
            (kk + 2.0 * mu * ov.dU(d)) / M,
            -ov.U(d),                     # integrating backward accumulates +int U
            1.0 / M + (2.0 * mu / M) * ov.d2U(d) * y[2 * n:],
        ])

    y_end = np.concatenate([d_f.ravel(), np.zeros(n), np.zeros(n)])
    if t == 0:
        y0 = y_end
    else:
        y0 = ode_solve_final(rhs, y_end, t, 0.0, settings or _ODE)
    shape = k.shape
    return y0[:n].reshape(shape), y0[n:2 * n].reshape(shape), y0[2 * n:].reshape(shape)


def delta_trajectory(spec: MattressSpec, k: float, d_f: float, t: float, t_query: float,
                     settings: Optional[OdeSettings] = None) -> float:
    """Delta(t_query) on the characteristic with Delta(t) = d_f."""
    if not (t >= t_query >= 0):
        raise DomainError("need t >= t_query >= 0")
    M, mu, ov = spec.M, spec.mu, spec.overlap

    def rhs(_, d):
        return (k + 2.0 * mu * ov.dU(d)) / M

    if t == t_query:
        return float(d_f)
    return ode_solve_final(rhs, float(d_f), t, t_query, settings or _ODE)


def shoot_K(spec: MattressSpec, d_f: float, d_i: float, t: float,
            tol: float = 1e-13, max_expand: int = 60) -> float:
    """Constant K with Delta(0) = d_i on the characteristic ending at d_f.

    Delta(0) is strictly decreasing in k (its k-derivative is negative), so
    the bracket is grown geometrically around the free-particle guess.
    """
    if not t > 0:
        raise DomainError("t must be > 0")
    M = spec.M
    guess = M * (d_f - d_i) / t
    width = M * (abs(d_f - d_i) + 1.0) / t

    def res(k):
        return float(_bundle(spec, k, d_f, t)[0][0]) - d_i

    lo, hi = guess - width, guess + width
    r_lo, r_hi = res(lo), res(hi)
    for _ in range(max_expand):
        if r_lo * r_hi <= 0:
            break
        # residual decreases with k: both negative -> go lower, both positive -> go higher
        if r_lo < 0:
            lo -= 2 * width
            r_lo = res(lo)
        else:
            hi += 2 * width
            r_hi = res(hi)
        width *= 2
    if not r_lo * r_hi <= 0:
        raise ShootingError(f"no bracket for K found on k in [{lo:.6g}, {hi:.6g}]")
    return shoot_scalar(res, (lo, hi), tol=tol * max(1.0, abs(guess)))


def jacobian_dDelta0_dk(spec: MattressSpec, k: float, d_f: float, t: float) -> float:
    """dDelta(0)/dk = -(1/M) int_0^t exp(-(2 mu/M) int_0^t' U''(Delta)) dt'."""
    return float(_bundle(spec, k, d_f, t)[2][0])


def decoherence_weight_integral(spec: MattressSpec, k: float, d_f: float, t: float) -> float:
    """int_0^t U(Delta(t')) dt' along the characteristic."""
    return float(_bundle(spec, k, d_f, t)[1][0])


def normalization_N(spec: MattressSpec, t: float) -> float:
    """N(t) = 2 mu U''(0) / (1 - exp(-(2 mu/M) U''(0) t)); M/t when mu = 0."""
    if not t > 0:
        raise DomainError("t must be > 0")
    c = spec.rate
    if c == 0:
        return spec.M / t
    return 2.0 * spec.mu * spec.u2 / (-math.expm1(-c * t))


# ------------------------------------------------------------------ grids


@dataclass(frozen=True)
class RengiwGrid:
    """R(k, Delta) on a uniform (k, Delta) lattice; values[i, j] = R(k_i, Delta_j)."""

    k_start: float
    k_step: float
    nk: int
    d_start: float
    d_step: float
    nd: int
    values: np.ndarray
    flags: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.nk, self.nd):
            raise DomainError(f"values shape {v.shape} != ({self.nk}, {self.nd})")
        if not (self.k_step > 0 and self.d_step > 0):
            raise DomainError("grid steps must be > 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def k(self) -> np.ndarray:
        return self.k_start + self.k_step * np.arange(self.nk)

    @property
    def delta(self) -> np.ndarray:
        return self.d_start + self.d_step * np.arange(self.nd)

    @classmethod
    def from_function(cls, fn: Callable, k: np.ndarray, delta: np.ndarray) -> "RengiwGrid":
        K, D = np.meshgrid(k, delta, indexing="ij")
        return cls(float(k[0]), float(k[1] - k[0]), k.size, float(delta[0]),
                   float(delta[1] - delta[0]), delta.size, fn(K, D))

    def value_at(self, i: int, d) -> np.ndarray:
        """Linear interpolation along Delta in row i; raises outside the axis."""
        d = np.asarray(d, dtype=float)
        pos = (d - self.d_start) / self.d_step
        if np.any(pos < -1e-9) or np.any(pos > self.nd - 1 + 1e-9):
            raise DomainError("Delta outside grid")
        pos = np.clip(pos, 0, self.nd - 1)
        j = np.minimum(np.floor(pos).astype(int), self.nd - 2)
        w = pos - j
        row = self.values[i]
        return (1 - w) * row[j] + w * row[j + 1]

    def at(self, k: float, d: float) -> complex:
        i = int(round((k - self.k_start) / self.k_step))
        if abs(self.k_start + i * self.k_step - k) > 1e-9 * max(1.0, abs(k)):
            raise DomainError("k is not a grid node")
        return complex(self.value_at(i, d))


def gaussian_packet_rengiw(sigma: float, x0: float = 0.0, p0: float = 0.0) -> Callable:
    """R(k, Delta) of a pure Gaussian packet of width sigma at (x0, p0)."""
    def R(k, d):
        k = np.asarray(k, dtype=float)
        d = np.asarray(d, dtype=float)
        return np.exp(-1j * k * x0 - 0.5 * sigma ** 2 * k * k
                      - d * d / (8.0 * sigma ** 2) + 1j * p0 * d)
    return R


def propagate_rengiw(spec: MattressSpec, R0, t: float, k=None, delta=None,
                     settings: Optional[OdeSettings] = None) -> RengiwGrid:
    """R(k, Delta_f; t) = N(t) exp(-4 mu T int_0^t U) R0(k, Delta(0)) |dDelta(0)/dk|.

    ``R0`` is a :class:`RengiwGrid` (output on the same lattice) or a
    callable R0(k, Delta) (output on the ``k`` and ``delta`` axes).  For a
    grid the four corners are checked before the full solve, and every
    back-propagated Delta(0) must stay inside the Delta axis.

    ``flags`` marks nodes where U''(Delta_f) > 2 M T U(Delta_f), i.e.
    outside the high-temperature premise of the model.
    """
    if t < 0:
        raise DomainError("t must be >= 0")
    grid_in = isinstance(R0, RengiwGrid)
    if grid_in:
        k_axis, d_axis = R0.k, R0.delta
    else:
        if k is None or delta is None:
            raise DomainError("callable R0 needs k and delta axes")
        k_axis, d_axis = np.asarray(k, float), np.asarray(delta, float)
    K, D = np.meshgrid(k_axis, d_axis, indexing="ij")
    ov = spec.overlap
    flags = ov.d2U(D) > 2.0 * spec.M * spec.T * ov.U(D)
    flags &= D != 0
    if t == 0:
        vals = R0.values if grid_in else R0(K, D)
        return _wrap(k_axis, d_axis, vals, flags)

    lo, hi = d_axis[0] - 1e-9 * abs(d_axis[0]), d_axis[-1] + 1e-9 * abs(d_axis[-1])
    if grid_in:
        ck = np.array([k_axis[0], k_axis[0], k_axis[-1], k_axis[-1]])
        cd = np.array([d_axis[0], d_axis[-1], d_axis[0], d_axis[-1]])
        c0 = _bundle(spec, ck, cd, t, settings)[0]
        for kk, dd, d0 in zip(ck, cd, c0):
            if not lo <= d0 <= hi:
                raise DomainError(
                    f"corner node (k={kk:.6g}, Delta_f={dd:.6g}) maps to Delta(0)={d0:.6g} "
                    f"outside the R0 axis [{d_axis[0]:.6g}, {d_axis[-1]:.6g}]"
                )
    d0, iu, jac = _bundle(spec, K, D, t, settings)
    if grid_in:
        bad = (d0 < lo) | (d0 > hi)
        if np.any(bad):
            i, j = np.argwhere(bad)[0]
            raise DomainError(
                f"node (k={K[i, j]:.6g}, Delta_f={D[i, j]:.6g}) maps to Delta(0)={d0[i, j]:.6g} "
                f"outside the R0 axis"
            )
        r0 = np.empty(K.shape, dtype=complex)
        for i in range(K.shape[0]):
            r0[i] = R0.value_at(i, d0[i])
    else:
        r0 = np.asarray(R0(K, d0), dtype=complex)
    vals = normalization_N(spec, t) * np.exp(-4.0 * spec.mu * spec.T * iu) * r0 * np.abs(jac)
    return _wrap(k_axis, d_axis, vals, flags)


def rengiw_at_points(spec: MattressSpec, R0: Callable, t: float, k, delta,
                     settings: Optional[OdeSettings] = None) -> tuple[np.ndarray, np.ndarray]:
    """Propagate a callable R0 to scattered (k, Delta_f) nodes.

    Returns (values, flags) broadcast to the common shape of ``k`` and
    ``delta``; flags mean the same as in :func:`propagate_rengiw`.
    """
    if t < 0:
        raise DomainError("t must be >= 0")
    K, D = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(delta, dtype=float))
    ov = spec.overlap
    flags = (np.asarray(ov.d2U(D)) > 2.0 * spec.M * spec.T * np.asarray(ov.U(D))) & (D != 0)
    if t == 0:
        return np.asarray(R0(K, D), dtype=complex), flags
    d0, iu, jac = _bundle(spec, K, D, t, settings)
    vals = normalization_N(spec, t) * np.exp(-4.0 * spec.mu * spec.T * iu) \
        * np.asarray(R0(K, d0), dtype=complex) * np.abs(jac)
    return vals, flags


def _wrap(k_axis, d_axis, vals, flags) -> RengiwGrid:
    return RengiwGrid(float(k_axis[0]), float(k_axis[1] - k_axis[0]), k_axis.size,
                      float(d_axis[0]), float(d_axis[1] - d_axis[0]), d_axis.size,
                      vals, flags)


def linear_model_rengiw(spec: MattressSpec, R0: Callable, t: float, K, D) -> np.ndarray:
    """Closed-form propagation for a parabolic overlap U = u2 Delta^2/2."""
    if not isinstance(spec.overlap, ParabolicOverlap):
        raise DomainError("closed form needs a parabolic overlap")
    M, mu, T, u2 = spec.M, spec.mu, spec.T, spec.overlap.u2
    c = 2.0 * mu * u2 / M
    K = np.asarray(K, float)
    D = np.asarray(D, float)
    b = K / (M * c)
    A = D + b
    e1 = -math.expm1(-c * t)
    e2 = -math.expm1(-2.0 * c * t)
    d0 = A * math.exp(-c * t) - b
    iu = 0.5 * u2 * (A * A * e2 / (2 * c) - 2 * A * b * e1 / c + b * b * t)
    jac = e1 / (M * c)
    N = 2.0 * mu * u2 / e1
    return N * np.exp(-4.0 * mu * T * iu) * R0(K, d0) * jac


# ----------------------------------------------------------- Fourier relation


@dataclass(frozen=True)
class SigmaDeltaGrid:
    """rho(Sigma, Delta) on a uniform lattice; values[j, l] = rho(Sigma_j, Delta_l)."""

    s_start: float
    s_step: float
    d_start: float
    d_step: float
    values: np.ndarray

    @property
    def sigma(self) -> np.ndarray:
        return self.s_start + self.s_step * np.arange(self.values.shape[0])

    @property
    def delta(self) -> np.ndarray:
        return self.d_start + self.d_step * np.arange(self.values.shape[1])


def rho_from_rengiw(R: RengiwGrid) -> SigmaDeltaGrid:
    """rho(Sigma, Delta) = int dk/2pi e^{i k Sigma} R(k, Delta) by DFT along k.

    The Sigma grid has step 2 pi / (nk dk) and is centred on zero.
    """
    n, hk = R.nk, R.k_step
    hs = 2.0 * math.pi / (n * hk)
    s0 = -(n // 2) * hs
    m = np.arange(n)
    sig = s0 + hs * m
    pre = np.exp(1j * m * hk * s0)[:, None]
    # sum_m R_m e^{i k_m Sigma_j} = e^{i k0 Sigma_j} sum_m [R_m e^{i m hk s0}] e^{2 pi i m j / n}
    core = n * np.fft.ifft(R.values * pre, axis=0)
    vals = (hk / (2.0 * math.pi)) * np.exp(1j * R.k_start * sig)[:, None] * core
    return SigmaDeltaGrid(s0, hs, R.d_start, R.d_step, vals)


def rengiw_from_rho(rho: SigmaDeltaGrid, k_start: float) -> RengiwGrid:
    """Inverse of :func:`rho_from_rengiw` for the k axis starting at ``k_start``."""
    n = rho.values.shape[0]
    hs = rho.s_step
    hk = 2.0 * math.pi / (n * hs)
    m = np.arange(n)
    sig = rho.sigma
    core = rho.values * np.exp(-1j * k_start * sig)[:, None] * (2.0 * math.pi / hk)
    raw = np.fft.fft(core, axis=0) / n
    vals = raw * np.exp(-1j * m * hk * rho.s_start)[:, None]
    nd = rho.values.shape[1]
    return RengiwGrid(k_start, hk, n, rho.d_start, rho.d_step, nd, vals)


# -------------------------------------------------------------- fixed points


@dataclass(frozen=True)
class FixedPoint:
    delta: float
    stability: str


def fixed_points(spec: MattressSpec, k: float, window: Optional[float] = None,
                 n_scan: int = 4001) -> list[FixedPoint]:
    """Roots of 2 mu U'(Delta) + k = 0 on |Delta| <= window, with stability.

    U'' > 0 at a root means the characteristic runs away from it (unstable);
    U'' < 0 means it is attracting (stable).
    """
    ov = spec.overlap
    W = float(window if window is not None else ov.window())
    if not W > 0:
        raise DomainError("window must be > 0")
    if n_scan % 2 == 0:
        n_scan += 1
    grid = np.linspace(-W, W, n_scan)
    h = 2.0 * spec.mu * np.asarray(ov.dU(grid)) + k

    def fn(d):
        return 2.0 * spec.mu * float(ov.dU(d)) + k

    roots = []
    for i in range(n_scan):
        if h[i] == 0.0:
            roots.append(float(grid[i]))
    for i in range(n_scan - 1):
        if h[i] * h[i + 1] < 0:
            roots.append(shoot_scalar(fn, (grid[i], grid[i + 1]), tol=1e-14))
    step = grid[1] - grid[0]
    for r in roots:
        if abs(abs(r) - W) <= step:
            raise DomainError(f"root at Delta={r:.6g} lies on the scan window edge {W:.6g}; widen it")
    out = []
    for r in sorted(roots):
        curv = float(ov.d2U(r))
        out.append(FixedPoint(r, "unstable" if curv > 0 else "stable"))
    return out


__all__ = [
    "GaussianOverlap",
    "ParabolicOverlap",
    "SampledOverlap",
    "MattressSpec",
    "make_mattress_spec",
    "overlap_U",
    "delta_trajectory",
    "shoot_K",
    "jacobian_dDelta0_dk",
    "decoherence_weight_integral",
    "normalization_N",
    "RengiwGrid",
    "gaussian_packet_rengiw",
    "propagate_rengiw",
    "rengiw_at_points",
    "linear_model_rengiw",
    "SigmaDeltaGrid",
    "rho_from_rengiw",
    "rengiw_from_rho",
    "FixedPoint",
    "fixed_points",
]
