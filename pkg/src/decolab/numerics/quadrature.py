"""Adaptive quadrature on finite and semi-infinite intervals.

The finite-interval engine is a batched Gauss-Kronrod (10/21 point)
bisection scheme: every pending subinterval is evaluated in one vectorized
call of the integrand, so integrands must accept numpy arrays.

On [a, inf) the domain is cut into panels.  With an oscillation period
hint the panels are half periods of the oscillation and the sequence of
partial sums is extrapolated with Wynn's epsilon algorithm; without a hint
the panels grow geometrically (suited to monotone algebraic/exponential
tails) and the same extrapolation is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np


class QuadratureError(ArithmeticError):
    """Integrand produced a non-finite sample, or inputs are unusable."""


@dataclass(frozen=True)
class QuadratureSettings:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    panel_budget: int = 200_000
    period: Optional[float] = None

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be > 0")
        if self.panel_budget < 16:
            raise ValueError("panel budget must be >= 16")

    def with_tol(self, tol: float) -> "QuadratureSettings":
        return QuadratureSettings(tol, tol, self.panel_budget, self.period)


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    converged: bool
    panels: int = 0

    def __float__(self) -> float:
        return self.value


# Kronrod 21-point abscissae on [-1, 1] (non-negative half) with the
# embedded 10-point Gauss rule at the odd positions.
_XGK = np.array([
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0,
])
_WGK = np.array([
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980428623, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])          # 21 nodes, ascending
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG_FULL = np.zeros(21)
_gauss_pos = [1, 3, 5, 7, 9]
for _j, _w in zip(_gauss_pos, _WG):
    _WG_FULL[_j] = _w
    _WG_FULL[20 - _j] = _w

_MAX_DEPTH = 48
_EPS = np.finfo(float).eps


def _as_vectorized(f: Callable) -> Callable:
    probe = np.array([0.25, 0.5])
    try:
        out = np.asarray(f(probe))
        if out.shape == probe.shape:
            return f
    except Exception:
        pass
    vf = np.vectorize(f, otypes=[float])
    return vf


def _gk21(f: Callable, lo: np.ndarray, hi: np.ndarray):
    """Kronrod estimate, |K - G| error and integral of |f| per interval."""
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = centre[:, None] + half[:, None] * _NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)][0]
        raise QuadratureError(f"non-finite integrand sample at x={bad!r}")
    k = half * (y @ _WK)
    g = half * (y @ _WG_FULL)
    absk = np.abs(half) * (np.abs(y) @ _WK)
    return k, np.abs(k - g), absk


def _adaptive_batch(f: Callable, lo: np.ndarray, hi: np.ndarray,
                    abs_tol: float, rel_tol: float):
    """Integrate f over each [lo_i, hi_i]; returns values, errors, converged."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    nseg = lo.size
    vals = np.zeros(nseg)
    errs = np.zeros(nseg)
    owner = np.arange(nseg)
    budget = abs_tol / max(nseg, 1)
    width0 = np.abs(hi - lo)
    converged = True
    depth = 0
    while lo.size:
        k, e, absk = _gk21(f, lo, hi)
        frac = np.abs(hi - lo) / np.where(width0[owner] > 0, width0[owner], 1.0)
        allowed = np.maximum.reduce([
            budget * frac,
            rel_tol * np.abs(k),
            50 * _EPS * absk,
        ])
        done = (e <= allowed) | (depth >= _MAX_DEPTH)
        if depth >= _MAX_DEPTH and np.any(e > allowed):
            converged = False
        np.add.at(vals, owner[done], k[done])
        np.add.at(errs, owner[done], e[done])
        keep = ~done
        if not np.any(keep):
            break
        mid = 0.5 * (lo[keep] + hi[keep])
        lo, hi = np.concatenate([lo[keep], mid]), np.concatenate([mid, hi[keep]])
        owner = np.concatenate([owner[keep], owner[keep]])
        depth += 1
    return vals, errs, converged


def integrate_finite(f: Callable, a: float, b: float,
                     settings: Optional[QuadratureSettings] = None,
                     points: Sequence[float] = ()) -> QuadResult:
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[a, b]``.

    ``points`` are interior breakpoints (discontinuities, peaks).
    """
    s = settings or QuadratureSettings()
    if a == b:
        return QuadResult(0.0, 0.0, True, 0)
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    edges = np.unique(np.concatenate([[a, b], [p for p in points if a < p < b]]))
    f = _as_vectorized(f)
    vals, errs, ok = _adaptive_batch(f, edges[:-1], edges[1:], s.abs_tol, s.rel_tol)
    return QuadResult(sign * float(vals.sum()), float(errs.sum()), ok, edges.size - 1)


def wynn_epsilon(partial_sums: Sequence[float]) -> tuple[float, float]:
    """Wynn epsilon extrapolation of a sequence of partial sums.

    Returns the highest even-order estimate and the difference to the
    previous even-order estimate (a crude error indicator).
    """
    s = np.asarray(partial_sums, dtype=float)
    n = s.size
    if n < 3:
        return float(s[-1]), math.inf
    prev = np.zeros(n + 1)
    cur = s.copy()
    estimates = [float(s[-1])]
    for col in range(1, n):
        diff = cur[1:] - cur[:-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            nxt = prev[1:cur.size] + 1.0 / diff
        if not np.all(np.isfinite(nxt)):
            # sequence converged exactly (or stalled); stop here
            break
        prev, cur = cur, nxt
        if col % 2 == 0:
            estimates.append(float(cur[-1]))
        if cur.size < 2:
            break
    if len(estimates) < 2:
        return estimates[-1], abs(float(s[-1] - s[-2]))
    return estimates[-1], abs(estimates[-1] - estimates[-2])


def _tol(s: QuadratureSettings, value: float) -> float:
    return max(s.abs_tol, s.rel_tol * abs(value))


def integrate_semi_infinite(f: Callable, settings: Optional[QuadratureSettings] = None,
                            *, lower: float = 0.0, period: Optional[float] = None,
                            breakpoints: Sequence[float] = (),
                            scale: float = 1.0) -> QuadResult:
    """Integral of ``f`` over ``[lower, inf)`` for decaying, possibly oscillatory f.

    Parameters
    ----------
    period : oscillation period of the integrand (overrides ``settings.period``).
        Panels are aligned to half periods and their partial sums are
        accelerated with Wynn's epsilon algorithm.
    breakpoints : points where the integrand has narrow features; everything
        up to the largest breakpoint is integrated adaptively first.
    scale : width of the first geometric panel when no period is given; with
        a period, a first half period wider than 8 * scale is itself split
        geometrically starting from this width.

    The result carries ``converged=False`` when the panel budget ran out;
    the value is then the best available estimate.
    """
    s = settings or QuadratureSettings()
    period = period if period is not None else s.period
    f = _as_vectorized(f)

    bps = sorted(p for p in breakpoints if p > lower)
    head = 0.0
    head_err = 0.0
    head_ok = True
    a0 = lower
    if bps:
        edges = np.array([lower] + bps)
        v, e, head_ok = _adaptive_batch(f, edges[:-1], edges[1:], s.abs_tol, s.rel_tol)
        head, head_err = float(v.sum()), float(e.sum())
        a0 = bps[-1]

    if period is not None:
        if not (period > 0 and math.isfinite(period)):
            raise QuadratureError("period hint must be positive and finite")
        width = 0.5 * period
        w0 = scale if scale > 0 else 1.0
        if width > 8.0 * w0:
            # first half period far wider than the amplitude scale: cut it
            # geometrically so the adaptive rule sees the early structure
            m = int(math.ceil(math.log2(width / w0 + 1.0)))
            pre = a0 + np.minimum(w0 * (np.power(2.0, np.arange(m + 1)) - 1.0), width)
            v, e, pre_ok = _adaptive_batch(f, pre[:-1], pre[1:], s.abs_tol, s.rel_tol)
            head += float(v.sum())
            head_err += float(e.sum())
            head_ok = head_ok and pre_ok
            a0 = a0 + width
        edge_of = lambda j: a0 + width * j  # noqa: E731
    else:
        w0 = scale if scale > 0 else 1.0
        edge_of = lambda j: a0 + w0 * (np.power(2.0, j) - 1.0)  # noqa: E731

    sums: list[float] = []
    panel_err = 0.0
    total = head
    n_done = 0
    batch = 32
    last_estimate = None
    converged = False
    estimate = total
    est_err = math.inf
    ok = head_ok
    while n_done < s.panel_budget:
        nb = min(batch, s.panel_budget - n_done)
        j = np.arange(n_done, n_done + nb + 1, dtype=float)
        edges = edge_of(j)
        if period is None and not np.all(np.isfinite(edges)):
            break
        # panel-local tolerance: never ask more than the global target
        v, e, pok = _adaptive_batch(f, edges[:-1], edges[1:],
                                    s.abs_tol * nb, s.rel_tol)
        ok = ok and pok
        panel_err += float(e.sum())
        running = total + np.cumsum(v)
        sums.extend(running.tolist())
        total = float(running[-1])
        n_done += nb
        tail_terms = np.abs(v[-3:])
        window = sums[-40:]
        estimate, est_err = wynn_epsilon(window)
        tol = _tol(s, estimate)
        if np.all(tail_terms <= 1e-3 * tol):
            estimate, est_err = total, float(tail_terms.sum())
            converged = True
            break
        if last_estimate is not None and abs(estimate - last_estimate) <= tol and est_err <= tol:
            converged = True
            break
        last_estimate = estimate
        batch = min(batch * 2, 4096)
    error = head_err + panel_err + (est_err if math.isfinite(est_err) else abs(total))
    return QuadResult(float(estimate), float(error), bool(converged and ok), n_done)


def integrate_trig_sum(amplitude: Callable, terms: Sequence[tuple], split: float,
                       settings: Optional[QuadratureSettings] = None, *,
                       full: Optional[Callable] = None, lower: float = 0.0) -> QuadResult:
    """Integral over [lower, inf) of ``amplitude(k) * sum_j c_j trig_j(w_j k)``.

    ``terms`` holds ``(c, w, kind)`` with ``kind`` in {"cos", "sin"}; a
    ``("cos", w=0)`` term is the non-oscillating part.  On ``[lower, split]``
    the combined integrand is integrated as a whole (``full`` may supply a
    cancellation-free form of it); beyond ``split`` each term is integrated
    separately so that non-oscillating pieces use geometric panels and
    oscillating pieces use half-period panels with epsilon extrapolation.
    """
    s = settings or QuadratureSettings()
    amplitude = _as_vectorized(amplitude)
    merged: dict[tuple[str, float], float] = {}
    for c, w, kind in terms:
        if kind not in ("cos", "sin"):
            raise QuadratureError(f"unknown trig kind {kind!r}")
        w = float(w)
        if kind == "sin":
            if w == 0.0:
                continue
            if w < 0:
                c, w = -c, -w
        else:
            w = abs(w)
        key = (kind, w)
        merged[key] = merged.get(key, 0.0) + float(c)

    def combined(k):
        acc = np.zeros_like(np.asarray(k, dtype=float))
        for (kind, w), c in merged.items():
            acc = acc + c * (np.cos(w * k) if kind == "cos" else np.sin(w * k))
        return amplitude(k) * acc

    head = integrate_finite(full or combined, lower, split, s) if split > lower else QuadResult(0.0, 0.0, True)
    value, error, ok, panels = head.value, head.error, head.converged, head.panels
    width = split - lower if split > lower else (split if split > 0 else 1.0)
    for (kind, w), c in merged.items():
        if c == 0.0:
            continue
        if w == 0.0:
            r = integrate_semi_infinite(amplitude, s, lower=split, scale=width)
        else:
            trig = np.cos if kind == "cos" else np.sin
            r = integrate_semi_infinite(lambda k, w=w, trig=trig: amplitude(k) * trig(w * k),
                                        s, lower=split, period=2.0 * math.pi / w, scale=width)
        value += c * r.value
        error += abs(c) * r.error
        ok = ok and r.converged
        panels += r.panels
    return QuadResult(value, error, ok, panels)


__all__ = [
    "integrate_trig_sum",
    "QuadratureError",
    "QuadratureSettings",
    "QuadResult",
    "integrate_finite",
    "integrate_semi_infinite",
    "wynn_epsilon",
]
