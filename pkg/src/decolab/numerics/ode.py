"""Final-value ODE integration and bracketed scalar shooting."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq


class OdeError(ArithmeticError):
    pass


class ShootingError(ArithmeticError):
    pass


@dataclass(frozen=True)
class OdeSettings:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_steps: int = 100_000
    first_step: Optional[float] = None

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("ODE tolerances must be > 0")


def _wrap(rhs: Callable):
    def fun(t, y):
        dy = np.asarray(rhs(t, y), dtype=float)
        if not np.all(np.isfinite(dy)):
            raise OdeError(f"non-finite right-hand side at t={t!r}")
        return dy
    return fun


def _integrate(rhs, y0, t0, t1, settings: OdeSettings, dense: bool = False):
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    if t1 == t0:
        return y0.copy(), []
    solver = DOP853(_wrap(rhs), t0, y0, t1, rtol=settings.rtol, atol=settings.atol,
                    first_step=settings.first_step, vectorized=False)
    pieces = []
    steps = 0
    while solver.status == "running":
        msg = solver.step()
        steps += 1
        if solver.status == "failed":
            raise OdeError(f"ODE step failed: {msg}")
        if dense:
            pieces.append(solver.dense_output())
        if steps > settings.max_steps:
            raise OdeError(f"step budget {settings.max_steps} exhausted at t={solver.t!r}")
    return solver.y.copy(), pieces


def ode_solve_final(rhs: Callable, y_at_t_end, t_end: float, t_query: float,
                    settings: Optional[OdeSettings] = None):
    """Value at ``t_query`` of the solution with ``y(t_end) = y_at_t_end``.

    Integration runs from the final condition toward ``t_query`` (usually
    backward in time).  Scalar in, scalar out; arrays are integrated as a
    system.
    """
    s = settings or OdeSettings()
    scalar = np.ndim(y_at_t_end) == 0
    y, _ = _integrate(rhs, y_at_t_end, float(t_end), float(t_query), s)
    return float(y[0]) if scalar else y


def ode_solve_path(rhs: Callable, y_at_t_end, t_end: float, t_eval: Sequence[float],
                   settings: Optional[OdeSettings] = None) -> np.ndarray:
    """Solution sampled at ``t_eval`` (all <= t_end), integrating backward."""
    s = settings or OdeSettings()
    t_eval = np.asarray(t_eval, dtype=float)
    t_lo = float(t_eval.min())
    y_end = np.atleast_1d(np.asarray(y_at_t_end, dtype=float))
    if t_lo == t_end:
        return np.repeat(y_end[None, :], t_eval.size, axis=0)
    _, pieces = _integrate(rhs, y_end, float(t_end), t_lo, s, dense=True)
    out = np.empty((t_eval.size, y_end.size))
    for i, tq in enumerate(t_eval):
        if tq >= t_end:
            out[i] = y_end
            continue
        for p in pieces:
            lo, hi = min(p.t_min, p.t_max), max(p.t_min, p.t_max)
            if lo <= tq <= hi:
                out[i] = p(tq)
                break
        else:
            raise OdeError(f"t={tq} not covered by the integration")
    return out


def shoot_scalar(residual: Callable[[float], float], bracket: Sequence[float],
                 tol: float = 1e-12, max_iter: int = 200) -> float:
    """Root of ``residual`` inside ``bracket`` by Brent's bracketed method."""
    lo, hi = float(bracket[0]), float(bracket[1])
    flo, fhi = residual(lo), residual(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise ShootingError(
            f"no sign change on bracket [{lo}, {hi}] (residuals {flo:.3g}, {fhi:.3g})"
        )
    try:
        return brentq(residual, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=max_iter)
    except RuntimeError as exc:
        raise ShootingError(str(exc)) from exc


__all__ = ["OdeError", "ShootingError", "OdeSettings", "ode_solve_final",
           "ode_solve_path", "shoot_scalar"]
