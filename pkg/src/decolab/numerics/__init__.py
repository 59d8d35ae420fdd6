"""Quadrature, special functions, ODE integration and shooting."""

from .ode import (OdeError, OdeSettings, ShootingError, ode_solve_final,
                  ode_solve_path, shoot_scalar)
from .quadrature import (QuadratureError, QuadratureSettings, QuadResult,
                         integrate_finite, integrate_semi_infinite,
                         integrate_trig_sum, wynn_epsilon)
from .special import (EULER, antisymmetric_ei, coth_half, exp_integral_ei, kappa,
                      kappa1_reduced, kappa_derivative, sine_kernel_h, symmetric_ei, symmetric_ei_direct, thermal_factor)

__all__ = [
    "OdeError", "OdeSettings", "ShootingError", "ode_solve_final", "ode_solve_path",
    "shoot_scalar", "QuadratureError", "QuadratureSettings", "QuadResult",
    "integrate_finite", "integrate_semi_infinite", "integrate_trig_sum", "wynn_epsilon", "EULER",
    "antisymmetric_ei", "coth_half", "exp_integral_ei", "kappa", "kappa1_reduced", "kappa_derivative",
    "sine_kernel_h",
    "symmetric_ei", "symmetric_ei_direct", "thermal_factor",
]
