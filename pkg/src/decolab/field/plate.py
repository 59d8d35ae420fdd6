"""Power dissipated by a charge moving parallel to a resistive plate."""

from __future__ import annotations

import math
from typing import Optional

from ..core import DomainError


def plate_power(Q: float, rho_r: float, v: float, z: float, b: Optional[float] = None,
                thin_layer: bool = True) -> float:
    """P = Q^2 rho_r v^2 / (16 pi z^3), times 2b/(3z) for a conducting layer of thickness b.

    The layer factor is derived for b < z; ``thin_layer=False`` skips that
    check and evaluates the formula as written.
    """
    for name, val in (("Q", Q), ("rho_r", rho_r), ("v", v), ("z", z)):
        if not (val > 0 and math.isfinite(val)):
            raise DomainError(f"{name} must be finite and > 0")
    P = Q * Q * rho_r * v * v / (16.0 * math.pi * z ** 3)
    if b is not None:
        if not b > 0:
            raise DomainError("layer thickness b must be > 0")
        if thin_layer and not b < z:
            raise DomainError("layer thickness b must be < z")
        P *= 2.0 * b / (3.0 * z)
    return P


__all__ = ["plate_power"]
