"""Exponential-integral family and the thermal coth factor.

Branches
--------
Ei(x), x > 0 : power series up to x = 40, asymptotic series beyond.
Ei(x), x < 0 : -E1(|x|); E1 by its series for |x| <= 1 and by a
    continued fraction (modified Lentz) above.
g(z) = [e^z Ei(-z) + e^-z Ei(z)] / 2 : cancellation-free series for
    z <= 2, the two exponential integrals for 2 < z <= 30, asymptotic
    series sum_{k odd} k!/z^(k+1) for z > 30.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import DomainError

EULER = 0.57721566490153286060651209008240243

EI_SERIES_MAX = 40.0
SYM_SERIES_MAX = 2.0
SYM_ASYMPTOTIC_MIN = 30.0

_TINY = 1e-300


def _ei_series(x: float) -> float:
    # C + ln|x| + sum x^n / (n n!)
    term = 1.0
    acc = 0.0
    n = 1
    while True:
        term *= x / n
        add = term / n
        acc += add
        if abs(add) <= 1e-17 * abs(acc) or n > 500:
            break
        n += 1
    return EULER + math.log(abs(x)) + acc


def _ei_asymptotic_scaled(x: float) -> float:
    """x e^-x Ei(x) for large positive x."""
    acc = 1.0
    term = 1.0
    k = 1
    while k < 200:
        new = term * k / x
        if new > term or new < 1e-17:
            if new < term:
                acc += new
            break
        term = new
        acc += term
        k += 1
    return acc


def _e1_cf_scaled(z: float) -> float:
    """e^z E1(z) by continued fraction, z > 1."""
    b = z + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h


def _e1(z: float) -> float:
    if z <= 1.0:
        term = 1.0
        acc = 0.0
        n = 1
        while True:
            term *= -z / n
            add = term / n
            acc += add
            if abs(add) <= 1e-17 * max(abs(acc), 1e-300) or n > 200:
                break
            n += 1
        return -EULER - math.log(z) - acc
    return _e1_cf_scaled(z) * math.exp(-z)


def exp_integral_ei(x: float) -> float:
    """Exponential integral Ei(x) (principal value for x > 0)."""
    x = float(x)
    if x == 0.0 or not math.isfinite(x):
        raise DomainError("Ei(x) requires finite nonzero x")
    if x < 0:
        return -_e1(-x)
    if x <= EI_SERIES_MAX:
        return _ei_series(x)
    return math.exp(x) / x * _ei_asymptotic_scaled(x)


def _even_odd_sums(z: float) -> tuple[float, float]:
    """E = sum_{n even>=2} z^n/(n n!), O = sum_{n odd} z^n/(n n!)."""
    even = odd = 0.0
    term = 1.0
    n = 1
    while True:
        term *= z / n
        add = term / n
        if n % 2:
            odd += add
        else:
            even += add
        if add <= 1e-18 * (odd + even) or n > 200:
            break
        n += 1
    return even, odd


def _odd_tail(z: float) -> float:
    """sum_{n odd>=3} z^n/(n n!), i.e. O - z without the cancellation."""
    acc = 0.0
    term = z ** 3 / 6.0
    n = 3
    while n < 200:
        add = term / n
        acc += add
        if add <= 1e-18 * acc:
            break
        term *= z * z / ((n + 1) * (n + 2))
        n += 2
    return acc


def _cosh_minus_one(z: float) -> float:
    return 2.0 * math.sinh(0.5 * z) ** 2


def _series_tail(z: float, start: int, step: int = 2) -> float:
    """sum_{m>=start, step} z^m / m!, for cosh/sinh remainders."""
    term = z ** start / math.factorial(start)
    acc = 0.0
    m = start
    while True:
        acc += term
        term *= z * z / ((m + 1) * (m + 2)) if step == 2 else z / (m + 1)
        m += step
        if term <= 1e-18 * acc:
            break
    return acc


def _sym_asymptotic(z: float) -> float:
    # sum_{k odd} k! / z^(k+1)
    acc = 0.0
    term = 1.0 / (z * z)  # k = 1
    k = 1
    while k < 400:
        acc += term
        new = term * (k + 1) * (k + 2) / (z * z)
        if new >= term or new < 1e-18 * acc:
            break
        term = new
        k += 2
    return acc


def _check_positive(z: float, name: str) -> float:
    z = float(z)
    if not (z > 0) or not math.isfinite(z):
        raise DomainError(f"{name} requires finite z > 0, got {z!r}")
    return z


def symmetric_ei(z: float) -> float:
    """g(z) = [e^z Ei(-z) + e^-z Ei(z)] / 2 for z > 0."""
    z = _check_positive(z, "symmetric_ei")
    if z <= SYM_SERIES_MAX:
        even, odd = _even_odd_sums(z)
        return math.cosh(z) * (EULER + math.log(z) + even) - math.sinh(z) * odd
    if z <= SYM_ASYMPTOTIC_MIN:
        return 0.5 * (-_e1_cf_scaled(z) + math.exp(-z) * _ei_series(z))
    return _sym_asymptotic(z)


def symmetric_ei_direct(z: float) -> float:
    """Direct two-integral evaluation (no asymptotics), for branch checks."""
    z = _check_positive(z, "symmetric_ei_direct")
    return 0.5 * (-_e1_cf_scaled(z) + math.exp(-z) * _ei_series(z))


def kappa(n: int, z: float) -> float:
    """kappa_1 / kappa_3 zero-temperature kernels; kappa(n, 0) = 0."""
    if n not in (1, 3):
        raise DomainError("kappa is defined for n in {1, 3}")
    z = float(z)
    if z == 0.0:
        return 0.0
    z = _check_positive(z, "kappa")
    lead = EULER + math.log(z)
    if z <= SYM_SERIES_MAX:
        even, odd = _even_odd_sums(z)
        ch, sh = math.cosh(z), math.sinh(z)
        # kappa_3 = (1 - cosh z) lead - cosh z E + sinh z O
        k3 = -_cosh_minus_one(z) * lead - ch * even + sh * odd
        if n == 3:
            return k3
        # kappa_1 = (cosh z - 1 - z^2/2) lead + cosh z E - sinh z O
        return _series_tail(z, 4) * lead + ch * even - sh * odd
    g = symmetric_ei(z)
    if n == 3:
        return lead - g
    return g - (1.0 + 0.5 * z * z) * lead


def kappa1_reduced(z: float) -> float:
    """kappa_1(z) + 3 z^2 / 4, free of the O(z^2) part that cancels in
    symmetric second differences; accurate to full precision as z -> 0."""
    z = float(z)
    if z == 0.0:
        return 0.0
    z = _check_positive(z, "kappa1_reduced")
    if z > SYM_SERIES_MAX:
        return kappa(1, z) + 0.75 * z * z
    even, odd = _even_odd_sums(z)
    even_tail = _series_even_tail(z)
    odd_tail = _odd_tail(z)
    lead = EULER + math.log(z)
    return (_series_tail(z, 4) * lead + _cosh_minus_one(z) * even + even_tail
            - z * odd_tail - _series_tail(z, 3) * odd)


def _series_even_tail(z: float) -> float:
    """sum_{n even>=4} z^n/(n n!)."""
    acc = 0.0
    term = z ** 4 / 24.0
    n = 4
    while n < 200:
        add = term / n
        acc += add
        if add <= 1e-18 * acc:
            break
        term *= z * z / ((n + 1) * (n + 2))
        n += 2
    return acc


def _differentiate(expr: dict) -> dict:
    # g' = -a + 1/z, a' = -g, (z^m l)' = m z^(m-1) l + z^(m-1), (z^m)' = m z^(m-1)
    out: dict = {}

    def add(key, c):
        if c != 0:
            out[key] = out.get(key, 0.0) + c

    for (kind, m), c in expr.items():
        if kind == "g":
            add(("a", 0), -c)
            add(("p", -1), c)
        elif kind == "a":
            add(("g", 0), -c)
        elif kind == "l":
            add(("l", m - 1), m * c)
            add(("p", m - 1), c)
        else:
            add(("p", m - 1), m * c)
    return out


def kappa_derivative(n: int, order: int, z: float) -> float:
    """d^order kappa_n / dz^order at z > 0.

    Uses g' = 1/z - a and a' = -g for the symmetric and antisymmetric Ei
    combinations, so every derivative is a finite combination of g(z),
    a(z), powers of z and powers times (C + ln z).
    """
    if n not in (1, 3):
        raise DomainError("kappa is defined for n in {1, 3}")
    if order < 0:
        raise DomainError("order must be >= 0")
    z = _check_positive(float(z), "kappa_derivative")
    if order == 0:
        return kappa(n, z)
    if n == 3:
        expr = {("l", 0): 1.0, ("g", 0): -1.0}
    else:
        expr = {("g", 0): 1.0, ("l", 0): -1.0, ("l", 2): -0.5}
    for _ in range(order):
        expr = _differentiate(expr)
    lead = EULER + math.log(z)
    total = 0.0
    for (kind, m), c in expr.items():
        if kind == "g":
            total += c * symmetric_ei(z)
        elif kind == "a":
            total += c * antisymmetric_ei(z)
        elif kind == "l":
            total += c * z ** m * lead
        else:
            total += c * z ** m
    return total


def antisymmetric_ei(z: float) -> float:
    """a(z) = [e^-z Ei(z) - e^z Ei(-z)] / 2 = int_0^inf sin(z u)/(1+u^2) du."""
    z = _check_positive(z, "antisymmetric_ei")
    if z <= SYM_SERIES_MAX:
        even, odd = _even_odd_sums(z)
        return -math.sinh(z) * (EULER + math.log(z) + even) + math.cosh(z) * odd
    if z <= SYM_ASYMPTOTIC_MIN:
        return 0.5 * (math.exp(-z) * _ei_series(z) + _e1_cf_scaled(z))
    acc = 0.0
    term = 1.0 / z
    k = 0
    while k < 400:
        acc += term
        new = term * (k + 1) * (k + 2) / (z * z)
        if new >= term or new < 1e-18 * acc:
            break
        term = new
        k += 2
    return acc


def sine_kernel_h(b: float) -> float:
    """Regularized int_0^inf sin(b u) / (u^2 (1 + u^2)) du (odd in b).

    Only combinations with vanishing first moment are meaningful; the
    linear-in-b constant is fixed so that h(b) = b(1 - C - ln|b|) - a(|b|).
    """
    b = float(b)
    if b == 0.0:
        return 0.0
    sgn = 1.0 if b > 0 else -1.0
    b = abs(b)
    if b <= SYM_SERIES_MAX:
        even, odd = _even_odd_sums(b)
        sinh_minus = _series_tail(b, 3)                 # sinh b - b
        odd_minus = _odd_tail(b)                       # O - b
        cosh_odd_minus = _cosh_minus_one(b) * odd + odd_minus
        val = sinh_minus * (EULER + math.log(b)) + math.sinh(b) * even - cosh_odd_minus
        return sgn * val
    return sgn * (b * (1.0 - EULER - math.log(b)) - antisymmetric_ei(b))


def coth_half(x):
    """coth(x/2) for x > 0 (x = beta * omega); accepts arrays.

    Uses 2/x + x/6 below 1e-4 and returns 1 above 40.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("coth_half requires x > 0")
    with np.errstate(over="ignore"):
        mid = 1.0 / np.tanh(0.5 * np.clip(xa, 1e-4, 40.0))
    out = np.where(xa < 1e-4, 2.0 / xa + xa / 6.0, np.where(xa > 40.0, 1.0, mid))
    return float(out) if out.ndim == 0 else out


def thermal_factor(omega, beta: float):
    """coth(beta omega / 2), with beta = inf giving 1."""
    if math.isinf(beta):
        return np.ones_like(np.asarray(omega, dtype=float)) if np.ndim(omega) else 1.0
    return coth_half(beta * np.asarray(omega, dtype=float))


__all__ = [
    "kappa1_reduced",
    "kappa_derivative",
    "EULER",
    "exp_integral_ei",
    "symmetric_ei",
    "symmetric_ei_direct",
    "kappa",
    "antisymmetric_ei",
    "sine_kernel_h",
    "coth_half",
    "thermal_factor",
]
