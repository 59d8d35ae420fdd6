"""Independent reference implementations used by the tests.

These deliberately avoid the package's own special-function code: the
exponential integrals are summed from their power series in extended
precision.
"""

import mpmath as mp

EULER = mp.euler


def ei_series(x, dps=80):
    """Ei(x) = C + ln|x| + sum_{n>=1} x^n / (n n!), summed at ``dps`` digits."""
    with mp.workdps(dps):
        x = mp.mpf(x)
        term = mp.mpf(1)
        acc = mp.mpf(0)
        n = 0
        while True:
            n += 1
            term *= x / n
            add = term / n
            acc += add
            if n > 10 and abs(add) < mp.mpf(10) ** (-dps + 5) * (abs(acc) + 1):
                break
        return EULER + mp.log(abs(x)) + acc


def sym_ei(z, dps=80):
    """g(z) = [e^z Ei(-z) + e^-z Ei(z)] / 2 from the series."""
    with mp.workdps(dps):
        z = mp.mpf(z)
        return (mp.exp(z) * ei_series(-z, dps) + mp.exp(-z) * ei_series(z, dps)) / 2


def antisym_ei(z, dps=80):
    with mp.workdps(dps):
        z = mp.mpf(z)
        return (mp.exp(-z) * ei_series(z, dps) - mp.exp(z) * ei_series(-z, dps)) / 2


def kappa(n, z, dps=80):
    with mp.workdps(dps):
        z = mp.mpf(z)
        lead = EULER + mp.log(z)
        g = sym_ei(z, dps)
        if n == 3:
            return lead - g
        return g - (1 + z * z / 2) * lead


def sine_h(b, dps=80):
    with mp.workdps(dps):
        b = mp.mpf(b)
        s = mp.sign(b)
        b = abs(b)
        return s * (b * (1 - EULER - mp.log(b)) - antisym_ei(b, dps))


def sym_ei_asymptotic(z):
    """sum_{k odd} k!/z^(k+1), optimally truncated."""
    z = mp.mpf(z)
    acc = mp.mpf(0)
    k = 1
    term = 1 / z ** 2
    while True:
        acc += term
        nxt = term * (k + 1) * (k + 2) / z ** 2
        if nxt >= term:
            break
        term = nxt
        k += 2
    return acc
