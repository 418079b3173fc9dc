"""Bessel functions of the first kind at integer order, and their zeros."""

from __future__ import annotations

import math

from scipy.optimize import brentq

MAX_ZERO_ORDER = 5
MAX_ZERO_INDEX = 10

# below this |x| the ascending series is used directly
_SERIES_LIMIT = 2.0


def _series(n: int, x: float) -> float:
    half = 0.5 * x
    term = half**n / math.factorial(n)
    total = term
    q = -half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + n))
        total += term
        if abs(term) < 1e-17 * abs(total) or k > 200:
            return total


def _miller(n: int, x: float) -> float:
    # backward recurrence from well above max(n, x); normalized with
    # J0 + 2*(J2 + J4 + ...) = 1
    start = int(max(n, x) + 20 + 3 * math.sqrt(max(n, x)))
    start += start % 2
    j_next, j_cur = 0.0, 1e-30
    norm = 0.0
    result = 0.0
    for k in range(start, 0, -1):
        j_prev = 2 * k / x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds the (unnormalized) J_{k-1}
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            result *= 1e-250
            norm *= 1e-250
        if k - 1 == n:
            result = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2 * j_cur
    norm += j_cur
    return result / norm


def bessel_j(n: int, x: float) -> float:
    """J_n(x) for integer ``n >= 0`` and real ``x``."""
    if n < 0:
        raise ValueError("negative order: use bessel_parity")
    if not math.isfinite(x):
        raise ValueError(f"argument must be finite, got {x}")
    if x < 0:
        return (-1) ** n * bessel_j(n, -x)
    if x == 0:
        return 1.0 if n == 0 else 0.0
    if x <= _SERIES_LIMIT:
        return _series(n, x)
    return _miller(n, x)


def bessel_parity(n: int, x: float) -> float:
    """J_n(x) for any integer ``n`` using ``J_{-n} = (-1)^n J_n``."""
    if n >= 0:
        return bessel_j(n, x)
    return (-1) ** (-n) * bessel_j(-n, x)


def bessel_zero(n: int, k: int) -> float:
    """The ``k``-th positive zero of J_n."""
    if not 0 <= n <= MAX_ZERO_ORDER:
        raise ValueError(f"order must be in 0..{MAX_ZERO_ORDER}, got {n}")
    if not 1 <= k <= MAX_ZERO_INDEX:
        raise ValueError(f"zero index must be in 1..{MAX_ZERO_INDEX}, got {k}")
    # consecutive zeros are ~pi apart (never closer than ~2.4), so a scan with
    # step 1 sees every sign change exactly once
    step = 1.0
    found = 0
    lo = float(n) if n > 0 else 0.5
    f_lo = bessel_j(n, lo)
    while True:
        hi = lo + step
        f_hi = bessel_j(n, hi)
        if f_lo == 0.0:
            found += 1
            if found == k:
                return lo
        elif f_lo * f_hi < 0:
            found += 1
            if found == k:
                return brentq(lambda x: bessel_j(n, x), lo, hi, xtol=1e-14, rtol=1e-15)
        lo, f_lo = hi, f_hi
        if lo > 100:
            raise RuntimeError(f"failed to bracket zero {k} of J_{n}")
