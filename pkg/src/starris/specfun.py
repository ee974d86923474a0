"""Special functions used by the outage and PDF formulas.

The modified Bessel functions are thin, validated wrappers over
``scipy.special`` (exponentially scaled variants are exposed for large
arguments).  The first-order Marcum Q function is summed here from its
Neumann series, with the Bessel sequence obtained by backward recurrence.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

__all__ = [
    "DomainError",
    "bessel_i0",
    "bessel_i1",
    "bessel_k",
    "log_bessel_k",
    "bessel_ive_sequence",
    "marcum_q1",
    "laguerre_half",
    "sinc_u",
    "log_factorial",
]


class DomainError(ValueError):
    """Argument outside the supported domain of a special function."""


def _as_checked(x, name="x", nonneg=True):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    if nonneg and np.any(arr < 0):
        raise DomainError(f"{name} must be >= 0")
    return arr


def _unwrap(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def bessel_i0(x, scaled=False):
    """Modified Bessel function I0 on the nonnegative axis.

    With ``scaled=True`` returns ``exp(-x) * I0(x)``, which stays finite for
    arbitrarily large ``x``.
    """
    arr = _as_checked(x)
    out = special.i0e(arr) if scaled else special.i0(arr)
    return _unwrap(out)


def bessel_i1(x, scaled=False):
    """Modified Bessel function I1 (``exp(-x) * I1(x)`` when scaled)."""
    arr = _as_checked(x)
    out = special.i1e(arr) if scaled else special.i1(arr)
    return _unwrap(out)


def log_bessel_k(n, x):
    """Natural log of K_n(x) for integer n (negative orders fold to |n|).

    Built from log K_0 and the ratios r_k = K_{k+1}/K_k, which satisfy
    r_k = 1/r_{k-1} + 2k/x.  Working with ratios keeps large orders at small
    arguments from overflowing.
    """
    n = abs(int(n))
    arr = _as_checked(x)
    if np.any(arr <= 0):
        raise DomainError("K_n(x) diverges at x <= 0")
    log_k0 = np.log(special.k0e(arr)) - arr
    if n == 0:
        return _unwrap(log_k0)
    ratio = special.k1e(arr) / special.k0e(arr)
    total = log_k0 + np.log(ratio)
    for k in range(1, n):
        ratio = 1.0 / ratio + 2.0 * k / arr
        total = total + np.log(ratio)
    return _unwrap(total)


def bessel_k(n, x):
    """Modified Bessel function of the second kind K_n(x), integer n >= 0.

    K_0 and K_1 come from scipy; higher orders use the upward recurrence
    K_{k+1} = K_{k-1} + (2k/x) K_k, which is stable in that direction.
    """
    if int(n) != n or n < 0:
        raise DomainError("order must be a nonnegative integer")
    n = int(n)
    arr = _as_checked(x)
    if np.any(arr <= 0):
        raise DomainError("K_n(x) diverges at x <= 0")
    k_prev = special.k0(arr)
    if n == 0:
        return _unwrap(k_prev)
    k_cur = special.k1(arr)
    with np.errstate(over="ignore"):
        for k in range(1, n):
            k_prev, k_cur = k_cur, k_prev + (2.0 * k / arr) * k_cur
    return _unwrap(k_cur)


def bessel_ive_sequence(n_max, x):
    """Return ``[exp(-x) I_k(x) for k in 0..n_max]`` for scalar ``x >= 0``.

    Miller's backward recurrence I_{k-1} = (2k/x) I_k + I_{k+1}, normalised
    against the scaled I_0.
    """
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise DomainError("x must be finite and >= 0")
    out = np.zeros(n_max + 1)
    if x == 0.0:
        out[0] = 1.0
        return out
    if x < 1e-6:
        # leading series term; relative error ~ x^2/4, and 2k/x would overflow below
        k = np.arange(n_max + 1)
        with np.errstate(under="ignore"):
            return np.exp(k * (math.log(x) - math.log(2.0)) - special.gammaln(k + 1.0) - x)
    start = n_max + 16 + int(math.sqrt(40.0 * max(n_max, x, 1.0)))
    i_next, i_cur = 0.0, 1e-300
    vals = np.zeros(start + 1)
    vals[start] = i_cur
    for k in range(start, 0, -1):
        i_prev = (2.0 * k / x) * i_cur + i_next
        i_next, i_cur = i_cur, i_prev
        vals[k - 1] = i_cur
        if i_cur > 1e250:
            vals[k - 1 :] *= 1e-250
            i_next *= 1e-250
            i_cur *= 1e-250
    out[:] = vals[: n_max + 1] * (special.i0e(x) / vals[0])
    return out


def _marcum_q1_scalar(a, b):
    if b == 0.0:
        return 1.0
    if a == 0.0:
        return math.exp(-0.5 * b * b)
    x = a * b
    n_max = int(x + 12.0 * math.sqrt(x) + 50.0)
    ive = bessel_ive_sequence(n_max, x)
    damp = math.exp(-0.5 * (a - b) ** 2)
    k = np.arange(n_max + 1)
    if a < b:
        terms = (a / b) ** k * ive
        q = damp * math.fsum(terms)
    else:
        terms = (b / a) ** k[1:] * ive[1:]
        q = 1.0 - damp * math.fsum(terms)
    return min(1.0, max(0.0, q))


def marcum_q1(a, b):
    """First-order Marcum Q function Q_1(a, b), broadcasting over arrays.

    Uses the Neumann series
    ``Q_1 = exp(-(a^2+b^2)/2) sum_k (a/b)^k I_k(ab)`` for a < b and its
    complement ``1 - exp(-(a^2+b^2)/2) sum_{k>=1} (b/a)^k I_k(ab)``
    otherwise, so every summand is nonnegative and no cancellation occurs.
    """
    a_arr = _as_checked(a, "a")
    b_arr = _as_checked(b, "b")
    a_b, b_b = np.broadcast_arrays(a_arr, b_arr)
    out = np.empty(a_b.shape)
    for idx in np.ndindex(a_b.shape):
        out[idx] = _marcum_q1_scalar(float(a_b[idx]), float(b_b[idx]))
    return _unwrap(out)


def laguerre_half(x):
    """Laguerre function L_{1/2}(x) for x <= 0.

    With K = -x, L_{1/2}(-K) = e^{-K/2}[(1+K) I0(K/2) + K I1(K/2)], which in
    scaled Bessel form needs no exponentials at all.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("x must be finite")
    if np.any(arr > 0):
        raise DomainError("laguerre_half is only supported for x <= 0")
    k = -arr
    out = (1.0 + k) * special.i0e(k / 2.0) + k * special.i1e(k / 2.0)
    return _unwrap(out)


def sinc_u(x):
    """Unnormalised sinc, sin(x)/x, with value 1 at the origin."""
    return _unwrap(np.sinc(np.asarray(x, dtype=float) / np.pi))


def log_factorial(n):
    return math.lgamma(n + 1.0)
