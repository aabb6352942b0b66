"""Goodness-of-fit helpers for the urn limit checks.

The regularized incomplete beta function and the Kolmogorov distribution are
evaluated here directly (continued fraction and alternating series); the
tests compare both against scipy.special / scipy.stats.
"""
import math
from typing import NamedTuple

import numpy as np
from scipy.special import betaln

from .errors import DomainError, TooFewSamples

MIN_KS_SAMPLES = 8

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10000


class KsResult(NamedTuple):
    statistic: float
    pvalue: float


def _beta_cf(a, b, x):
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"[!] incomplete beta did not converge for a={a}, b={b}, x={x}")


def reg_inc_beta(a, b, x):
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    a = float(a)
    b = float(b)
    x = float(x)
    if a <= 0 or b <= 0:
        raise DomainError(f"[!] beta parameters must be positive, got ({a}, {b})")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"[!] x={x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = a * math.log(x) + b * math.log1p(-x) - betaln(a, b)
    front = math.exp(log_front)
    # the fraction converges fast only left of the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def beta_cdf(a, b):
    """CDF of Beta(a, b) as a callable working on scalars and arrays."""
    if a <= 0 or b <= 0:
        raise DomainError(f"[!] beta parameters must be positive, got ({a}, {b})")
    return np.vectorize(lambda x: reg_inc_beta(a, b, min(max(x, 0.0), 1.0)),
                        otypes=[np.float64])


def kolmogorov_sf(y):
    """P(K > y) for the limiting Kolmogorov distribution."""
    if y < 1.1e-16:
        return 1.0

    x = -2.0 * y * y
    sign = 1.0
    p = 0.0
    r = 1.0

    while True:
        t = math.exp(x * r * r)
        p += sign * t
        if t == 0.0:
            break
        r += 1.0
        sign = -sign
        if t / p <= 1.1e-16:
            break

    return min(max(p + p, 0.0), 1.0)


def _scaled(en, d):
    return (en + 0.12 + 0.11 / en) * d


def ks_statistic(samples, cdf):
    """One-sample two-sided KS test of `samples` against `cdf`."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n < MIN_KS_SAMPLES:
        raise TooFewSamples(f"[!] KS needs at least {MIN_KS_SAMPLES} samples, got {n}")
    F = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, n + 1, dtype=np.float64)
    d = float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    return KsResult(d, kolmogorov_sf(_scaled(math.sqrt(n), d)))


def ks_two_sample(x, y):
    """Two-sample two-sided KS test; both samples need MIN_KS_SAMPLES points."""
    x = np.sort(np.asarray(x, dtype=np.float64))
    y = np.sort(np.asarray(y, dtype=np.float64))
    n1, n2 = x.size, y.size
    if min(n1, n2) < MIN_KS_SAMPLES:
        raise TooFewSamples(f"[!] KS needs at least {MIN_KS_SAMPLES} samples per side")
    data_all = np.concatenate([x, y])
    c1 = np.searchsorted(x, data_all, side='right').astype(np.int64)
    c2 = np.searchsorted(y, data_all, side='right').astype(np.int64)
    # |c1/n1 - c2/n2| on a common denominator, divided once
    d = int(np.max(np.abs(c1 * n2 - c2 * n1))) / (n1 * n2)
    en = math.sqrt(n1 * n2 / float(n1 + n2))
    return KsResult(d, kolmogorov_sf(_scaled(en, d)))
