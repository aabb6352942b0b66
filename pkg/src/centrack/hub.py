"""Exact hub-size calculators.

A seed hub around v1 (a star of k leaves for UA/PA, an r-ball for diffusion)
raises the chance that v1 ends up the persistent centroid. The symmetry
probabilities below are the chance that the next vertices copy the hub around
v2 and make v1 and v2 indistinguishable; v1 then loses with probability at
least half of that. All values are exact rationals.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import pandas as pd

from .config import cfg
from .errors import DomainError, SizeOverflow, UnsupportedModel
from .models.factory import DIFFUSION, PREFERENTIAL, UNIFORM, ModelSpec
from .models.seeds import rball_size


def as_fraction(x):
    """Exact value of x; floats are read through their shortest decimal form."""
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def _check_k(k):
    if k < 2:
        raise DomainError(f"[!] hub size must be >= 2, got {k}")


def symmetry_prob_pa(k):
    _check_k(k)
    return Fraction(1, 2 ** (k - 1) * math.comb(2 * k - 2, k - 1))


def symmetry_prob_pa_product(k):
    """Step by step: vertex v_{k+1+i} joins v2 with probability i / (2k + 2i - 2)."""
    _check_k(k)
    p = Fraction(1)
    for i in range(1, k):
        p *= Fraction(i, 2 * k + 2 * i - 2)
    return p


def symmetry_prob_ua(k):
    _check_k(k)
    return Fraction(math.factorial(k), math.factorial(2 * k - 1))


def symmetry_prob_ua_product(k):
    _check_k(k)
    p = Fraction(1)
    for i in range(1, k):
        p *= Fraction(1, k + i)
    return p


def _level(d, r):
    if d < 3:
        raise DomainError(f"[!] diffusion symmetry needs d >= 3, got {d}")
    if r < 1:
        raise DomainError(f"[!] radius must be >= 1, got {r}")
    M = (d - 1) ** r
    if M > cfg.SYMMETRY_MAX_LEVEL:
        raise SizeOverflow(f"[!] (d-1)^r = {M} exceeds SYMMETRY_MAX_LEVEL "
                           f"({cfg.SYMMETRY_MAX_LEVEL})")
    return M


def symmetry_prob_diffusion(d, r):
    """Chance that the next (d-1)^r vertices fill level r behind v2."""
    M = _level(d, r)
    denom = 1
    for i in range(M):
        denom *= d * M + i * (d - 2)
    return Fraction(math.factorial(M), denom)


def symmetry_prob_diffusion_product(d, r):
    M = _level(d, r)
    p = Fraction(1)
    for i in range(M):
        p *= Fraction(M - i, d * M + i * (d - 2))
    return p


def symmetry_prob(spec, size):
    """P_k for UA/PA (size = k) or the r-ball symmetry probability (size = r)."""
    if spec.kind == PREFERENTIAL:
        return symmetry_prob_pa(size)
    if spec.kind == UNIFORM:
        return symmetry_prob_ua(size)
    if spec.kind == DIFFUSION:
        return symmetry_prob_diffusion(spec.d, size)
    raise UnsupportedModel(f"[!] no symmetry probability for {spec.kind}")


def sufficient_hub_size(epsilon):
    """Smallest K with 5 * 2^(-K/4) < epsilon, i.e. 2^K > (5 / epsilon)^4.

    The bound behind it only holds once K exceeds an unspecified constant;
    this is the value of the formula, nothing more.
    """
    eps = as_fraction(epsilon)
    if eps <= 0:
        raise DomainError(f"[!] epsilon must be positive, got {epsilon}")
    target = (5 / eps) ** 4
    p, q = target.numerator, target.denominator
    K = max(0, (p // q).bit_length() - 1)
    while (q << K) <= p:
        K += 1
    return K


def sufficient_radius(d, epsilon):
    """Smallest r whose r-ball holds at least sufficient_hub_size(epsilon) vertices."""
    if d < 3:
        raise DomainError(f"[!] r-balls need d >= 3, got {d}")
    K = sufficient_hub_size(epsilon)
    r = 0
    while rball_size(d, r) < K:
        r += 1
    return r


@dataclass
class NecessaryBound:
    model: str
    epsilon: Fraction
    # 'k' for hub sizes, 'r' for ball radii
    unit: str
    exact: Optional[int]
    relaxed: Optional[int]
    sufficient: int

    def to_dict(self):
        return {'model': self.model,
                'epsilon': str(self.epsilon),
                'epsilon_float': float(self.epsilon),
                'unit': self.unit,
                'necessary_exact': self.exact,
                'necessary_relaxed': self.relaxed,
                'sufficient': self.sufficient}


def _first(predicate, start, stop=None):
    n = start
    while stop is None or n <= stop:
        if predicate(n):
            return n
        n += 1
    return None


def necessary_bound_report(model, epsilon):
    """Smallest hub size (or radius) at which v1 can fail with probability <= epsilon.

    The exact column solves P <= 2 epsilon with the exact symmetry
    probability; the relaxed column solves the weaker closed-form inequality
    the exact value is bounded by (PA: 2^(3k-3) >= 1 / (2 epsilon); UA:
    k log k >= log(1 / epsilon), ignoring lower order terms; diffusion: the
    logarithmic bound on the r-ball symmetry probability).
    """
    if isinstance(model, str):
        model = ModelSpec.parse(model)
    eps = as_fraction(epsilon)
    if not 0 < eps < Fraction(1, 2):
        raise DomainError(f"[!] epsilon must lie in (0, 1/2), got {epsilon}")
    two_eps = 2 * eps

    if model.kind == PREFERENTIAL:
        exact = _first(lambda k: symmetry_prob_pa(k) <= two_eps, 2)
        relaxed = _first(lambda k: 2 ** (3 * k - 3) * two_eps >= 1, 2)
        return NecessaryBound(model.name, eps, 'k', exact, relaxed,
                              sufficient_hub_size(eps))

    if model.kind == UNIFORM:
        exact = _first(lambda k: symmetry_prob_ua(k) <= two_eps, 2)
        log_inv = math.log(1 / eps)
        relaxed = _first(lambda k: k * math.log(k) >= log_inv, 2)
        return NecessaryBound(model.name, eps, 'k', exact, relaxed,
                              sufficient_hub_size(eps))

    if model.kind == DIFFUSION:
        d = model.d
        if d < 3:
            raise UnsupportedModel("[!] diff:2 has no r-ball seeds")
        max_r = 0
        while (d - 1) ** (max_r + 1) <= cfg.SYMMETRY_MAX_LEVEL:
            max_r += 1
        # None when no radius within SYMMETRY_MAX_LEVEL is small enough
        exact = _first(lambda r: symmetry_prob_diffusion(d, r) <= two_eps, 1, max_r)
        log_target = math.log(1 / two_eps)
        relaxed = _first(
            lambda r: ((d - 1) ** r * math.log(d - 2)
                       + (d ** (r + 1) + (d - 1) ** r) * math.log(2)) >= log_target, 1)
        return NecessaryBound(model.name, eps, 'r', exact, relaxed,
                              sufficient_radius(d, eps))

    raise UnsupportedModel(f"[!] no hub bound for {model.kind}")


def gap_table(epsilons, models=('pa', 'ua', 'diff:3')):
    """Necessary against sufficient hub sizes (radii) over a grid of epsilons."""
    rows = []
    for model in models:
        for eps in epsilons:
            rows.append(necessary_bound_report(model, eps).to_dict())
    return pd.DataFrame(rows, columns=['model', 'epsilon', 'epsilon_float', 'unit',
                                       'necessary_exact', 'necessary_relaxed',
                                       'sufficient'])
