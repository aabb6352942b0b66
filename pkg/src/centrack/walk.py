"""Weighted up/right lattice walk behind the two-centroid race.

At state (i, j) the walk steps right with probability

    R(i, j) = (alpha i + beta) / (alpha (i + j) + 2 beta)

and up with the complementary probability U(i, j). Started at (A, 1) below
the diagonal, f(A) is the probability that it ever reaches a diagonal state
(m, m). Every path from (A, B) to (m, m) has the same probability, so

    f(A, m) = theta_paths(A, 1, m) * path_prob(params, A, 1, m)

and f(A) is the sum over m. The sum is evaluated exactly up to
cfg.EXACT_M_MAX and in log space after that; hit_prob_dp propagates the
reach probabilities directly and serves as an independent check.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
import pandas as pd
from scipy.optimize import linprog
from scipy.special import gammaln

from .config import cfg
from .errors import DomainError, UnsupportedModel
from .models.factory import DIFFUSION, PREFERENTIAL, UNIFORM


@dataclass(frozen=True)
class WalkParams:
    alpha: Fraction
    beta: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'alpha', Fraction(self.alpha))
        object.__setattr__(self, 'beta', Fraction(self.beta))
        if self.alpha <= 0:
            raise DomainError(f"[!] alpha must be positive, got {self.alpha}")
        if self.alpha + self.beta < 0:
            raise DomainError("[!] alpha + beta must be non-negative")

    @property
    def offset(self):
        """beta / alpha, the additive shift every weight carries."""
        return self.beta / self.alpha

    @property
    def u_ceil(self):
        return math.ceil(self.offset)


@dataclass(frozen=True)
class HitProbResult:
    value: float
    truncation_m: int
    tail_bound: float


def params_for_model(spec):
    if spec.kind == PREFERENTIAL:
        return WalkParams(2, -1)
    if spec.kind == UNIFORM:
        return WalkParams(1, 0)
    if spec.kind == DIFFUSION:
        if spec.d < 3:
            raise UnsupportedModel(
                f"[!] diff:{spec.d} grows a line, the walk degenerates")
        return WalkParams(spec.d - 2, 1)
    raise UnsupportedModel(f"[!] no walk for model {spec.kind}")


def step_probs(params, i, j):
    """Exact (R, U) at state (i, j)."""
    if i < 1 or j < 1:
        raise DomainError(f"[!] state ({i}, {j}) outside the quadrant")
    right = params.alpha * i + params.beta
    up = params.alpha * j + params.beta
    total = right + up
    if total <= 0:
        raise DomainError(f"[!] no admissible step from ({i}, {j})")
    return right / total, up / total


def _check_endpoints(A, B, m):
    if not 1 <= B < A:
        raise DomainError(f"[!] need 1 <= B < A, got A={A}, B={B}")
    if m < A:
        raise DomainError(f"[!] need m >= A, got m={m}, A={A}")


def theta_paths(A, B, m):
    """Monotone paths (A, B) -> (m, m) that stay strictly below the diagonal
    until the last step (reflection principle)."""
    _check_endpoints(A, B, m)
    return (math.factorial(2 * m - 1 - A - B) * (A - B)
            // (math.factorial(m - A) * math.factorial(m - B)))


def enumerate_paths(A, B, m):
    """Yields every admissible path as a string of 'R' / 'U' moves."""
    _check_endpoints(A, B, m)

    def walk(i, j, moves):
        if i == m and j == m:
            yield ''.join(moves)
            return
        if i < m:
            moves.append('R')
            yield from walk(i + 1, j, moves)
            moves.pop()
        # an up move may only touch the diagonal at (m, m)
        if j + 1 < i or (j + 1 == i == m):
            moves.append('U')
            yield from walk(i, j + 1, moves)
            moves.pop()

    yield from walk(A, B, [])


def path_prob(params, A, B, m):
    """Probability of any single admissible path (A, B) -> (m, m)."""
    _check_endpoints(A, B, m)
    c = params.offset
    if B + c < 0 or A + B + 2 * c <= 0:
        raise DomainError(f"[!] negative step weight on the way from ({A}, {B})")
    p = Fraction(1)
    for i in range(A, m):
        p *= i + c
    for j in range(B, m):
        p *= j + c
    for k in range(A + B, 2 * m):
        p /= k + 2 * c
    return p


def path_step_product(params, A, B, path):
    """Multiplies the per-step probabilities along an explicit path."""
    i, j = A, B
    p = Fraction(1)
    for move in path:
        right, up = step_probs(params, i, j)
        if move == 'R':
            p *= right
            i += 1
        else:
            p *= up
            j += 1
    return p


def _log_terms(params, A, ms):
    """log f(A, m) for an array of m, through log-gamma."""
    c = float(params.offset)
    ms = ms.astype(np.float64)
    log_theta = (gammaln(2 * ms - A - 1) + math.log(A - 1)
                 - gammaln(ms - A + 1) - gammaln(ms))
    log_p = (gammaln(ms + c) - gammaln(A + c)
             + gammaln(ms + c) - gammaln(1 + c)
             - gammaln(2 * ms + 2 * c) + gammaln(A + 1 + 2 * c))
    return log_theta + log_p


def _tail_from_terms(terms, ms, m_max):
    """C / m_max with C the smallest constant such that f(A, m) <= C / m^2
    holds over the last decade of terms, m >= TAIL_FIT_FRACTION * m_max.
    """
    terms = np.asarray(terms, dtype=np.float64)
    ms = np.asarray(ms, dtype=np.float64)
    if terms.size == 0:
        return 0.0
    keep = ms >= cfg.TAIL_FIT_FRACTION * m_max
    if not keep.any():
        keep = ms == ms.max()
    C = float(np.max(terms[keep] * ms[keep] ** 2))
    return C / m_max


def _default_m_max(A):
    return max(cfg.DEFAULT_M_MAX, 100 * A)


def _check_start(A, m_max):
    if A < 2:
        raise DomainError(f"[!] start column A must be >= 2, got {A}")
    if m_max < A:
        raise DomainError(f"[!] m_max={m_max} below A={A}")


def hit_prob_series(params, A, m_max=None):
    """f(A) as the truncated sum over m of f(A, m)."""
    if m_max is None:
        m_max = _default_m_max(A)
    _check_start(A, m_max)

    if 1 + params.offset == 0:
        # no weight on the first up step, the diagonal is never reached
        return HitProbResult(0.0, m_max, 0.0)

    exact_top = min(m_max, cfg.EXACT_M_MAX)
    exact_ms = list(range(A, exact_top + 1))
    exact_terms = [theta_paths(A, 1, m) * path_prob(params, A, 1, m)
                   for m in exact_ms]
    total = sum(exact_terms, Fraction(0))

    terms = [float(t) for t in exact_terms]
    ms = exact_ms
    if m_max > exact_top:
        log_ms = np.arange(max(A, exact_top + 1), m_max + 1)
        float_terms = np.exp(_log_terms(params, A, log_ms))
        terms = terms + float_terms.tolist()
        ms = ms + log_ms.tolist()
        value = math.fsum([float(total)] + float_terms.tolist())
    else:
        value = float(total)

    return HitProbResult(min(value, 1.0), m_max, _tail_from_terms(terms, ms, m_max))


def hit_prob_series_exact(params, A, m_max):
    """Exact rational partial sum of f(A, m) for m = A..m_max."""
    _check_start(A, m_max)
    return sum((theta_paths(A, 1, m) * path_prob(params, A, 1, m)
                for m in range(A, m_max + 1)), Fraction(0))


def hit_prob_dp(params, A, m_max=None):
    """f(A) by pushing reach probabilities along anti-diagonals.

    States are (i, j) with j < i <= m_max; mass stepping up onto the diagonal
    is absorbed and counted, mass stepping right past m_max is dropped. This
    truncation matches the series exactly.
    """
    if m_max is None:
        m_max = _default_m_max(A)
    _check_start(A, m_max)

    alpha = float(params.alpha)
    beta = float(params.beta)
    mass = np.zeros(m_max + 2)
    mass[1] = 1.0
    hit = 0.0
    terms, ms = [], []
    for s in range(A + 1, 2 * m_max):
        lo = max(1, s - m_max)
        hi = (s - 1) // 2
        if lo > hi:
            break
        j = np.arange(lo, hi + 1, dtype=np.float64)
        i = s - j
        denom = alpha * s + 2 * beta
        seg = mass[lo:hi + 1]
        right = seg * (alpha * i + beta) / denom
        up = seg * (alpha * j + beta) / denom
        if s % 2 == 1:
            # the top state (m, m - 1) steps onto the diagonal
            absorbed = float(up[-1])
            up[-1] = 0.0
            hit += absorbed
            terms.append(absorbed)
            ms.append((s + 1) // 2)
        if s - lo == m_max:
            right[0] = 0.0
        mass[lo:hi + 1] = right
        mass[hi + 1] = 0.0
        mass[lo + 1:hi + 2] += up

    return HitProbResult(min(hit, 1.0), m_max, _tail_from_terms(terms, ms, m_max))


def hit_table(params, A_range, m_max=None):
    """f(A) for every A in A_range from one backward sweep.

    h(i, j) = R h(i + 1, j) + U h(i, j + 1) with h = 1 on the diagonal and 0
    past column m_max; f(A) = h(A, 1). Returns a Series indexed by A.
    """
    A_values = sorted(set(A_range))
    if not A_values:
        raise DomainError("[!] empty A range")
    if m_max is None:
        m_max = _default_m_max(A_values[-1])
    _check_start(A_values[0], m_max)
    _check_start(A_values[-1], m_max)

    alpha = float(params.alpha)
    beta = float(params.beta)
    wanted = set(A_values)
    f = {}
    h = np.zeros(m_max + 2)
    for s in range(2 * m_max - 1, 2, -1):
        lo = max(1, s - m_max)
        hi = (s - 1) // 2
        if lo > hi:
            continue
        j = np.arange(lo, hi + 1, dtype=np.float64)
        i = s - j
        denom = alpha * s + 2 * beta
        if s % 2 == 1:
            h[hi + 1] = 1.0
        new = ((alpha * i + beta) * h[lo:hi + 1]
               + (alpha * j + beta) * h[lo + 1:hi + 2]) / denom
        if s - lo == m_max:
            # (m_max + 1, j) lies outside the truncated table
            new[0] = (alpha * j[0] + beta) * h[lo + 1] / denom
        h[lo:hi + 1] = new
        if lo == 1 and s - 1 in wanted:
            f[s - 1] = float(h[1])
    return pd.Series([f[A] for A in A_values], index=pd.Index(A_values, name='A'),
                     name='f')


@dataclass
class EnvelopeReport:
    monotone: bool
    gamma: float
    c: float
    max_residual: float
    u_ceil: int
    # first A where f(A) <= f(A + 1) fails to hold strictly, if any
    first_violation: Optional[int] = None

    @property
    def passed(self):
        return self.monotone and self.gamma <= self.u_ceil + 3


def envelope_check(params, A_range, m_max=None, table=None):
    """Checks that f decays like poly(A) / 2^A on A_range.

    Fits log2 f(A) + A = gamma log2 A + c in the minimax sense (a small linear
    program) and checks that f is strictly decreasing.
    """
    if table is None:
        table = hit_table(params, A_range, m_max)
    A = np.asarray(table.index, dtype=np.float64)
    f = table.to_numpy(dtype=np.float64)

    first_violation = None
    for a, lhs, rhs in zip(table.index[:-1], f[:-1], f[1:]):
        if not lhs > rhs:
            first_violation = int(a)
            break

    y = np.log2(f) + A
    L = np.log2(A)
    ones = np.ones_like(A)
    # variables (gamma, c, t): minimise t with |y - gamma L - c| <= t
    A_ub = np.vstack([np.column_stack([-L, -ones, -ones]),
                      np.column_stack([L, ones, -ones])])
    b_ub = np.concatenate([-y, y])
    res = linprog([0, 0, 1], A_ub=A_ub, b_ub=b_ub,
                  bounds=[(None, None), (None, None), (0, None)])
    assert res.success, f"[!] envelope fit failed: {res.message}"
    gamma, c, t = res.x
    return EnvelopeReport(first_violation is None, float(gamma), float(c),
                          float(t), params.u_ceil, first_violation)


def walk_table(params, A_range, m_max=None):
    """Per-A comparison of the series and DP solvers (the `walk` CSV)."""
    rows = []
    for A in A_range:
        series = hit_prob_series(params, A, m_max)
        dp = hit_prob_dp(params, A, m_max)
        rows.append({'A': A,
                     'f_series': series.value,
                     'f_dp': dp.value,
                     'tail_series': series.tail_bound,
                     'tail_dp': dp.tail_bound,
                     'ratio_2A': dp.value * 2.0 ** A})
    return pd.DataFrame(rows, columns=['A', 'f_series', 'f_dp', 'tail_series',
                                       'tail_dp', 'ratio_2A'])
