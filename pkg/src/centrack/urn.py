"""Pólya urns and the Beta / Dirichlet laws their fractions converge to.

An urn holds K colours with counts x_1..x_K. Each step draws colour i with
probability proportional to x_i + offset and adds `reinforcement` balls of
that colour. The fractions converge to Dirichlet((start + offset) /
reinforcement).
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

import numpy as np

from .errors import DomainError, UnsupportedModel
from .models.factory import DIFFUSION, PREFERENTIAL, UNIFORM
from .models.rng import make_rng
from .stats import beta_cdf, ks_statistic

BETA = 'beta'
DIRICHLET = 'dirichlet'


@dataclass(frozen=True)
class UrnSpec:
    start: Tuple[Fraction, ...]
    reinforcement: Fraction = Fraction(1)
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, 'start', tuple(Fraction(s) for s in self.start))
        object.__setattr__(self, 'reinforcement', Fraction(self.reinforcement))
        object.__setattr__(self, 'offset', Fraction(self.offset))
        if len(self.start) < 2:
            raise DomainError("[!] an urn needs at least two colours")
        if self.reinforcement <= 0:
            raise DomainError("[!] reinforcement must be positive")
        for s in self.start:
            if s < 1:
                raise DomainError(f"[!] start counts must be >= 1, got {s}")
            if s + self.offset <= 0:
                raise DomainError("[!] start + offset must be positive")

    @property
    def colors(self):
        return len(self.start)

    def limit(self):
        params = tuple((s + self.offset) / self.reinforcement for s in self.start)
        if len(params) == 2:
            return LimitLaw(BETA, params)
        return LimitLaw(DIRICHLET, params)


@dataclass(frozen=True)
class LimitLaw:
    kind: str
    params: Tuple[Fraction, ...]

    def __post_init__(self):
        assert self.kind in (BETA, DIRICHLET), f"[!] unknown law {self.kind}"
        if self.kind == BETA and len(self.params) != 2:
            raise DomainError("[!] a beta law has two parameters")
        for p in self.params:
            if p <= 0:
                raise DomainError(f"[!] limit-law parameters must be positive, got {p}")

    def marginal(self, i=0):
        """Law of coordinate i: Beta(a_i, sum(a) - a_i)."""
        if self.kind == BETA and i == 0:
            return self
        a_i = self.params[i]
        return LimitLaw(BETA, (a_i, sum(self.params) - a_i))

    def cdf(self):
        law = self.marginal(0)
        a, b = law.params
        return beta_cdf(float(a), float(b))

    def __str__(self):
        return f"{self.kind.capitalize()}({', '.join(str(p) for p in self.params)})"


def limit_law_two(params, A):
    """Law of the limiting column fraction of the walk started at (A, 1)."""
    if A < 1:
        raise DomainError(f"[!] A must be >= 1, got {A}")
    c = params.offset
    return LimitLaw(BETA, (A + c, 1 + c))


def _check_degrees(K, degrees):
    degrees = [int(x) for x in degrees]
    if K < 2:
        raise DomainError(f"[!] K must be >= 2, got {K}")
    if len(degrees) != K:
        raise DomainError(f"[!] expected {K} degrees, got {len(degrees)}")
    if sum(degrees) != 2 * K - 2 or min(degrees) < 1:
        raise DomainError(f"[!] degrees {degrees} do not describe a {K}-vertex tree")
    return degrees


def limit_law_k(spec, K, degrees):
    """Dirichlet law of the subtree fractions hanging off v1..vK."""
    degrees = _check_degrees(K, degrees)
    if spec.kind == UNIFORM:
        params = [Fraction(1)] * K
    elif spec.kind == PREFERENTIAL:
        params = [Fraction(x, 2) for x in degrees]
    elif spec.kind == DIFFUSION:
        d = spec.d
        if d < 3:
            raise UnsupportedModel("[!] diff:2 has no top-K urn")
        if max(degrees) >= d:
            raise DomainError(f"[!] degrees must stay below d={d}")
        params = [Fraction(d - x, d - 2) for x in degrees]
    else:
        raise UnsupportedModel(f"[!] no urn for model {spec.kind}")
    return LimitLaw(DIRICHLET, tuple(params))


def urn_for_walk(params, A):
    """Two-colour urn of the walk coordinates (X, Y) started at (A, 1)."""
    return UrnSpec((A, 1), 1, params.offset)


def urn_for_topk(spec, degrees):
    """Urn on subtree sizes (UA), degree sums (PA) or free slots (diffusion)."""
    K = len(degrees)
    degrees = _check_degrees(K, degrees)
    if spec.kind == UNIFORM:
        return UrnSpec([1] * K, 1)
    if spec.kind == PREFERENTIAL:
        return UrnSpec(degrees, 2)
    if spec.kind == DIFFUSION:
        d = spec.d
        if d < 3:
            raise UnsupportedModel("[!] diff:2 has no top-K urn")
        if max(degrees) >= d:
            raise DomainError(f"[!] degrees must stay below d={d}")
        return UrnSpec([d - x for x in degrees], d - 2)
    raise UnsupportedModel(f"[!] no urn for model {spec.kind}")


def counts_to_sizes(spec, degrees, counts):
    """Turns final urn counts of urn_for_topk into subtree sizes |T_i|."""
    counts = np.asarray(counts, dtype=np.float64)
    deg = np.asarray(degrees, dtype=np.float64)
    if spec.kind == UNIFORM:
        sizes = counts
    elif spec.kind == PREFERENTIAL:
        sizes = (counts - deg) / 2 + 1
    elif spec.kind == DIFFUSION:
        sizes = (counts - (spec.d - deg)) / (spec.d - 2) + 1
    else:
        raise UnsupportedModel(f"[!] no urn for model {spec.kind}")
    return np.rint(sizes).astype(np.int64)


def _run_urns(spec, steps, streams, block):
    if steps < 0:
        raise DomainError(f"[!] steps must be >= 0, got {steps}")
    replicates = len(streams)
    counts = np.tile(np.array([float(s) for s in spec.start]), (replicates, 1))
    offset = float(spec.offset)
    r = float(spec.reinforcement)
    rows = np.arange(replicates)
    last = spec.colors - 1

    done = 0
    while done < steps:
        size = min(block, steps - done)
        # column i comes from urn i's own stream
        draws = np.column_stack([rng.random(size) for rng in streams])
        for u in draws:
            cum = np.cumsum(counts + offset, axis=1)
            target = u * cum[:, -1]
            color = np.minimum((cum <= target[:, None]).sum(axis=1), last)
            counts[rows, color] += r
        done += size
    return counts


def simulate_urn_batch(spec, steps, replicates, base_seed, block=1024):
    """Runs `replicates` independent urns for `steps` draws each.

    Urn i draws from make_rng(base_seed, i), so its path does not depend on
    how many replicates run alongside it. Returns the final counts, shape
    (replicates, colours).
    """
    if replicates < 1:
        raise DomainError(f"[!] replicates must be >= 1, got {replicates}")
    streams = [make_rng(base_seed, i) for i in range(replicates)]
    return _run_urns(spec, steps, streams, block)


def simulate_urn(spec, steps, rng, block=1024):
    """Final colour fractions of one urn after `steps` draws from `rng`."""
    counts = _run_urns(spec, steps, [rng], block)[0]
    return counts / counts.sum()


def urn_fractions(counts):
    counts = np.asarray(counts, dtype=np.float64)
    return counts / counts.sum(axis=-1, keepdims=True)


def urn_ks_check(spec, steps, replicates, base_seed, law=None, coord=0):
    """KS test of coordinate `coord` of the final fractions against its limit."""
    if law is None:
        law = spec.limit()
    fractions = urn_fractions(simulate_urn_batch(spec, steps, replicates, base_seed))
    samples = fractions[:, coord]
    return samples, ks_statistic(samples, law.marginal(coord).cdf())
