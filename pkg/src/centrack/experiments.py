"""Monte Carlo persistence runs.

run_persistence grows `replicates` independent trees with a CentroidTracker
attached and returns one ReplicateTrace per replicate, ordered by replicate
index. run_hub repeats that over a grid of seed hubs (star sizes for UA/PA,
ball radii for diffusion).
"""
import math
import multiprocessing
import os
import sys
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from .errors import ConfigError, DomainError, SizeOverflow
from .hub import gap_table, symmetry_prob
from .models import (GrowingLine, ModelSpec, RngStream, SeedGraph, describe, grow,
                     grow_line)
from .models.factory import BALL, DIFFUSION, SINGLE, STAR
from .stats import ks_two_sample
from .tracker import CentroidTracker, LineCentroidTracker
from .tree import new_tree

_CONFIG_KEYS = {'model', 'n_target', 'K', 'replicates', 'base_seed', 'checkpoints',
                'invariant_checks', 'hub', 'ball', 'hub_sizes', 'epsilons'}


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec
    n_target: int
    base_seed: int
    K: int = 0
    replicates: int = 1
    checkpoints: Tuple[int, ...] = ()
    invariant_checks: bool = False
    # hub grid for run_hub: star sizes (UA/PA) or ball radii (diffusion)
    hub_sizes: Tuple[int, ...] = ()
    epsilons: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError(f"[!] replicates must be >= 1, got {self.replicates}")
        if self.n_target < 1:
            raise ConfigError(f"[!] n_target must be >= 1, got {self.n_target}")
        if self.K < 0:
            raise ConfigError(f"[!] K must be >= 0, got {self.K}")
        if list(self.checkpoints) != sorted(self.checkpoints):
            raise ConfigError("[!] checkpoints must be sorted")
        if self.checkpoints and self.checkpoints[-1] > self.n_target:
            raise ConfigError("[!] checkpoints must not exceed n_target")

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"[!] unknown config keys: {sorted(unknown)}")
        for key in ('model', 'n_target', 'base_seed'):
            if key not in d:
                raise ConfigError(f"[!] config needs '{key}'")
        model = d['model']
        if not isinstance(model, ModelSpec):
            model = ModelSpec.parse(str(model), hub=d.get('hub'), ball=d.get('ball'))
        try:
            return cls(model=model,
                       n_target=int(d['n_target']),
                       base_seed=int(d['base_seed']),
                       K=int(d.get('K', 0)),
                       replicates=int(d.get('replicates', 1)),
                       checkpoints=tuple(int(c) for c in d.get('checkpoints') or ()),
                       invariant_checks=bool(d.get('invariant_checks', False)),
                       hub_sizes=tuple(int(k) for k in d.get('hub_sizes') or ()),
                       epsilons=tuple(float(e) for e in d.get('epsilons') or ()))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"[!] bad config value: {e}")

    def to_dict(self):
        seed = self.model.seed_graph
        d = {'model': self.model.name,
             'n_target': self.n_target,
             'base_seed': self.base_seed,
             'K': self.K,
             'replicates': self.replicates,
             'checkpoints': list(self.checkpoints),
             'invariant_checks': self.invariant_checks,
             'hub_sizes': list(self.hub_sizes),
             'epsilons': list(self.epsilons)}
        if seed.kind == STAR:
            d['hub'] = seed.size
        elif seed.kind == BALL:
            d['ball'] = seed.size
        return d


def _uses_line(config):
    model = config.model
    return (model.kind == DIFFUSION and model.d == 2 and model.seed_graph.kind == SINGLE
            and config.K == 0 and not config.invariant_checks)


def run_replicate(config, index, logger=None):
    """Grows replicate `index` on its own random stream and returns its trace."""
    rng = RngStream(config.base_seed, index).generator()
    if _uses_line(config):
        line = GrowingLine()
        tracker = LineCentroidTracker(logger=logger)
        tracker.reset(line, replicate=index, n_target=config.n_target)
        grow_line(config.n_target, rng, hooks=[tracker.step], line=line)
        return tracker.get_results()

    tree = new_tree(config.model.seed_edges())
    tracker = CentroidTracker(config.K, config.checkpoints or None,
                              config.invariant_checks, logger)
    tracker.reset(tree, replicate=index, n_target=config.n_target)
    grow(config.model, config.n_target, rng, hooks=[tracker.step], tree=tree,
         check_invariants=config.invariant_checks)
    return tracker.get_results()


def _replicate_worker(args):
    config, index = args
    return run_replicate(config, index)


def run_persistence(config, jobs=1, logger=None, progress=False):
    """Runs every replicate of `config`; returns (traces, summary)."""
    if jobs is None:
        jobs = os.cpu_count() or 1
    if logger is not None:
        logger(f"{config.model} ({describe(config.model)}): {config.replicates} "
               f"replicates to n={config.n_target}, {jobs} worker(s)")

    work = [(config, i) for i in range(config.replicates)]
    bar = dict(total=len(work), file=sys.stderr, disable=not progress,
               desc=str(config.model))
    if jobs == 1:
        traces = [run_replicate(config, i, logger) for i in tqdm(range(config.replicates), **bar)]
    else:
        with multiprocessing.Pool(jobs) as pool:
            traces = list(tqdm(pool.imap(_replicate_worker, work), **bar))
    traces.sort(key=lambda t: t.replicate)

    summary = summarize_traces(traces, config.n_target)
    if logger is not None:
        logger(f"{config.model}: changed after n/2 in "
               f"{summary['fraction_changed_after_half']:.3f} of replicates")
        if summary['invariant_violations']:
            logger(f"[!] {summary['invariant_violations']} invariant violations")
    return traces, summary


def _change_times(traces, attr='last_centroid_change'):
    """Change steps with 'never changed' mapped to 0."""
    return np.array([getattr(t, attr) or 0 for t in traces], dtype=np.int64)


def traces_table(traces):
    return pd.DataFrame([t.to_dict() for t in traces])


def summarize_traces(traces, n_target):
    """Aggregate persistence statistics over replicate traces."""
    R = len(traces)
    half = n_target / 2
    last = _change_times(traces)
    last_v1 = _change_times(traces, 'last_v1_centroid')
    changed_late = float(np.mean(last > half)) if R else math.nan
    topk_late = [t.last_topk_change is not None and t.last_topk_change > half
                 for t in traces if t.K]

    summary = {
        'replicates': R,
        'n_target': n_target,
        'fraction_changed_after_half': changed_late,
        'fraction_never_changed': float(np.mean(last == 0)) if R else math.nan,
        'fraction_v1_centroid_after_half': float(np.mean(last_v1 > half)) if R else math.nan,
        'last_change_mean': float(np.mean(last)) if R else math.nan,
        'last_change_median': float(np.median(last)) if R else math.nan,
        'last_change_q90': float(np.quantile(last, 0.9)) if R else math.nan,
        'mean_centroid_changes': float(np.mean([t.centroid_change_count for t in traces])),
        'mean_centroid_set_changes': float(np.mean([t.centroid_set_changes for t in traces])),
        'fraction_v1_final_centroid': float(np.mean([t.v1_is_final_centroid for t in traces])),
        'fraction_v1_always_centroid': float(np.mean([t.v1_always_centroid for t in traces])),
        'fraction_topk_changed_after_half': float(np.mean(topk_late)) if topk_late else None,
        'fraction_v1_in_final_topk': (
            float(np.mean([t.v1_in_final_topk for t in traces if t.v1_in_final_topk is not None]))
            if any(t.v1_in_final_topk is not None for t in traces) else None),
        'invariant_violations': int(sum(len(t.invariant_violations) for t in traces)),
    }
    return summary


def change_histogram(traces, n_target, bins=10):
    """Empirical distribution of last_centroid_change over equal bins of [0, n_target]."""
    last = _change_times(traces)
    edges = np.linspace(0, n_target, bins + 1)
    counts, _ = np.histogram(last, bins=edges)
    hist = pd.DataFrame({'bin_lo': edges[:-1], 'bin_hi': edges[1:], 'count': counts})
    hist['fraction'] = hist['count'] / max(len(last), 1)
    hist['cumulative'] = hist['fraction'].cumsum()
    return hist


def compare_persistence(traces_a, traces_b):
    """Two-sample KS test between the last-change samples of two runs."""
    return ks_two_sample(_change_times(traces_a), _change_times(traces_b))


def hub_configs(config, sizes=None):
    """One config per hub size, the seed graph swapped for the matching hub."""
    sizes = tuple(sizes if sizes is not None else config.hub_sizes)
    if not sizes:
        raise ConfigError("[!] run_hub needs hub sizes")
    model = config.model
    configs = []
    for size in sizes:
        if model.kind == DIFFUSION:
            seed = SeedGraph.ball(size) if size > 0 else SeedGraph()
        else:
            seed = SeedGraph.star(size)
        configs.append((size, replace(config, model=model.with_seed(seed))))
    return configs


@dataclass
class HubSummary:
    table: pd.DataFrame
    traces: Dict[int, List]
    # necessary against sufficient sizes for the epsilon grid, if one was given
    gaps: Optional[pd.DataFrame] = None

    @property
    def monotone(self):
        return monotone_within(self.table)


def run_hub(config, sizes=None, epsilons=None, jobs=1, logger=None, progress=False):
    """Persistence of v1 across a grid of hub sizes (ball radii).

    The summary table holds, per size, the fraction
    of replicates where v1 is the final centroid, where it stayed a centroid
    throughout, the binomial standard error and the symmetry lower bound P/2
    on the failure probability.
    """
    traces_by_size = {}
    rows = []
    for size, sub in hub_configs(config, sizes):
        traces, summary = run_persistence(sub, jobs=jobs, logger=logger, progress=progress)
        traces_by_size[size] = traces
        R = len(traces)
        failure = 1.0 - summary['fraction_v1_always_centroid']
        try:
            bound = float(symmetry_prob(config.model, size)) / 2
        except (DomainError, SizeOverflow):
            bound = None
        rows.append({'size': size,
                     'seed_vertices': len(sub.model.seed_edges()) + 1,
                     'replicates': R,
                     'v1_final_centroid': summary['fraction_v1_final_centroid'],
                     'v1_always_centroid': summary['fraction_v1_always_centroid'],
                     'non_persistence': failure,
                     'sigma': math.sqrt(max(failure * (1 - failure), 1e-12) / R),
                     'symmetry_bound': bound,
                     'invariant_violations': summary['invariant_violations']})
    table = pd.DataFrame(rows)
    if logger is not None:
        logger(f"hub grid {list(table['size'])}: non-persistence "
               f"{[round(x, 4) for x in table['non_persistence']]}")
    if epsilons is None:
        epsilons = config.epsilons
    gaps = gap_table(epsilons, models=(config.model.name,)) if epsilons else None
    return HubSummary(table, traces_by_size, gaps)


def monotone_within(table, sigmas=3.0, column='non_persistence'):
    """True when `column` never increases by more than `sigmas` combined standard errors."""
    values = table[column].to_numpy()
    sigma = table['sigma'].to_numpy()
    for i in range(len(values) - 1):
        slack = sigmas * math.hypot(sigma[i], sigma[i + 1])
        if values[i + 1] > values[i] + slack:
            return False
    return True

