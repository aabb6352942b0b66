"""centrack command line.

Data products go to standard output (or --out), messages to standard error.
Exit codes: 0 success, 2 usage error, 3 configuration or domain error,
4 invariant violation.
"""
import argparse
import logging
import os
import os.path as osp
import sys
from fractions import Fraction

import numpy as np
import pandas as pd

from . import experiments, hub, urn, walk
from .config import cfg_from_file, cfg_from_list, get_output_dir
from .errors import CentrackError, DegreeOverflow, InvariantViolation
from .models import ModelSpec, describe, grow, make_rng
from .stats import ks_statistic
from .tree import centroids, new_tree, read_edge_list, top_k, write_edge_list
from .utils import (dumps, frame_records, load_config, rational_pair, write_csv,
                    write_json, write_jsonl, write_run)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_INVARIANT = 4

log = logging.getLogger('centrack')


def _open_out(path):
    if path is None or path == '-':
        return sys.stdout, False
    return open(path, 'w'), True


def _a_range(text):
    lo, sep, hi = text.partition(':')
    if not sep:
        raise argparse.ArgumentTypeError("expected LO:HI")
    lo, hi = int(lo), int(hi)
    if lo > hi:
        raise argparse.ArgumentTypeError("LO must not exceed HI")
    return range(lo, hi + 1)


def _int_list(text):
    return [int(x) for x in text.split(',') if x]


#############
# grow      #
#############

def cmd_grow(args):
    spec = ModelSpec.parse(args.model, hub=args.hub, ball=args.ball)
    rng = make_rng(args.seed)
    events = []
    hooks = [lambda tree, event: events.append(event)] if args.events else []
    tree = grow(spec, args.n, rng, hooks=hooks, track_centroids=args.events is not None,
                check_invariants=args.check)
    if args.check:
        tree.check_consistency()

    stream, close = _open_out(args.out)
    try:
        write_edge_list(tree.edges(), stream,
                        header=[f"model {spec}", f"n {tree.n}", f"seed {args.seed}"])
    finally:
        if close:
            stream.close()
    if args.events:
        with open(args.events, 'w') as f:
            write_jsonl((e.to_dict() for e in events), f)
    log.info(f"grew {spec} ({describe(spec)}) to n={tree.n}")
    return EXIT_OK


#####################
# centroid / topk   #
#####################

def _read_tree(path):
    if path == '-':
        return new_tree(read_edge_list(sys.stdin))
    with open(path, 'r') as f:
        return new_tree(read_edge_list(f))


def _inspect(tree, K):
    cset = centroids(tree)
    record = {'n': tree.n, 'centroids': list(cset.members), 'psi': cset.psi_value}
    if K:
        topk = top_k(tree, K, logger=log.warning)
        record['topk'] = {'K': topk.K,
                          'ordered': [[u, p] for u, p in topk.ordered],
                          'boundary_tied': topk.boundary_tied,
                          'tied': topk.tied}
    return record


def cmd_inspect(args):
    sys.stdout.write(dumps(_inspect(_read_tree(args.input), args.k)) + '\n')
    return EXIT_OK


#############
# walk      #
#############

def cmd_walk(args):
    params = walk.params_for_model(ModelSpec.parse(args.model))
    if args.envelope:
        report = walk.envelope_check(params, args.a_range, args.m_max)
        write_json({'model': args.model, 'A_lo': args.a_range[0], 'A_hi': args.a_range[-1],
                    'monotone': report.monotone, 'gamma': report.gamma, 'c': report.c,
                    'max_residual': report.max_residual, 'u_ceil': report.u_ceil,
                    'first_violation': report.first_violation, 'passed': report.passed},
                   sys.stdout)
        return EXIT_OK
    table = walk.walk_table(params, args.a_range, args.m_max)
    write_csv(table, sys.stdout)
    return EXIT_OK


#############
# urn       #
#############

def cmd_urn(args):
    spec = ModelSpec.parse(args.model)
    if args.a is not None:
        params = walk.params_for_model(spec)
        urn_spec = urn.urn_for_walk(params, args.a)
        law = urn.limit_law_two(params, args.a)
        summary = {'model': spec.name, 'A': args.a}
    else:
        # default T_K: the path v1 - v2 - ... - vK
        degrees = args.degrees or [1] + [2] * (args.k - 2) + [1]
        urn_spec = urn.urn_for_topk(spec, degrees)
        law = urn.limit_law_k(spec, args.k, degrees)
        summary = {'model': spec.name, 'K': args.k, 'degrees': degrees}

    counts = urn.simulate_urn_batch(urn_spec, args.steps, args.reps, args.seed)
    fractions = urn.urn_fractions(counts)
    D, p = ks_statistic(fractions[:, 0], law.marginal(0).cdf())
    summary.update({'law': str(law), 'marginal': str(law.marginal(0)),
                    'steps': args.steps, 'replicates': args.reps, 'seed': args.seed,
                    'ks_D': D, 'ks_p': p})

    table = pd.DataFrame(fractions, columns=[f"x{i + 1}" for i in range(fractions.shape[1])])
    table.insert(0, 'replicate', np.arange(args.reps))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(osp.join(args.out, 'fractions.csv'), 'w') as f:
            write_csv(table, f)
        with open(osp.join(args.out, 'summary.json'), 'w') as f:
            write_json(summary, f)
    else:
        write_csv(table, sys.stdout)
        sys.stderr.write(dumps(summary) + '\n')
    log.info(f"{law}: KS D={D:.4f}, p={p:.4f}")
    return EXIT_OK


#####################
# persist / hub     #
#####################

def _experiment(args, module):
    config = experiments.ExperimentConfig.from_dict(load_config(args.config))
    out_dir = args.out or get_output_dir(module)
    os.makedirs(out_dir, exist_ok=True)
    return config, out_dir


def _check_violations(config, count):
    if config.invariant_checks and count:
        log.error(f"[!] {count} invariant violations, see traces.jsonl")
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_persist(args):
    config, out_dir = _experiment(args, 'persist')
    traces, summary = experiments.run_persistence(config, jobs=args.jobs, logger=log.info,
                                                  progress=not args.quiet)
    summary = {'config': config.to_dict(), **summary}
    write_run(out_dir, traces, summary,
              experiments.change_histogram(traces, config.n_target))
    log.info(f"wrote {out_dir}")
    return _check_violations(config, summary['invariant_violations'])


def cmd_hub(args):
    config, out_dir = _experiment(args, 'hub')
    result = experiments.run_hub(config, jobs=args.jobs, logger=log.info,
                                 progress=not args.quiet)
    traces = []
    for size, size_traces in result.traces.items():
        for t in size_traces:
            traces.append({'hub_size': size, **t.to_dict()})
    summary = {'config': config.to_dict(),
               'monotone': result.monotone,
               'table': frame_records(result.table)}
    if result.gaps is not None:
        summary['gaps'] = frame_records(result.gaps)

    with open(osp.join(out_dir, 'traces.jsonl'), 'w') as f:
        write_jsonl(traces, f)
    with open(osp.join(out_dir, 'aggregate.csv'), 'w') as f:
        write_csv(result.table, f)
    with open(osp.join(out_dir, 'summary.json'), 'w') as f:
        write_json(summary, f)
    log.info(f"wrote {out_dir}")
    return _check_violations(config, int(result.table['invariant_violations'].sum()))


#############
# calc      #
#############

def _print_exact(value):
    decimal, rational = rational_pair(value)
    sys.stdout.write(f"{rational}\t{decimal}\n")


def cmd_calc(args):
    if args.pk_pa is not None:
        _print_exact(hub.symmetry_prob_pa(args.pk_pa))
    elif args.pk_ua is not None:
        _print_exact(hub.symmetry_prob_ua(args.pk_ua))
    elif args.pk_diff is not None:
        d, r = args.pk_diff
        _print_exact(hub.symmetry_prob_diffusion(d, r))
    elif args.suff_k is not None:
        sys.stdout.write(f"{hub.sufficient_hub_size(Fraction(args.suff_k))}\n")
    elif args.necessary is not None:
        model, eps = args.necessary
        write_json(hub.necessary_bound_report(model, Fraction(eps)).to_dict(), sys.stdout)
    elif args.gap is not None:
        write_csv(hub.gap_table([Fraction(e) for e in args.gap]), sys.stdout)
    return EXIT_OK


#############
# parser    #
#############

def build_parser():
    parser = argparse.ArgumentParser(
        prog='centrack',
        description="Centroid persistence in random growing trees")
    parser.add_argument('--quiet', action='store_true', help="only warnings on stderr")
    parser.add_argument('--cfg', dest='cfg_file', help="YAML file merged into the defaults")
    parser.add_argument('--set', nargs=2, action='append', default=[],
                        metavar=('KEY', 'VALUE'), help="override a config value")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('grow', help="grow a tree and print its edge list")
    p.add_argument('--model', required=True, help="ua, pa or diff:<d>")
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--seed', type=int, required=True)
    seed = p.add_mutually_exclusive_group()
    seed.add_argument('--hub', type=int, help="start from a star with this many leaves")
    seed.add_argument('--ball', type=int, help="start from the r-ball (diffusion)")
    p.add_argument('--out', help="edge list file; stdout if not given")
    p.add_argument('--events', help="also write per-step events as JSONL here")
    p.add_argument('--check', action='store_true', help="assert growth invariants")
    p.set_defaults(func=cmd_grow)

    for name, k_required in (('centroid', False), ('topk', True)):
        p = sub.add_parser(name, help="inspect an edge list")
        p.add_argument('--in', dest='input', required=True, help="edge list, - for stdin")
        p.add_argument('--k', type=int, required=k_required, default=0)
        p.set_defaults(func=cmd_inspect)

    p = sub.add_parser('walk', help="diagonal hitting probabilities")
    p.add_argument('--model', required=True)
    p.add_argument('--a-range', type=_a_range, required=True, help="LO:HI")
    p.add_argument('--m-max', type=int, default=None)
    p.add_argument('--envelope', action='store_true',
                   help="report the decay fit instead of the table")
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser('urn', help="simulate the limit urns and KS-test them")
    p.add_argument('--model', required=True)
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument('--a', type=int, help="two-colour urn started at (A, 1)")
    which.add_argument('--k', type=int, help="top-K urn on K subtrees")
    p.add_argument('--degrees', type=_int_list, help="degrees of v1..vK in T_K")
    p.add_argument('--steps', type=int, required=True)
    p.add_argument('--reps', type=int, required=True)
    p.add_argument('--seed', type=int, required=True)
    p.add_argument('--out', help="directory for fractions.csv and summary.json")
    p.set_defaults(func=cmd_urn)

    for name, func in (('persist', cmd_persist), ('hub', cmd_hub)):
        p = sub.add_parser(name, help=f"run a {name} experiment config")
        p.add_argument('--config', required=True, help="JSON or YAML experiment config")
        p.add_argument('--out', help="output directory")
        p.add_argument('--jobs', type=int, default=None,
                       help="worker processes (default: all cores)")
        p.set_defaults(func=func)

    p = sub.add_parser('calc', help="exact hub-size calculators")
    what = p.add_mutually_exclusive_group(required=True)
    what.add_argument('--pk-pa', type=int, metavar='K')
    what.add_argument('--pk-ua', type=int, metavar='K')
    what.add_argument('--pk-diff', type=int, nargs=2, metavar=('D', 'R'))
    what.add_argument('--suff-k', metavar='EPS')
    what.add_argument('--necessary', nargs=2, metavar=('MODEL', 'EPS'))
    what.add_argument('--gap', nargs='+', metavar='EPS')
    p.set_defaults(func=cmd_calc)
    return parser


def _setup_logging(quiet):
    log.handlers = []
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter('%(levelname)s - %(message)s'))
    log.addHandler(handler)
    log.setLevel(logging.WARNING if quiet else logging.INFO)
    log.propagate = False


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    _setup_logging(args.quiet)

    try:
        if args.cfg_file:
            cfg_from_file(args.cfg_file)
        if args.set:
            cfg_from_list([x for pair in args.set for x in pair])
        return args.func(args)
    except (InvariantViolation, DegreeOverflow) as e:
        log.error(str(e))
        return EXIT_INVARIANT
    except (CentrackError, KeyError, ValueError, OSError) as e:
        log.error(str(e))
        return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
