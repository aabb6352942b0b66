import copy
import json
import os
from os import path as osp

import sacred
import yaml
from sacred import Experiment
from centrack.config import get_output_dir
from centrack.experiments import (ExperimentConfig, change_histogram, compare_persistence,
                                  run_persistence)
from centrack.tracker import ReplicateTrace
from centrack.utils import write_run

ex = Experiment()

ex.add_config('experiments/cfgs/persistence.yaml')
ex.add_named_config('ua', 'experiments/cfgs/persistence_ua.yaml')
ex.add_named_config('line', 'experiments/cfgs/persistence_line.yaml')
ex.add_named_config('topk', 'experiments/cfgs/persistence_topk.yaml')


def load_traces(run_dir):
    traces = []
    with open(osp.join(run_dir, 'traces.jsonl'), 'r') as f:
        for line in f:
            record = json.loads(line)
            record['final_centroid'] = tuple(record['final_centroid'])
            traces.append(ReplicateTrace(**record))
    return traces


@ex.automain
def main(module_name, name, seed, jobs, persistence, compare_to, _config, _log, _run):
    sacred.commands.print_config(_run)

    output_dir = osp.join(get_output_dir(module_name), name)
    sacred_config = osp.join(output_dir, 'sacred_config.yaml')

    if not osp.exists(output_dir):
        os.makedirs(output_dir)
    with open(sacred_config, 'w') as outfile:
        yaml.dump(copy.deepcopy(_config), outfile, default_flow_style=False)

    config = ExperimentConfig.from_dict({'base_seed': seed, **persistence})
    _log.info(f"Persistence run: {config.model}, {config.replicates} replicates "
              f"to n={config.n_target}")

    traces, summary = run_persistence(config, jobs=jobs, logger=_log.info, progress=True)
    summary = {'config': config.to_dict(), **summary}

    if compare_to is not None:
        D, p = compare_persistence(load_traces(compare_to), traces)
        _log.info(f"Last-change distribution against {compare_to}: KS D={D:.4f}, p={p:.4f}")
        summary['compare_to'] = {'run': compare_to, 'ks_D': D, 'ks_p': p}

    _log.info(f"Changed after n/2: {summary['fraction_changed_after_half']:.4f}, "
              f"v1 final centroid: {summary['fraction_v1_final_centroid']:.4f}")
    _log.info(f"Writing results to: {output_dir}")
    write_run(output_dir, traces, summary, change_histogram(traces, config.n_target))
