import copy
import os
from os import path as osp

import sacred
import yaml
from sacred import Experiment
from centrack.config import get_output_dir
from centrack.experiments import ExperimentConfig, run_hub
from centrack.utils import frame_records, write_csv, write_json, write_jsonl

ex = Experiment()

ex.add_config('experiments/cfgs/hub.yaml')
ex.add_named_config('diffusion', 'experiments/cfgs/hub_diffusion.yaml')


@ex.automain
def main(module_name, name, seed, jobs, hub, _config, _log, _run):
    sacred.commands.print_config(_run)

    output_dir = osp.join(get_output_dir(module_name), name)
    sacred_config = osp.join(output_dir, 'sacred_config.yaml')

    if not osp.exists(output_dir):
        os.makedirs(output_dir)
    with open(sacred_config, 'w') as outfile:
        yaml.dump(copy.deepcopy(_config), outfile, default_flow_style=False)

    config = ExperimentConfig.from_dict({'base_seed': seed, **hub})
    _log.info(f"Hub run: {config.model} over sizes {list(config.hub_sizes)}")

    result = run_hub(config, jobs=jobs, logger=_log.info, progress=True)
    if not result.monotone:
        _log.warning("Non-persistence is not monotone in the hub size (3 sigma)")
    for row in result.table.itertuples():
        _log.info(f"size {row.size}: non-persistence {row.non_persistence:.4f} "
                  f"+- {row.sigma:.4f}, symmetry bound {row.symmetry_bound}")

    _log.info(f"Writing results to: {output_dir}")
    with open(osp.join(output_dir, 'traces.jsonl'), 'w') as f:
        write_jsonl(({'hub_size': size, **t.to_dict()}
                     for size, traces in result.traces.items() for t in traces), f)
    with open(osp.join(output_dir, 'aggregate.csv'), 'w') as f:
        write_csv(result.table, f)
    summary = {'config': config.to_dict(), 'monotone': result.monotone,
               'table': frame_records(result.table)}
    if result.gaps is not None:
        summary['gaps'] = frame_records(result.gaps)
    with open(osp.join(output_dir, 'summary.json'), 'w') as f:
        write_json(summary, f)
