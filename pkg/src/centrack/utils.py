import json
import math
import os.path as osp
from fractions import Fraction

import numpy as np
import pandas as pd
import yaml

from .errors import ConfigError

FLOAT_FORMAT = '%.17g'


def _plain(value):
    """Makes numpy scalars, Fractions and tuples JSON friendly."""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, float) and math.isnan(value):
        return None
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def dumps(record):
    return json.dumps(_plain(record), sort_keys=True)


def write_jsonl(records, stream):
    for record in records:
        stream.write(dumps(record) + '\n')


def write_json(record, stream):
    json.dump(_plain(record), stream, sort_keys=True, indent=2)
    stream.write('\n')


def write_csv(df, stream):
    df.to_csv(stream, index=False, float_format=FLOAT_FORMAT)


def rational_pair(value):
    """(decimal, rational) strings for an exact value."""
    value = Fraction(value)
    return repr(float(value)), f"{value.numerator}/{value.denominator}"


def load_config(path):
    """Reads an experiment config; JSON is read through the YAML loader."""
    if not osp.exists(path):
        raise ConfigError(f"[!] config file not found: {path}")
    with open(path, 'r') as f:
        try:
            config = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"[!] cannot parse {path}: {e}")
    if not isinstance(config, dict):
        raise ConfigError(f"[!] {path} does not hold a mapping")
    return config


def write_run(out_dir, traces, summary, aggregate):
    """Writes traces.jsonl, aggregate.csv and summary.json into out_dir."""
    with open(osp.join(out_dir, 'traces.jsonl'), 'w') as f:
        write_jsonl((t.to_dict() for t in traces), f)
    with open(osp.join(out_dir, 'aggregate.csv'), 'w') as f:
        write_csv(aggregate, f)
    with open(osp.join(out_dir, 'summary.json'), 'w') as f:
        write_json(summary, f)


def frame_records(df):
    """DataFrame rows as plain dicts, missing values as None."""
    return [_plain(r) for r in df.astype(object).where(pd.notnull(df), None).to_dict('records')]
