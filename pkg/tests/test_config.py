import io
import json
from fractions import Fraction

import numpy as np
import pytest

from centrack.config import cfg, cfg_from_file, cfg_from_list, get_output_dir
from centrack.errors import ConfigError
from centrack.utils import dumps, load_config, rational_pair, write_jsonl


@pytest.fixture
def restore_cfg(monkeypatch):
    # setattr with the current values so monkeypatch puts them back afterwards
    for key in ('EXACT_M_MAX', 'TAIL_FIT_FRACTION', 'DEBUG_TOPK', 'OUTPUT_DIR'):
        monkeypatch.setattr(cfg, key, cfg[key])


def test_cfg_from_list(restore_cfg):
    cfg_from_list(['EXACT_M_MAX', '32', 'DEBUG_TOPK', 'True'])
    assert cfg.EXACT_M_MAX == 32
    assert cfg.DEBUG_TOPK is True


def test_cfg_from_list_rejects(restore_cfg):
    with pytest.raises(KeyError):
        cfg_from_list(['NO_SUCH_KEY', '1'])
    with pytest.raises(ValueError):
        cfg_from_list(['EXACT_M_MAX', 'many'])


def test_cfg_from_file(restore_cfg, tmp_path):
    path = tmp_path / 'cfg.yaml'
    path.write_text('TAIL_FIT_FRACTION: 0.25\n')
    cfg_from_file(str(path))
    assert cfg.TAIL_FIT_FRACTION == 0.25

    path.write_text('TAIL_FIT_FRACTION: many\n')
    with pytest.raises(ValueError):
        cfg_from_file(str(path))


def test_get_output_dir(restore_cfg, tmp_path):
    cfg.OUTPUT_DIR = str(tmp_path)
    out = get_output_dir('persist')
    assert out == str(tmp_path / 'centrack' / 'persist')
    assert (tmp_path / 'centrack' / 'persist').is_dir()


def test_load_config(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'model': 'pa', 'n_target': 10}))
    assert load_config(str(path)) == {'model': 'pa', 'n_target': 10}

    path.write_text('- just\n- a list\n')
    with pytest.raises(ConfigError):
        load_config(str(path))
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / 'missing.yaml'))


def test_dumps_plain_values():
    record = {'b': np.int64(3), 'a': Fraction(1, 3), 'c': (np.float64(0.5), np.bool_(True)),
              'd': float('nan')}
    assert dumps(record) == '{"a": "1/3", "b": 3, "c": [0.5, true], "d": null}'


def test_write_jsonl():
    buf = io.StringIO()
    write_jsonl([{'x': 1}, {'x': 2}], buf)
    assert buf.getvalue() == '{"x": 1}\n{"x": 2}\n'


def test_rational_pair():
    assert rational_pair(Fraction(1, 3)) == ('0.3333333333333333', '1/3')
    assert rational_pair(2) == ('2.0', '2/1')
