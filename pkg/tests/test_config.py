import json
from dataclasses import fields

import pytest

from config_loader import CONFIG_ENV_VAR, Config, RunConfig, get_config, load_config


@pytest.fixture
def config_file(tmp_path):
    data = {
        "polynomial": {"poly": "x1^2 + x2^2 + x3^4"},
        "height": {"starts": 5, "iters": 2},
        "decay": {"xi_min": 16.0, "dirs": 3},
        "workflow": {"seed": 11, "workers": 2, "output_dir": str(tmp_path / "runs")},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_dot_notation_and_defaults(config_file):
    config = Config(str(config_file))
    assert config.get('decay.xi_min') == 16.0
    assert config.get('decay.missing', 'fallback') == 'fallback'
    assert config.poly == "x1^2 + x2^2 + x3^4"
    assert config.xi_max == 512.0
    assert config.height_starts == 5


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        Config(str(tmp_path / "absent.json"))


def test_run_config_overrides(config_file):
    config = Config(str(config_file))
    run = RunConfig.from_config(config, seed=3, n_dirs=None, p="7/5")
    assert run.starts == 5
    assert run.iters == 2
    assert run.seed == 3
    assert run.n_dirs == 3
    assert run.p == "7/5"
    assert run.workers == 2


def test_run_config_rejects_unknown_settings(config_file):
    with pytest.raises(ValueError, match="colour"):
        RunConfig.from_config(Config(str(config_file)), colour="blue")


def test_echo_leaves_out_parallelism_and_location(config_file):
    data = RunConfig.from_config(Config(str(config_file))).to_dict()
    assert 'workers' not in data
    assert 'output_dir' not in data
    assert data['poly'] == "x1^2 + x2^2 + x3^4"


def test_environment_selects_config(config_file, monkeypatch):
    monkeypatch.setenv(CONFIG_ENV_VAR, str(config_file))
    config = load_config()
    assert config.seed == 11
    assert get_config() is config


def test_every_setting_reaches_the_run():
    settings = {name for name, value in vars(Config).items() if isinstance(value, property)}
    run_fields = {f.name for f in fields(RunConfig)}
    handled = {'height_starts', 'height_iters'} | {name for name in settings if name.startswith('log_')}
    assert settings - handled <= run_fields


def test_config_file_values_flow_into_the_run(config_file):
    data = json.loads(config_file.read_text(encoding="utf-8"))
    data["height"]["prune_tol"] = 1e-8
    config_file.write_text(json.dumps(data), encoding="utf-8")
    run = RunConfig.from_config(Config(str(config_file)))
    assert run.height_prune_tol == 1e-8
    assert run.xi_min == 16.0
