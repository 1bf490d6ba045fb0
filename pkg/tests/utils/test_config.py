import os

import pytest

from src.core.exceptions import ConfigError
from src.core.models import LossFamily
from src.network.topology import GammaRule
from src.utils import config as config_module
from src.utils.config import (ExperimentConfig, apply_overrides, dump_config, get_config, load_config,
                              parse_config)

REPO_CONFIG = os.path.join(os.path.dirname(__file__), '..', '..', 'config.yaml')
OCEAN_CONFIG = os.path.join(os.path.dirname(__file__), '..', '..', 'configs', 'ocean.yaml')


def test_defaults_match_field_experiment():
    """Test the built-in defaults of the field benchmark"""
    config = ExperimentConfig()
    assert config.experiment.T == 1500
    assert config.field.n_agents == 40
    assert config.hyper.eta == 0.01
    assert config.hyper.budget == pytest.approx(8.0 * 0.01 ** 2)
    assert config.kernel.bandwidth == 0.05
    assert config.loss.family == LossFamily.HUBER
    assert config.baseline.penalty_c == 0.08


def test_repo_config_equals_defaults():
    assert load_config(REPO_CONFIG) == ExperimentConfig()


def test_ocean_config():
    config = load_config(OCEAN_CONFIG)
    assert config.topology.gamma_rule == GammaRule.EXP_DISTANCE
    assert config.topology.connect_radius == 1000.0
    assert config.data.path is not None


def test_round_trip(tmp_path):
    """Test that load, dump and load again gives the same parameters"""
    config = apply_overrides(ExperimentConfig(), {"hyper": {"eta": 0.02, "epsilon": 0.001},
                                                  "kernel": {"bandwidth": 0.1}})
    file = str(tmp_path / "dumped.yaml")
    dump_config(config, file)
    assert load_config(file) == config


def test_lambda_alias():
    config = parse_config({"hyper": {"lambda": 0.5}})
    assert config.hyper.lam == 0.5
    assert config.to_dict()["hyper"]["lambda"] == 0.5


def test_unknown_key_is_rejected():
    with pytest.raises(ConfigError):
        parse_config({"hyper": {"etta": 0.1}})
    with pytest.raises(ConfigError):
        parse_config({"extra_section": {}})


def test_invalid_values_are_rejected():
    with pytest.raises(ConfigError):
        parse_config({"field": {"n_agents": 1}})
    with pytest.raises(ConfigError):
        parse_config({"hyper": {"eta": 1.0, "lambda": 2.0}})


def test_overrides_skip_none():
    config = apply_overrides(ExperimentConfig(), {"experiment": {"T": 10, "seed": None}})
    assert config.experiment.T == 10
    assert config.experiment.seed == 0


def test_override_unknown_section():
    with pytest.raises(ConfigError):
        apply_overrides(ExperimentConfig(), {"network": {"radius": 1.0}})


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(tmp_path / "absent.yaml"))


def test_malformed_yaml(tmp_path):
    file = tmp_path / "bad.yaml"
    file.write_text("experiment: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(str(file))
    file.write_text("- just\n- a list\n")
    with pytest.raises(ConfigError, match="mapping"):
        load_config(str(file))


def test_empty_file_gives_defaults(tmp_path):
    file = tmp_path / "empty.yaml"
    file.write_text("")
    assert load_config(str(file)) == ExperimentConfig()


def test_get_config_returns_loaded(tmp_path):
    file = tmp_path / "small.yaml"
    file.write_text("experiment:\n  T: 7\n")
    load_config(str(file))
    assert get_config().experiment.T == 7
    assert config_module.CONFIG.experiment.T == 7
