import json

import pytest

from config import HdxgeoConfig
from experiments.src.config import Config
from experiments.src.settings import ConfigError, load_config, validate_parameters


@pytest.fixture
def config_file(tmp_path):
    def write(payload):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(payload))
        return str(path)
    return write


def test_defaults():
    config = load_config("tails", environ={})
    assert config.parameters == Config.experiment_info("tails")["defaults"]
    assert config.master_seed == HdxgeoConfig.DEFAULT_MASTER_SEED
    assert config.workers == 1
    assert config["roundtrip_tol"] == 1e-10


def test_precedence_file_env_cli(config_file):
    path = config_file({"roundtrip_tol": 1e-8, "d_grid": [20, 30], "master_seed": 5, "workers": 2})
    from_file = load_config("tails", config_path=path, environ={})
    assert from_file["roundtrip_tol"] == 1e-8
    assert from_file.master_seed == 5
    assert from_file.workers == 2

    environ = {"HDXGEO_ROUNDTRIP_TOL": "1e-9", "HDXGEO_MASTER_SEED": "6", "HDXGEO_D_GRID": "40,50"}
    from_env = load_config("tails", config_path=path, environ=environ)
    assert from_env["roundtrip_tol"] == 1e-9
    assert from_env["d_grid"] == [40, 50]
    assert from_env.master_seed == 6

    from_cli = load_config("tails", config_path=path, seed=7, out="elsewhere", workers=3, environ=environ)
    assert from_cli.master_seed == 7
    assert from_cli.output_dir == "elsewhere"
    assert from_cli.workers == 3


def test_unknown_parameter_is_named(config_file):
    with pytest.raises(ConfigError, match="bogus"):
        load_config("tails", config_path=config_file({"bogus": 1}), environ={})
    # parameters of other experiments are unknown too
    with pytest.raises(ConfigError, match="eps"):
        validate_parameters("tails", {"eps": 0.5})


def test_ranges_and_types():
    with pytest.raises(ConfigError, match="p:"):
        validate_parameters("sphere-spectrum", {"p": 1.5})
    with pytest.raises(ConfigError, match="p:"):
        validate_parameters("sphere-spectrum", {"p": 0.0})
    with pytest.raises(ConfigError, match="n:"):
        validate_parameters("sphere-spectrum", {"n": 3.5})
    with pytest.raises(ConfigError, match="raw_samples"):
        validate_parameters("sphere-spectrum", {"raw_samples": 1})
    with pytest.raises(ConfigError, match=r"d_grid\[1\]"):
        validate_parameters("tails", {"d_grid": [20, 1]})
    assert validate_parameters("sphere-spectrum", {"n": 300.0}) == {"n": 300}
    assert validate_parameters("sphere-spectrum", {"tau": None, "p": None}) == {"tau": None, "p": None}


def test_env_parsing():
    config = load_config("sphere-spectrum", environ={"HDXGEO_RAW_SAMPLES": "yes", "HDXGEO_P": "none",
                                                     "HDXGEO_TAU": "0.25"})
    assert config["raw_samples"] is True
    assert config["p"] is None
    assert config["tau"] == 0.25
    with pytest.raises(ConfigError, match="HDXGEO_RAW_SAMPLES"):
        load_config("sphere-spectrum", environ={"HDXGEO_RAW_SAMPLES": "maybe"})
    with pytest.raises(ConfigError, match="HDXGEO_N"):
        load_config("sphere-spectrum", environ={"HDXGEO_N": "many"})


def test_seed_and_workers_validation():
    with pytest.raises(ConfigError, match="master_seed"):
        load_config("tails", seed=-1, environ={})
    with pytest.raises(ConfigError, match="master_seed"):
        load_config("tails", seed=1 << 64, environ={})
    assert load_config("tails", seed=(1 << 64) - 1, environ={}).master_seed == (1 << 64) - 1
    with pytest.raises(ConfigError, match="workers"):
        load_config("tails", workers=0, environ={})


def test_bad_files(tmp_path, config_file):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("tails", config_path=str(tmp_path / "missing.json"), environ={})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config("tails", config_path=str(bad), environ={})
    with pytest.raises(ConfigError, match="flat object"):
        load_config("tails", config_path=config_file([1, 2]), environ={})


def test_unknown_experiment():
    with pytest.raises(ConfigError, match="unknown experiment"):
        load_config("nope", environ={})


def test_echo_leaves_out_output_dir():
    config = load_config("tails", out="/tmp/somewhere", environ={})
    assert "output_dir" not in config.echo()
    assert config.echo()["parameters"] == config.parameters
