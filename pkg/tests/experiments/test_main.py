import json
from unittest.mock import MagicMock, patch

import pytest

import main
from experiments.src.config import Config


def test_parser_accepts_every_experiment():
    parser = main.build_parser()
    for name in Config.experiment_names():
        args = parser.parse_args([name, "--seed", "5", "--out", "somewhere", "--workers", "2"])
        assert (args.experiment, args.seed, args.out, args.workers) == (name, 5, "somewhere", 2)


def test_parser_rejects_unknown_experiment():
    with pytest.raises(SystemExit):
        main.build_parser().parse_args(["nope"])


def test_epilog_documents_outputs_and_exit_codes():
    epilog = main.build_epilog()
    for info in Config.EXPERIMENTS["experiments"]:
        assert info["name"] in epilog
        for filename in info["columns"]:
            assert filename in epilog
    assert "exit codes: 0" in epilog
    assert "HDXGEO_MASTER_SEED" in epilog


def test_configuration_errors_exit_with_one(tmp_path):
    assert main.main(["tails", "--config", str(tmp_path / "missing.json")]) == 1
    assert main.main(["tails", "--workers", "0", "--out", str(tmp_path)]) == 1


def test_exit_code_comes_from_the_manifest(tmp_path):
    manifest = MagicMock(exit_code=2, error=None, status="checks_failed")
    with patch("main.run", return_value=manifest) as run:
        assert main.main(["tails", "--out", str(tmp_path)]) == 2
    run.assert_called_once()
    assert run.call_args.args[0].output_dir == str(tmp_path)


def test_end_to_end_tails(tmp_path):
    config = tmp_path / "tails.json"
    config.write_text(json.dumps({"d_grid": [20], "t_grid": [0.3], "p_grid": [0.1]}))
    out = tmp_path / "out"
    assert main.main(["tails", "--config", str(config), "--out", str(out), "--seed", "3"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "ok"
    assert manifest["config"]["master_seed"] == 3
