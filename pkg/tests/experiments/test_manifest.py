import json
import math

import numpy as np
import pytest

from experiments.src.manifest import STATUS_CHECKS_FAILED, STATUS_ERROR, STATUS_OK, RunManifest, RunRecorder, \
    _csv_cell, dumps_json, to_jsonable
from experiments.src.settings import ExperimentConfig


@pytest.fixture
def recorder(tmp_path):
    config = ExperimentConfig(experiment="tails", parameters={"d_grid": [20]}, master_seed=11,
                              output_dir=str(tmp_path / "run"))
    return RunRecorder(config)


def test_non_finite_values_become_null():
    record = to_jsonable({"a": math.nan, "b": [np.float64(1.5), np.inf], "c": np.int64(3), "d": np.bool_(True)})
    assert record == {"a": None, "b": [1.5, None], "c": 3, "d": True}
    text = dumps_json({"z": 1, "a": math.nan})
    assert text.endswith("\n")
    assert json.loads(text) == {"a": None, "z": 1}
    assert text.index('"a"') < text.index('"z"')


@pytest.mark.parametrize("value,cell", [
    (None, ""),
    (True, "true"),
    (np.bool_(False), "false"),
    (7, "7"),
    (np.int32(7), "7"),
    (0.1, "0.1"),
    (np.float32(0.5), "0.5"),
    ("dense", "dense"),
])
def test_csv_cells(value, cell):
    assert _csv_cell(value) == cell


@pytest.mark.parametrize("status,code", [(STATUS_OK, 0), (STATUS_CHECKS_FAILED, 2), (STATUS_ERROR, 1)])
def test_exit_codes(status, code):
    assert RunManifest(experiment="tails", config={}, status=status).exit_code == code


def test_successful_run(recorder, tmp_path):
    recorder.derive("tau", 0.25)
    recorder.check("first", True, 0.1, 0.2)
    recorder.write_csv("table.csv", ["a", "b"], [(1, 0.5), (2, None)])
    manifest = recorder.finish()
    assert manifest.status == STATUS_OK
    assert manifest.artifacts == ["manifest.json", "table.csv"]

    run_dir = tmp_path / "run"
    assert (run_dir / "table.csv").read_text() == "a,b\n1,0.5\n2,\n"
    written = json.loads((run_dir / "manifest.json").read_text())
    assert written["derived"] == {"tau": 0.25}
    assert written["config"]["master_seed"] == 11
    assert written["checks"][0]["name"] == "first"
    assert "numpy" in written["environment"]
    assert (run_dir / "timings.json").exists()


def test_failed_check_and_error(recorder):
    recorder.check("bad", False, 3, 1)
    manifest = recorder.finish()
    assert manifest.status == STATUS_CHECKS_FAILED
    assert [c.name for c in manifest.failed_checks] == ["bad"]
    manifest = recorder.finish(error=RuntimeError("boom"))
    assert manifest.status == STATUS_ERROR
    assert manifest.error == "RuntimeError: boom"
    assert manifest.exit_code == 1


def test_phases_accumulate(recorder):
    for _ in range(2):
        with recorder.phase("work"):
            pass
    assert list(recorder.timings) == ["work"]
    assert recorder.timings["work"] >= 0.0


def test_rng_and_map_are_seeded(recorder):
    assert recorder.rng("x", 1).random() == recorder.rng("x", 1).random()
    results = recorder.map(lambda i, rng: (i, rng.integers(100)), 4, "mapped")
    again = recorder.map(lambda i, rng: (i, rng.integers(100)), 4, "mapped")
    assert results == again
    assert [i for i, _ in results] == [0, 1, 2, 3]
    assert "mapped" in recorder.timings


def test_npz_and_adopted_files(recorder, tmp_path):
    recorder.write_npz("samples.npz", kappas=np.arange(3.0))
    (tmp_path / "run" / "extra.csv").write_text("x\n")
    recorder.adopt("extra.csv")
    recorder.adopt("extra.csv")
    assert recorder.manifest.artifacts == ["extra.csv", "samples.npz"]
    with np.load(recorder.path("samples.npz")) as data:
        assert data["kappas"].tolist() == [0.0, 1.0, 2.0]
