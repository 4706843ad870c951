"""
Run manifests and artifact writers.

manifest.json holds only values that are fixed by (config, seed, code version, host
library versions): it is byte-identical across re-runs. Wall-clock timings go to
timings.json next to it.
"""
import csv
import json
import logging
import math
import os
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from config import HdxgeoConfig
from experiments.src.pool import run_indexed
from experiments.src.settings import ExperimentConfig
from utils.host_utils import describe_host
from utils.seeding import rng_for

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_CHECKS_FAILED = "checks_failed"
STATUS_ERROR = "error"


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: Any
    threshold: Any
    note: str = ""


@dataclass
class RunManifest:
    experiment: str
    config: Dict[str, Any]
    derived: Dict[str, Any] = field(default_factory=dict)
    checks: List[CheckResult] = field(default_factory=list)
    artifacts: List[str] = field(default_factory=list)
    status: str = STATUS_OK
    error: Optional[str] = None
    environment: Dict[str, str] = field(default_factory=describe_host)
    schema_version: int = HdxgeoConfig.MANIFEST_SCHEMA_VERSION
    code_version: str = HdxgeoConfig.CODE_VERSION

    @property
    def exit_code(self) -> int:
        if self.status == STATUS_ERROR:
            return HdxgeoConfig.EXIT_ERROR
        if self.status == STATUS_CHECKS_FAILED:
            return HdxgeoConfig.EXIT_CHECK_FAILED
        return HdxgeoConfig.EXIT_OK

    @property
    def failed_checks(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_record(self) -> dict:
        return to_jsonable(asdict(self))


def to_jsonable(value):
    """Plain JSON types; NaN and infinities become null."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if value is None or isinstance(value, str):
        return value
    return str(value)


def dumps_json(payload) -> str:
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


class RunRecorder:
    """Collects derived values, checks, artifacts and timings for one run."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.output_dir = config.output_dir
        os.makedirs(self.output_dir, exist_ok=True)
        self.manifest = RunManifest(experiment=config.experiment, config=config.echo())
        self.timings: Dict[str, float] = {}

    def derive(self, name: str, value):
        self.manifest.derived[name] = value

    def check(self, name: str, passed: bool, measured, threshold, note: str = "") -> bool:
        result = CheckResult(name=name, passed=bool(passed), measured=measured, threshold=threshold, note=note)
        self.manifest.checks.append(result)
        if result.passed:
            logger.info("Check %s passed (measured %s, threshold %s)", name, measured, threshold)
        else:
            logger.warning("Check %s FAILED (measured %s, threshold %s)", name, measured, threshold)
        return result.passed

    def path(self, filename: str) -> str:
        return os.path.join(self.output_dir, filename)

    def _register(self, filename):
        if filename not in self.manifest.artifacts:
            self.manifest.artifacts.append(filename)
            self.manifest.artifacts.sort()

    def write_csv(self, filename: str, columns: Sequence[str], rows: Iterable[Sequence]):
        with open(self.path(filename), "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            count = 0
            for row in rows:
                writer.writerow([_csv_cell(v) for v in row])
                count += 1
        self._register(filename)
        logger.info("Wrote %s (%d rows)", filename, count)

    def write_json(self, filename: str, payload):
        with open(self.path(filename), "w", encoding="utf-8", newline="\n") as f:
            f.write(dumps_json(payload))
        self._register(filename)

    def write_npz(self, filename: str, **arrays):
        np.savez_compressed(self.path(filename), **arrays)
        self._register(filename)

    def adopt(self, filename: str):
        """Register a file some other writer already put in the output directory."""
        self._register(filename)

    @contextmanager
    def phase(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - start

    def rng(self, phase: str, index: int = 0) -> np.random.Generator:
        return rng_for(self.config.master_seed, phase, index)

    def map(self, fn, count: int, phase: str):
        with self.phase(phase):
            return run_indexed(fn, count, phase, self.config.master_seed, self.config.workers)

    def finish(self, error: Optional[BaseException] = None) -> RunManifest:
        if error is not None:
            self.manifest.status = STATUS_ERROR
            self.manifest.error = f"{type(error).__name__}: {error}"
        elif self.manifest.failed_checks:
            self.manifest.status = STATUS_CHECKS_FAILED
        else:
            self.manifest.status = STATUS_OK
        self._register("manifest.json")
        with open(self.path("manifest.json"), "w", encoding="utf-8", newline="\n") as f:
            f.write(dumps_json(self.manifest.to_record()))
        with open(self.path("timings.json"), "w", encoding="utf-8", newline="\n") as f:
            f.write(dumps_json(self.timings))
        logger.info("Run %s finished with status %s", self.config.experiment, self.manifest.status)
        return self.manifest
