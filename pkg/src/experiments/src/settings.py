import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional

from config import HdxgeoConfig
from experiments.src.config import Config, Param

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    master_seed: int = HdxgeoConfig.DEFAULT_MASTER_SEED
    output_dir: str = HdxgeoConfig.DEFAULT_OUTPUT_DIR
    workers: int = HdxgeoConfig.DEFAULT_WORKERS

    def __getitem__(self, key):
        return self.parameters[key]

    def echo(self) -> dict:
        """Config as echoed into the manifest; output_dir is left out so runs in different folders match."""
        return {"experiment": self.experiment, "master_seed": self.master_seed, "parameters": dict(self.parameters)}


def _parse_env_value(name, raw, spec: Param):
    text = raw.strip()
    if spec.nullable and text.lower() in ("", "none", "null"):
        return None
    try:
        if spec.kind == "int":
            return int(text)
        if spec.kind == "float":
            return float(text)
        if spec.kind == "bool":
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if spec.kind == "int_list":
            return [int(x) for x in text.split(",") if x.strip()]
        if spec.kind == "float_list":
            return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise ConfigError(f"{name}: cannot parse {raw!r} as {spec.kind}") from e
    raise ConfigError(f"{name}: unknown kind {spec.kind}")


def _check_range(name, value, spec: Param):
    if isinstance(value, float) and not math.isfinite(value):
        raise ConfigError(f"{name}: value must be finite, got {value!r}")
    if spec.low is not None and (value < spec.low or (spec.low_open and value == spec.low)):
        bound = f"{'>' if spec.low_open else '>='} {spec.low}"
        raise ConfigError(f"{name}: {value!r} is below the allowed range ({bound})")
    if spec.high is not None and (value > spec.high or (spec.high_open and value == spec.high)):
        bound = f"{'<' if spec.high_open else '<='} {spec.high}"
        raise ConfigError(f"{name}: {value!r} is above the allowed range ({bound})")


def _validate_value(name, value, spec: Param):
    if value is None:
        if spec.nullable:
            return None
        raise ConfigError(f"{name}: value is required")
    if spec.kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{name}: expected a boolean, got {value!r}")
        return value
    if spec.kind in ("int", "float"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name}: expected a number, got {value!r}")
        if spec.kind == "int":
            if isinstance(value, float):
                if not value.is_integer():
                    raise ConfigError(f"{name}: expected an integer, got {value!r}")
                value = int(value)
        else:
            value = float(value)
        _check_range(name, value, spec)
        return value
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{name}: expected a nonempty list, got {value!r}")
    element = Param("int" if spec.kind == "int_list" else "float", spec.low, spec.high, spec.low_open, spec.high_open)
    return [_validate_value(f"{name}[{i}]", v, element) for i, v in enumerate(value)]


def validate_parameters(experiment: str, parameters: Mapping[str, Any]) -> Dict[str, Any]:
    info = Config.experiment_info(experiment)
    if info is None:
        raise ConfigError(f"experiment: unknown experiment {experiment!r}; choose one of {Config.experiment_names()}")
    allowed = info["defaults"]
    validated = {}
    for name, value in parameters.items():
        if name not in allowed:
            raise ConfigError(f"{name}: unknown parameter for experiment {experiment!r}")
        validated[name] = _validate_value(name, value, Config.PARAMETER_SCHEMA[name])
    return validated


def _read_file(path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except OSError as e:
        raise ConfigError(f"config: cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config: {path} is not valid JSON: {e}") from e
    if not isinstance(payload, dict):
        raise ConfigError("config: top level must be a flat object of key/value pairs")
    return payload


def _as_int(name, value, low):
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected an integer, got {value!r}")
    try:
        value = int(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{name}: expected an integer, got {value!r}") from e
    if value < low:
        raise ConfigError(f"{name}: must be >= {low}, got {value}")
    return value


def load_config(experiment: str, config_path: Optional[str] = None, seed: Optional[int] = None,
                out: Optional[str] = None, workers: Optional[int] = None,
                environ: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
    """
    Resolve an ExperimentConfig with precedence defaults < file < environment < CLI flags.

    Environment overrides are HDXGEO_<PARAM> for the experiment's parameters plus
    HDXGEO_MASTER_SEED, HDXGEO_OUTPUT_DIR and HDXGEO_WORKERS. Every value is validated
    before anything is sampled; failures raise ConfigError naming the field.
    """
    info = Config.experiment_info(experiment)
    if info is None:
        raise ConfigError(f"experiment: unknown experiment {experiment!r}; choose one of {Config.experiment_names()}")
    environ = os.environ if environ is None else environ

    parameters = dict(info["defaults"])
    master_seed = HdxgeoConfig.DEFAULT_MASTER_SEED
    output_dir = HdxgeoConfig.DEFAULT_OUTPUT_DIR
    worker_count = HdxgeoConfig.DEFAULT_WORKERS

    if config_path is not None:
        payload = _read_file(config_path)
        master_seed = payload.pop("master_seed", master_seed)
        output_dir = payload.pop("output_dir", output_dir)
        worker_count = payload.pop("workers", worker_count)
        parameters.update(validate_parameters(experiment, payload))

    prefix = HdxgeoConfig.ENV_PREFIX
    for name in info["defaults"]:
        raw = environ.get(prefix + name.upper())
        if raw is not None:
            parameters[name] = _parse_env_value(prefix + name.upper(), raw, Config.PARAMETER_SCHEMA[name])
    master_seed = environ.get(prefix + "MASTER_SEED", master_seed)
    output_dir = environ.get(prefix + "OUTPUT_DIR", output_dir)
    worker_count = environ.get(prefix + "WORKERS", worker_count)

    if seed is not None:
        master_seed = seed
    if out is not None:
        output_dir = out
    if workers is not None:
        worker_count = workers

    parameters = validate_parameters(experiment, parameters)
    master_seed = _as_int("master_seed", master_seed, 0)
    if master_seed >= 1 << 64:
        raise ConfigError("master_seed: must fit in 64 bits")
    config = ExperimentConfig(
        experiment=experiment,
        parameters=parameters,
        master_seed=master_seed,
        output_dir=str(output_dir),
        workers=_as_int("workers", worker_count, 1),
    )
    logger.info("Loaded config for %s (seed %d, %d workers)", experiment, config.master_seed, config.workers)
    return config
