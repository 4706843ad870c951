import logging
from typing import Optional

from experiments.src.config import Config
from experiments.src.delegator import ExperimentDelegator
from experiments.src.manifest import RunManifest
from experiments.src.settings import ExperimentConfig

logger = logging.getLogger(__name__)


def run(config: ExperimentConfig, delegator: Optional[ExperimentDelegator] = None) -> RunManifest:
    """
    Execute a validated experiment config.

    Parameters:
    - config (ExperimentConfig): resolved by settings.load_config.
    - delegator (ExperimentDelegator): defaults to one built over Config.EXPERIMENTS.

    Returns:
    - RunManifest: also written to <output_dir>/manifest.json. Its exit_code is
      0 when every check passed, 2 when any check failed and 1 on an execution error.
    """
    delegator = ExperimentDelegator(Config.EXPERIMENTS) if delegator is None else delegator
    manifest = delegator.delegate(config)
    if manifest.failed_checks:
        logger.warning("%d checks failed: %s", len(manifest.failed_checks),
                       ", ".join(c.name for c in manifest.failed_checks))
    return manifest
