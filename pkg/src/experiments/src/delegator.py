import importlib
import logging

from experiments.src.manifest import STATUS_ERROR, RunManifest, RunRecorder
from experiments.src.settings import ExperimentConfig

logger = logging.getLogger(__name__)


class ExperimentDelegator:
    def __init__(self, config):
        self.config = config
        self.runners = self.load_runners(config)
        logger.info("Delegator initialized with %d experiments", len(self.runners))

    def load_runners(self, config):
        runners = {}
        for experiment_info in config["experiments"]:
            try:
                module = importlib.import_module(experiment_info["path"])
                runner_class = getattr(module, experiment_info["class"])
                runners[experiment_info["name"]] = runner_class(experiment_info)
                logger.info("Loaded experiment: %s", experiment_info["name"])
            except Exception as e:
                logger.error("Failed to load experiment %s: %s", experiment_info["name"], str(e))
        return runners

    def delegate(self, config: ExperimentConfig) -> RunManifest:
        """
        Run one experiment and write its manifest.

        The manifest is written on every path: check failures give status
        checks_failed, any exception gives status error. If the output
        directory cannot be created the error manifest is only returned.
        """
        try:
            recorder = RunRecorder(config)
        except OSError as e:
            logger.error("Cannot create output directory %s: %s", config.output_dir, str(e))
            return RunManifest(experiment=config.experiment, config=config.echo(), status=STATUS_ERROR,
                               error=f"{type(e).__name__}: {e}")
        runner = self.runners.get(config.experiment)
        if runner is None:
            logger.warning("Attempted to delegate to non-existent experiment: %s", config.experiment)
            return recorder.finish(error=LookupError(f"no such experiment registered: {config.experiment}"))
        logger.info("Delegating run to experiment: %s", config.experiment)
        try:
            with recorder.phase("total"):
                runner.execute(config, recorder)
        except Exception as e:
            logger.error("Error while running %s: %s", config.experiment, str(e))
            return recorder.finish(error=e)
        return recorder.finish()
