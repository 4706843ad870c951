from abc import ABC, abstractmethod
from typing import Any, Dict, List


class ExperimentRunner(ABC):
    """One registered experiment. Subclasses fill `execute` and report through the recorder."""

    def __init__(self, experiment_info: Dict[str, Any]):
        self.experiment_info = experiment_info

    @property
    def name(self) -> str:
        return self.experiment_info["name"]

    def columns(self, filename: str) -> List[str]:
        return self.experiment_info["columns"][filename]

    @abstractmethod
    def execute(self, config, recorder):
        pass
