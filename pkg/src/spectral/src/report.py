from dataclasses import asdict, dataclass
from enum import Enum


class Method(str, Enum):
    DENSE = "dense"
    ITERATIVE = "iterative"


@dataclass(frozen=True)
class SpectralReport:
    top_eigenvalue: float
    second_abs_eigenvalue: float
    bottom_eigenvalue: float
    method: Method
    residual: float
    iterations: int
    # signed second eigenvalue of the nontrivial spectrum
    second_eigenvalue: float

    def to_record(self) -> dict:
        record = asdict(self)
        record["method"] = self.method.value
        return record
