from abc import ABC, abstractmethod


class BaseEigensolverAdapter(ABC):

    @property
    @abstractmethod
    def name(self) -> str:
        pass

    @abstractmethod
    def solve(self, op, tol: float):
        """Return a SpectralReport for a NormalizedOperator."""
        pass

    def supports(self, n: int) -> bool:
        return True
