import numpy as np

from spectral.src.config import Config
from spectral.src.report import Method, SpectralReport
from .base_adapter import BaseEigensolverAdapter


class DenseEigensolverAdapter(BaseEigensolverAdapter):
    """Full symmetric eigendecomposition (LAPACK tridiagonalization + QR); ground truth for n <= 512."""

    @property
    def name(self) -> str:
        return "dense"

    def supports(self, n: int) -> bool:
        return n <= Config.DENSE_MAX_N

    def solve(self, op, tol):
        matrix = op.matrix.toarray()
        values, vectors = np.linalg.eigh(matrix)
        top = float(values[-1])
        if values.shape[0] < 2:
            return SpectralReport(top, 0.0, top, Method.DENSE, 0.0, 0, float("nan"))

        # drop one copy of the top eigenvalue; a repeated 1 stays in the remainder
        rest = values[:-1]
        pick = int(np.argmax(np.abs(rest)))
        x = vectors[:, pick]
        residual = float(np.linalg.norm(matrix @ x - rest[pick] * x))
        return SpectralReport(
            top_eigenvalue=top,
            second_abs_eigenvalue=float(np.abs(rest[pick])),
            bottom_eigenvalue=float(values[0]),
            method=Method.DENSE,
            residual=residual,
            iterations=0,
            second_eigenvalue=float(rest[-1]),
        )
