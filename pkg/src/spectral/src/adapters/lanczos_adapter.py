import logging
import math

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from spectral.src.config import Config
from spectral.src.report import Method, SpectralReport
from .base_adapter import BaseEigensolverAdapter

logger = logging.getLogger(__name__)


class EigenSolverConvergenceError(RuntimeError):
    def __init__(self, message, residual=math.nan):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


class LanczosEigensolverAdapter(BaseEigensolverAdapter):
    """
    ARPACK Lanczos on the operator with the known top eigenpair deflated.

    The top eigenvector phi = D^{1/2}1/|D^{1/2}1| is moved to eigenvalue
    -2 when the largest eigenvalue is wanted. It is moved to +2 when the
    smallest is wanted. Either way it can never be returned. Every Ritz
    pair is certified by its residual |A x - lambda x|.
    """

    @property
    def name(self) -> str:
        return "lanczos"

    def _shifted(self, op, shift, counter):
        phi = op.top_vector
        matrix = op.matrix

        # A phi = phi, so A + (shift - 1) phi phi^T keeps every other eigenpair
        def matvec(x):
            counter[0] += 1
            x = np.ravel(x)
            return matrix @ x + (shift - 1.0) * phi * (phi @ x)

        return LinearOperator(matrix.shape, matvec=matvec, dtype=float)

    def _extreme(self, op, which, tol, maxiter, counter):
        phi = op.top_vector
        n = op.n
        shift = -Config.DEFLATION_SHIFT if which == "LA" else Config.DEFLATION_SHIFT
        operator = self._shifted(op, shift, counter)
        v0 = np.random.default_rng(Config.START_VECTOR_SEED).standard_normal(n)
        v0 -= phi * (phi @ v0)
        try:
            values, vectors = eigsh(operator, k=1, which=which, v0=v0,
                                    tol=tol * Config.ARPACK_TOL_FACTOR, maxiter=maxiter)
        except ArpackNoConvergence as e:
            residual = math.nan
            if len(e.eigenvalues):
                x = e.eigenvectors[:, 0]
                residual = float(np.linalg.norm(op.matrix @ x - e.eigenvalues[0] * x))
            logger.error("Lanczos (%s) did not converge after %d matvecs", which, counter[0])
            raise EigenSolverConvergenceError(f"Lanczos ({which}) did not converge", residual) from e

        x = vectors[:, 0]
        x = x - phi * (phi @ x)
        x /= np.linalg.norm(x)
        value = float(x @ (op.matrix @ x))
        residual = float(np.linalg.norm(op.matrix @ x - value * x))
        return value, residual

    def solve(self, op, tol):
        n = op.n
        if n < 3:
            raise EigenSolverConvergenceError("Lanczos needs at least 3 vertices; use the dense adapter")
        maxiter = int(math.ceil(Config.ITERATION_FACTOR * math.sqrt(n) * math.log(1.0 / tol)))
        counter = [0]
        largest, res_largest = self._extreme(op, "LA", tol, maxiter, counter)
        smallest, res_smallest = self._extreme(op, "SA", tol, maxiter, counter)

        norm_estimate = max(1.0, float(abs(op.matrix).sum(axis=1).max()))
        residual = max(res_largest, res_smallest)
        if residual > tol * norm_estimate:
            logger.error("Ritz residual %.3e exceeds tolerance %.3e", residual, tol * norm_estimate)
            raise EigenSolverConvergenceError("Ritz residual above tolerance", residual)

        phi = op.top_vector
        top = float(phi @ (op.matrix @ phi))
        logger.debug("Lanczos: lambda_2=%s lambda_min=%s after %d matvecs", largest, smallest, counter[0])
        return SpectralReport(
            top_eigenvalue=top,
            second_abs_eigenvalue=max(abs(largest), abs(smallest)),
            bottom_eigenvalue=smallest,
            method=Method.ITERATIVE,
            residual=residual,
            iterations=counter[0],
            second_eigenvalue=largest,
        )
