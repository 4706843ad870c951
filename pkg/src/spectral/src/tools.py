import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, eigsh

from spectral.src.adapters.dense_adapter import DenseEigensolverAdapter
from spectral.src.adapters.lanczos_adapter import EigenSolverConvergenceError, LanczosEigensolverAdapter
from spectral.src.config import Config
from spectral.src.report import Method, SpectralReport

logger = logging.getLogger(__name__)


all_adapters = {
    Method.DENSE: DenseEigensolverAdapter(),
    Method.ITERATIVE: LanczosEigensolverAdapter(),
}


class DegenerateDegreeError(ValueError):
    def __init__(self, vertex):
        super().__init__(f"vertex {vertex} has zero degree; remove isolated vertices first")
        self.vertex = vertex


class NotSymmetricError(ValueError):
    pass


class ContractViolationError(ValueError):
    pass


class VacuousInputError(ValueError):
    pass


class DegenerateEmbeddingError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class NormalizedOperator:
    """A = D^{-1/2} W D^{-1/2} with its known top eigenvector D^{1/2}1 / |D^{1/2}1|."""
    matrix: sparse.csr_matrix
    degrees: np.ndarray
    top_vector: np.ndarray
    labels: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return int(self.matrix.shape[0])


@dataclass(frozen=True)
class TrickleDownResult:
    passed: bool
    slack: float
    bound: float
    skeleton_value: float


def _weights_of(graph) -> sparse.csr_matrix:
    weights = getattr(graph, "weights", None)
    if weights is None:
        weights = getattr(graph, "adjacency", graph)
    if sparse.issparse(weights):
        return sparse.csr_matrix(weights, dtype=float)
    return sparse.csr_matrix(np.asarray(weights, dtype=float))


def _as_matrix(op):
    if isinstance(op, NormalizedOperator):
        return op.matrix
    if sparse.issparse(op):
        return op.tocsr()
    return np.asarray(op, dtype=float)


def normalized_adjacency(graph) -> NormalizedOperator:
    """
    Normalized adjacency of a weighted graph.

    Accepts a WeightedGraph, a GeoGraph, a scipy sparse matrix or a dense array.
    Raises DegenerateDegreeError naming the first zero-degree vertex.
    """
    weights = _weights_of(graph)
    if weights.shape[0] != weights.shape[1]:
        raise NotSymmetricError(f"adjacency must be square, got {weights.shape}")
    scale = max(1.0, float(abs(weights).max())) if weights.nnz else 1.0
    if weights.nnz and abs(weights - weights.T).max() > Config.SYMMETRY_TOL * scale:
        raise NotSymmetricError("adjacency is not symmetric")

    labels = getattr(graph, "labels", None)
    degrees = np.asarray(weights.sum(axis=1)).ravel()
    zero = np.flatnonzero(degrees <= 0.0)
    if zero.size:
        vertex = int(labels[zero[0]]) if labels is not None else int(zero[0])
        raise DegenerateDegreeError(vertex)

    inv_sqrt = sparse.diags(1.0 / np.sqrt(degrees))
    matrix = (inv_sqrt @ weights @ inv_sqrt).tocsr()
    matrix = ((matrix + matrix.T) * 0.5).tocsr()
    top = np.sqrt(degrees)
    return NormalizedOperator(matrix=matrix, degrees=degrees, top_vector=top / np.linalg.norm(top), labels=labels)


def second_abs_eigenvalue(op: NormalizedOperator, tol: float = Config.DEFAULT_TOL,
                          method: Optional[Union[Method, str]] = None) -> SpectralReport:
    """
    Largest |eigenvalue| of the normalized adjacency once one copy of the top eigenvalue is removed.

    Dense LAPACK for n <= Config.DENSE_MAX_N, Lanczos otherwise; `method` forces a path.
    """
    if tol <= 0.0:
        raise ContractViolationError("tol must be positive")
    if method is None:
        method = Method.DENSE if all_adapters[Method.DENSE].supports(op.n) else Method.ITERATIVE
    adapter = all_adapters[Method(method)]
    report = adapter.solve(op, tol)
    logger.debug("%s solver on n=%d: |lambda|_2=%s", adapter.name, op.n, report.second_abs_eigenvalue)
    return report


def stationary_projector(op: NormalizedOperator) -> np.ndarray:
    return np.outer(op.top_vector, op.top_vector)


def _check_rank1_psd(R):
    R = np.asarray(R, dtype=float)
    if R.ndim == 1:
        return np.outer(R, R)
    if R.ndim != 2 or R.shape[0] != R.shape[1] or not np.allclose(R, R.T, atol=Config.SYMMETRY_TOL):
        raise ContractViolationError("R must be a symmetric square matrix or a vector r with R = r r^T")
    values = np.linalg.eigvalsh(R)
    scale = max(1.0, float(np.abs(values).max()))
    if values.min() < -Config.RANK_TOL * scale or int(np.sum(values > Config.RANK_TOL * scale)) > 1:
        raise ContractViolationError("R is not positive semidefinite of rank at most 1")
    return R


def rank1_deflated_norm(op, R) -> float:
    """Spectral norm |op - R| for a rank-1 PSD R; always >= |lambda|_2(op)."""
    matrix = _as_matrix(op)
    R = _check_rank1_psd(R)
    n = matrix.shape[0]
    if R.shape != (n, n):
        raise ContractViolationError(f"R has shape {R.shape}, expected {(n, n)}")
    if n <= Config.DENSE_MAX_N:
        dense = matrix.toarray() if sparse.issparse(matrix) else matrix
        return float(np.abs(np.linalg.eigvalsh(dense - R)).max())
    difference = LinearOperator((n, n), matvec=lambda x: matrix @ np.ravel(x) - R @ np.ravel(x), dtype=float)
    values = eigsh(difference, k=1, which="LM", return_eigenvectors=False)
    return float(abs(values[0]))


def row_sum_bound(op) -> float:
    """Max absolute row sum; bounds |lambda|_max."""
    matrix = _as_matrix(op)
    if sparse.issparse(matrix):
        return float(abs(matrix).sum(axis=1).max())
    return float(np.abs(matrix).sum(axis=1).max())


def rayleigh_lower_bound(graph, stationary=None, points=None) -> float:
    """
    Test-embedding lower bound on lambda_2 of the reversible walk on `graph`.

    Parameters:
    - graph: GeoGraph (latent points taken from its cloud) or WeightedGraph.
    - stationary (array): stationary law of the walk; defaults to degrees / sum.
    - points (array): vectors aligned with the graph's vertices, required without a cloud.

    Returns:
    - float: 1 - E_edges|v_x - v_y|^2 / E_{pi x pi}|v_x - v_y|^2.
    """
    weights = _weights_of(graph)
    if points is None:
        cloud = getattr(graph, "cloud", None)
        if cloud is None:
            raise ContractViolationError("points are required for a graph without latent vectors")
        points = cloud.points
    points = np.asarray(points, dtype=float)
    if points.shape[0] != weights.shape[0]:
        raise ContractViolationError("points must be aligned with the graph's vertices")

    degrees = np.asarray(weights.sum(axis=1)).ravel()
    if np.any(degrees <= 0.0):
        raise DegenerateDegreeError(int(np.flatnonzero(degrees <= 0.0)[0]))
    pi = degrees / degrees.sum() if stationary is None else np.asarray(stationary, dtype=float)
    if abs(pi.sum() - 1.0) > Config.STATIONARY_SUM_TOL or np.any(pi < 0.0):
        raise ContractViolationError("stationary must be a probability vector")

    coo = weights.tocoo()
    squared = np.sum((points[coo.row] - points[coo.col]) ** 2, axis=1)
    along_edges = float(np.sum(pi[coo.row] / degrees[coo.row] * coo.data * squared))
    mean = pi @ points
    spread = 2.0 * float(pi @ np.sum(points ** 2, axis=1)) - 2.0 * float(mean @ mean)
    if spread <= Config.DEGENERATE_EMBEDDING_TOL:
        raise DegenerateEmbeddingError("all embedded points coincide")
    return 1.0 - along_edges / spread


def trickle_down_check(skeleton_report: SpectralReport, link_lambda_max: float,
                       tol: float = 1e-9) -> TrickleDownResult:
    if link_lambda_max >= 1.0:
        raise VacuousInputError(f"link bound {link_lambda_max} >= 1 makes the check vacuous")
    if link_lambda_max < 0.0:
        raise ContractViolationError("link_lambda_max must be nonnegative")
    bound = link_lambda_max / (1.0 - link_lambda_max)
    value = skeleton_report.second_abs_eigenvalue
    return TrickleDownResult(passed=value <= bound + tol, slack=bound - value, bound=bound, skeleton_value=value)


def eigenvalue_histogram(op: NormalizedOperator, bins: int = Config.HISTOGRAM_BINS):
    """Histogram of the full spectrum on [-1, 1], for inspection only."""
    values = np.linalg.eigvalsh(op.matrix.toarray())
    counts, edges = np.histogram(np.clip(values, -1.0, 1.0), bins=bins, range=(-1.0, 1.0))
    return counts, edges
