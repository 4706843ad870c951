import math
from unittest.mock import MagicMock, patch

import networkx as nx
import numpy as np
import pytest
from scipy.sparse.linalg import ArpackNoConvergence

from spectral.src.adapters.dense_adapter import DenseEigensolverAdapter
from spectral.src.adapters.lanczos_adapter import EigenSolverConvergenceError, LanczosEigensolverAdapter
from spectral.src.report import Method, SpectralReport
from spectral.src.tools import normalized_adjacency, second_abs_eigenvalue


@pytest.fixture
def cycle_op():
    return normalized_adjacency(nx.to_numpy_array(nx.cycle_graph(40)))


@pytest.fixture
def odd_cycle_op():
    return normalized_adjacency(nx.to_numpy_array(nx.cycle_graph(41)))


def test_dense_supports_small_graphs_only():
    adapter = DenseEigensolverAdapter()
    assert adapter.supports(512)
    assert not adapter.supports(513)
    assert LanczosEigensolverAdapter().supports(10 ** 6)


def test_lanczos_agrees_with_dense(cycle_op, odd_cycle_op):
    for op in (cycle_op, odd_cycle_op):
        dense = DenseEigensolverAdapter().solve(op, 1e-8)
        lanczos = LanczosEigensolverAdapter().solve(op, 1e-8)
        assert lanczos.method is Method.ITERATIVE
        assert lanczos.second_abs_eigenvalue == pytest.approx(dense.second_abs_eigenvalue, abs=1e-6)
        assert lanczos.second_eigenvalue == pytest.approx(dense.second_eigenvalue, abs=1e-6)
        assert lanczos.bottom_eigenvalue == pytest.approx(dense.bottom_eigenvalue, abs=1e-6)
        assert lanczos.top_eigenvalue == pytest.approx(1.0, abs=1e-10)
        assert lanczos.iterations > 0


def test_odd_cycle_values(odd_cycle_op):
    report = second_abs_eigenvalue(odd_cycle_op, method="iterative", tol=1e-8)
    assert report.second_eigenvalue == pytest.approx(math.cos(2 * math.pi / 41), abs=1e-6)
    assert report.bottom_eigenvalue == pytest.approx(math.cos(2 * math.pi * 20 / 41), abs=1e-6)


def test_lanczos_needs_three_vertices():
    op = normalized_adjacency(np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(EigenSolverConvergenceError):
        LanczosEigensolverAdapter().solve(op, 1e-8)
    report = DenseEigensolverAdapter().solve(op, 1e-8)
    assert report.second_abs_eigenvalue == pytest.approx(1.0)


def test_lanczos_reports_non_convergence(cycle_op):
    failure = ArpackNoConvergence("no convergence", np.array([]), np.zeros((40, 0)))
    with patch("spectral.src.adapters.lanczos_adapter.eigsh", side_effect=failure):
        with pytest.raises(EigenSolverConvergenceError) as exc:
            LanczosEigensolverAdapter().solve(cycle_op, 1e-8)
    assert math.isnan(exc.value.residual)


def test_lanczos_rejects_large_residual(cycle_op):
    # a Ritz vector that is not an eigenvector
    junk = np.zeros((40, 1))
    junk[:2, 0] = 1.0
    with patch("spectral.src.adapters.lanczos_adapter.eigsh", return_value=(np.array([0.5]), junk)):
        with pytest.raises(EigenSolverConvergenceError) as exc:
            LanczosEigensolverAdapter().solve(cycle_op, 1e-8)
    assert exc.value.residual > 1e-8


def test_dispatch_picks_dense_for_small_operators(cycle_op):
    report = SpectralReport(1.0, 0.5, -0.5, Method.DENSE, 0.0, 0, 0.5)
    dense, iterative = MagicMock(), MagicMock()
    dense.supports.return_value = True
    dense.solve.return_value = report
    with patch.dict("spectral.src.tools.all_adapters", {Method.DENSE: dense, Method.ITERATIVE: iterative}):
        assert second_abs_eigenvalue(cycle_op) is report
        second_abs_eigenvalue(cycle_op, method=Method.ITERATIVE)
    dense.solve.assert_called_once_with(cycle_op, 1e-10)
    iterative.solve.assert_called_once()
