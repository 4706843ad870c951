import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from geo_complex.src.config import Config
from shell_analysis.src.shells import ShellVector
from sphere_core.src.tools import sample_uniform_sphere_many, tau_of

logger = logging.getLogger(__name__)


class InvalidParameterError(ValueError):
    pass


class ResourceBudgetError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    d: int
    seed: Optional[int]

    @property
    def n(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Symmetric nonnegative weights on vertices carrying their original labels."""
    labels: np.ndarray
    weights: sparse.csr_matrix

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @property
    def edge_count(self) -> int:
        return int(sparse.triu(self.weights, k=1).nnz)

    @property
    def degrees(self) -> np.ndarray:
        return np.asarray(self.weights.sum(axis=1)).ravel()

    def without_isolated(self) -> "WeightedGraph":
        keep = np.flatnonzero(self.degrees > 0)
        return WeightedGraph(labels=self.labels[keep], weights=self.weights[keep][:, keep].tocsr())

    def components(self) -> Tuple[int, np.ndarray]:
        if self.n == 0:
            return 0, np.zeros(0, dtype=np.int64)
        return csgraph.connected_components(self.weights, directed=False)


@dataclass(frozen=True, eq=False)
class GeoGraph:
    cloud: Optional[PointCloud]
    tau: float
    p: float
    adjacency: sparse.csr_matrix
    degrees: np.ndarray
    d: Optional[int] = None
    seed: Optional[int] = None

    @property
    def n(self) -> int:
        return int(self.adjacency.shape[0])

    def edges(self) -> np.ndarray:
        """Sorted (i, j) pairs with i < j."""
        upper = sparse.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return np.column_stack((upper.row[order], upper.col[order])).astype(np.int64)

    def neighbors(self, v) -> np.ndarray:
        return self.adjacency.indices[self.adjacency.indptr[v]:self.adjacency.indptr[v + 1]]


@dataclass(frozen=True, eq=False)
class TwoComplex:
    vertex_count: int
    triangles: np.ndarray
    edges: np.ndarray
    edge_counts: np.ndarray
    vertex_weight_values: np.ndarray

    @cached_property
    def edge_weights(self) -> Dict[Tuple[int, int], int]:
        return {(int(i), int(j)): int(w) for (i, j), w in zip(self.edges, self.edge_counts)}

    @cached_property
    def vertex_weights(self) -> Dict[int, int]:
        return {v: int(w) for v, w in enumerate(self.vertex_weight_values)}

    @cached_property
    def _incidence(self):
        flat = self.triangles.ravel()
        owner = np.repeat(np.arange(self.triangles.shape[0]), 3)
        order = np.argsort(flat, kind="stable")
        offsets = np.concatenate(([0], np.cumsum(np.bincount(flat, minlength=self.vertex_count))))
        return owner[order], offsets

    def triangles_containing(self, v) -> np.ndarray:
        owner, offsets = self._incidence
        return self.triangles[owner[offsets[v]:offsets[v + 1]]]


@dataclass(frozen=True, eq=False)
class Link:
    center: int
    graph: WeightedGraph
    shells: Optional[ShellVector]
    raw_neighbor_count: int


@dataclass(frozen=True, eq=False)
class SkeletonGraph:
    graph: WeightedGraph
    connected: bool
    component_count: int


def _symmetric_boolean(n, rows, cols):
    data = np.ones(2 * len(rows), dtype=bool)
    adjacency = sparse.coo_matrix(
        (data, (np.concatenate((rows, cols)), np.concatenate((cols, rows)))), shape=(n, n)
    ).tocsr()
    adjacency.sum_duplicates()
    adjacency.sort_indices()
    return adjacency


def _geo_graph(adjacency, cloud, tau, p, d, seed):
    degrees = np.asarray(adjacency.sum(axis=1)).ravel().astype(np.int64)
    return GeoGraph(cloud=cloud, tau=tau, p=p, adjacency=adjacency, degrees=degrees, d=d, seed=seed)


def geo_graph_from_points(points, tau, p=math.nan, seed=None):
    """Threshold graph: i ~ j iff <u_i, u_j> >= tau. Ties count as edges."""
    points = np.asarray(points, dtype=float)
    n, d = points.shape
    rows, cols = [], []
    for start in range(0, n, Config.GRAM_BLOCK_ROWS):
        stop = min(n, start + Config.GRAM_BLOCK_ROWS)
        gram = points[start:stop] @ points.T
        r, c = np.nonzero(gram >= tau)
        r = r + start
        upper = c > r
        rows.append(r[upper])
        cols.append(c[upper])
    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    adjacency = _symmetric_boolean(n, rows, cols)
    cloud = PointCloud(points=points, d=d, seed=seed)
    return _geo_graph(adjacency, cloud, float(tau), float(p), d, seed)


def sample_geo_graph(n: int, d: int, p: float, seed: int, pair_budget: Optional[int] = None) -> GeoGraph:
    """
    Sample Geo_d(n, p).

    Parameters:
    - n (int): number of vertices, >= 1.
    - d (int): ambient dimension, >= 2.
    - p (float): edge probability in (0, 1]; sets tau = tau_of(p, d).
    - seed (int): seed of the point stream.
    - pair_budget (int): overrides Config.MAX_PAIR_EVALUATIONS.

    Returns:
    - GeoGraph: exact threshold graph on n fresh uniform points.

    Raises:
    - InvalidParameterError: on n, d or p outside their ranges.
    - ResourceBudgetError: if n(n-1)/2 exceeds the pair budget.
    """
    if n < 1 or d < 2 or not 0.0 < p <= 1.0:
        raise InvalidParameterError(f"need n >= 1, d >= 2, 0 < p <= 1; got n={n}, d={d}, p={p}")
    budget = Config.MAX_PAIR_EVALUATIONS if pair_budget is None else pair_budget
    pairs = n * (n - 1) // 2
    if pairs > budget:
        raise ResourceBudgetError(f"{pairs} pair evaluations exceed the budget of {budget}")

    rng = np.random.default_rng(seed)
    points = sample_uniform_sphere_many(n, d, rng)
    tau = tau_of(p, d)
    graph = geo_graph_from_points(points, tau, p=p, seed=seed)
    logger.info("Sampled Geo_%d(%d, %s): tau=%.6f, %d edges", d, n, p, tau, int(graph.degrees.sum()) // 2)
    return graph


def graph_from_edges(n, edges, tau=math.nan, p=math.nan, d=None, seed=None) -> GeoGraph:
    """Explicit graph with no latent points, for hand-built instances and deserialization."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= n):
        raise InvalidParameterError("edge endpoint out of range")
    if np.any(edges[:, 0] == edges[:, 1]):
        raise InvalidParameterError("self-loops are not allowed")
    lo = np.minimum(edges[:, 0], edges[:, 1])
    hi = np.maximum(edges[:, 0], edges[:, 1])
    return _geo_graph(_symmetric_boolean(n, lo, hi), None, tau, p, d, seed)


def complex_from_triangles(vertex_count, triangles) -> TwoComplex:
    triangles = np.sort(np.asarray(triangles, dtype=np.int64).reshape(-1, 3), axis=1)
    if triangles.shape[0]:
        triangles = triangles[np.lexsort((triangles[:, 2], triangles[:, 1], triangles[:, 0]))]
    pairs = np.concatenate((triangles[:, [0, 1]], triangles[:, [0, 2]], triangles[:, [1, 2]]))
    keys, counts = np.unique(pairs[:, 0] * vertex_count + pairs[:, 1], return_counts=True)
    edges = np.column_stack((keys // vertex_count, keys % vertex_count)).astype(np.int64)
    vertex_weights = (
        np.bincount(edges[:, 0], weights=counts, minlength=vertex_count)
        + np.bincount(edges[:, 1], weights=counts, minlength=vertex_count)
    ).astype(np.int64)
    return TwoComplex(
        vertex_count=int(vertex_count),
        triangles=triangles,
        edges=edges,
        edge_counts=counts.astype(np.int64),
        vertex_weight_values=vertex_weights,
    )


def _forward_neighbours(upper, rows):
    """(position in rows, forward neighbour) for every stored entry of the given rows of upper."""
    starts = upper.indptr[rows]
    lengths = (upper.indptr[rows + 1] - starts).astype(np.int64)
    owner = np.repeat(np.arange(rows.size), lengths)
    offsets = np.arange(int(lengths.sum())) - np.repeat(np.cumsum(lengths) - lengths, lengths)
    return owner, upper.indices[np.repeat(starts, lengths) + offsets].astype(np.int64)


def build_two_complex(g: GeoGraph) -> TwoComplex:
    """All 3-cliques of g with downward-closed triangle-count weights."""
    n = g.n
    upper = sparse.triu(g.adjacency, k=1, format="csr").astype(np.int64)
    upper.sort_indices()
    # entry (i, k) of (U U) o U counts the middles j with i < j < k closing a triangle
    closing = upper.dot(upper).multiply(upper).tocoo()
    keep = closing.data > 0
    first, last = closing.row[keep].astype(np.int64), closing.col[keep].astype(np.int64)
    edge_keys = np.sort(g.edges() @ np.array([n, 1], dtype=np.int64))

    found = []
    for start in range(0, first.size, Config.CLOSING_EDGE_BATCH):
        stop = start + Config.CLOSING_EDGE_BATCH
        rows, ends = first[start:stop], last[start:stop]
        owner, middle = _forward_neighbours(upper, rows)
        end = ends[owner]
        inside = middle < end
        owner, middle, end = owner[inside], middle[inside], end[inside]
        keys = middle * n + end
        position = np.minimum(np.searchsorted(edge_keys, keys), max(edge_keys.size - 1, 0))
        hit = edge_keys[position] == keys
        found.append(np.column_stack((rows[owner[hit]], middle[hit], end[hit])))
    triangles = np.concatenate(found) if found else np.zeros((0, 3), dtype=np.int64)
    if triangles.shape[0] != int(closing.data.sum()):
        raise RuntimeError("triangle enumeration disagrees with the closing-edge counts")
    c = complex_from_triangles(n, triangles)
    logger.info("Built 2-complex: %d triangles, %d weighted edges", c.triangles.shape[0], c.edges.shape[0])
    return c


def link_of(c: TwoComplex, g: GeoGraph, v: int) -> Link:
    if not 0 <= v < c.vertex_count:
        raise InvalidParameterError(f"vertex {v} outside [0, {c.vertex_count})")
    tris = c.triangles_containing(v)
    others = tris[tris != v].reshape(-1, 2)
    labels = np.unique(others)
    local = np.searchsorted(labels, others)
    m = labels.shape[0]
    weights = sparse.coo_matrix(
        (np.ones(2 * local.shape[0]), (np.concatenate((local[:, 0], local[:, 1])),
                                       np.concatenate((local[:, 1], local[:, 0])))),
        shape=(m, m),
    ).tocsr()

    shells = None
    if g.cloud is not None:
        kappas = g.cloud.points[labels] @ g.cloud.points[v]
        shells = ShellVector(kappas=kappas, tau=g.tau, d=g.cloud.d)
    if m == 0:
        logger.debug("vertex %d has an empty link", v)
    return Link(center=int(v), graph=WeightedGraph(labels=labels, weights=weights),
                shells=shells, raw_neighbor_count=int(g.degrees[v]))


def one_skeleton(c: TwoComplex) -> SkeletonGraph:
    """Triangle-count weighted graph on the vertices that lie in at least one triangle."""
    labels = np.flatnonzero(c.vertex_weight_values > 0)
    local = np.searchsorted(labels, c.edges)
    m = labels.shape[0]
    weights = sparse.coo_matrix(
        (np.concatenate((c.edge_counts, c.edge_counts)).astype(float),
         (np.concatenate((local[:, 0], local[:, 1])), np.concatenate((local[:, 1], local[:, 0])))),
        shape=(m, m),
    ).tocsr()
    graph = WeightedGraph(labels=labels, weights=weights)
    count, _ = graph.components()
    return SkeletonGraph(graph=graph, connected=count == 1, component_count=int(count))
