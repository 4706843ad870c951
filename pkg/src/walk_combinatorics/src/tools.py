import csv
import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from scipy import stats

from geo_complex.src.tools import geo_graph_from_points
from sphere_core.src.tools import sample_uniform_sphere_many, tau_of
from walk_combinatorics.src.config import Config

logger = logging.getLogger(__name__)


class NonClosedWalkError(ValueError):
    pass


class InvalidWalkError(ValueError):
    pass


class BudgetExceededError(RuntimeError):
    pass


class PatternTooLargeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WalkShape:
    """
    A closed walk i_0, ..., i_l = i_0 together with the graphs it induces.

    forest_part holds the edges of graph outside two_core. junction_graph is a
    MultiGraph on the junction vertices; each maximal degree-2 path of the
    2-core becomes one edge, a cycle component becomes a self-loop.
    """
    length: int
    vertices: Tuple[int, ...]
    multiplicities: Dict[Tuple[int, int], int]
    graph: nx.Graph
    two_core: nx.Graph
    forest_part: nx.Graph
    junction_graph: nx.MultiGraph

    @property
    def e(self) -> int:
        return self.graph.number_of_edges()

    @property
    def sing(self) -> int:
        return sum(1 for m in self.multiplicities.values() if m == 1)

    @property
    def exc(self) -> int:
        return excess(self.graph)

    @property
    def walk_class(self) -> Tuple[int, int, int]:
        return self.e, self.sing, self.exc


@dataclass(frozen=True)
class ClassRow:
    ell: int
    a: int
    b: int
    c: int
    true_count: int
    bound: Union[int, Fraction]


@dataclass(frozen=True)
class SubgraphEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    successes: int
    trials: int
    upper_bound_only: bool
    expected_copies: float


@dataclass(frozen=True)
class PatternRow:
    pattern_id: str
    estimate: float
    ci_low: float
    ci_high: float
    analytic_reference: float


@dataclass(frozen=True)
class TraceEstimate:
    mean: float
    ci_half_width: float
    mean_norm: float
    markov_threshold: float
    violation_rate: float
    violation_bound: float
    trials: int


def excess(g) -> int:
    """|E| - |V| + (number of components); 0 for the empty graph."""
    if g.number_of_nodes() == 0:
        return 0
    return g.number_of_edges() - g.number_of_nodes() + nx.number_connected_components(g)


def _validate(walk) -> Tuple[int, ...]:
    walk = tuple(int(v) for v in walk)
    if len(walk) < 2 or walk[0] != walk[-1]:
        raise NonClosedWalkError(f"walk must end where it starts: {walk!r}")
    for a, b in zip(walk, walk[1:]):
        if a == b:
            raise InvalidWalkError(f"self-step at vertex {a}; walks live on K_n without loops")
    return walk


def _junction_graph(core: nx.Graph) -> nx.MultiGraph:
    junction = {v for v, deg in core.degree() if deg != 2}
    for component in nx.connected_components(core):
        if not junction & component:
            # a bare cycle: the minimum label stands in as its junction vertex
            junction.add(min(component))

    jg = nx.MultiGraph()
    jg.add_nodes_from(sorted(junction))
    used = set()
    for start in sorted(junction):
        for first in sorted(core.neighbors(start)):
            if frozenset((start, first)) in used:
                continue
            used.add(frozenset((start, first)))
            previous, current, steps = start, first, 1
            while current not in junction:
                following = next(w for w in core.neighbors(current) if w != previous)
                used.add(frozenset((current, following)))
                previous, current, steps = current, following, steps + 1
            jg.add_edge(start, current, length=steps)
    return jg


def decompose(walk: Sequence[int]) -> WalkShape:
    """
    Derived graphs of a closed walk given as i_0, ..., i_l with i_l = i_0.

    Raises NonClosedWalkError if the last vertex differs from the first and
    InvalidWalkError on a self-step.
    """
    walk = _validate(walk)
    multiplicities = Counter(tuple(sorted(step)) for step in zip(walk, walk[1:]))
    graph = nx.Graph()
    graph.add_nodes_from(walk)
    graph.add_edges_from(multiplicities)

    core = nx.k_core(graph, 2).copy()
    forest = nx.Graph()
    forest.add_edges_from(e for e in graph.edges() if not core.has_edge(*e))
    return WalkShape(
        length=len(walk) - 1,
        vertices=walk,
        multiplicities=dict(sorted(multiplicities.items())),
        graph=graph,
        two_core=core,
        forest_part=forest,
        junction_graph=_junction_graph(core),
    )


def canonical_form(walk: Sequence[int]) -> Tuple[int, ...]:
    """Relabel vertices by order of first visit."""
    labels = {}
    return tuple(labels.setdefault(v, len(labels)) for v in walk)


def _canonical_walks(ell: int) -> Iterator[Tuple[int, ...]]:
    # restricted growth strings with no self-steps, closing back to 0
    def extend(prefix, top):
        if len(prefix) == ell:
            if prefix[-1] != 0:
                yield prefix + (0,)
            return
        for v in range(top + 2):
            if v != prefix[-1]:
                yield from extend(prefix + (v,), max(top, v))

    if ell >= 2:
        yield from extend((0,), 0)


def _falling(n, k) -> int:
    return math.perm(n, k) if k <= n else 0


def enumerate_shapes(ell: int, n_labels: int, budget: Optional[int] = None) -> Iterator[Tuple[WalkShape, int]]:
    """
    Every closed walk of length ell on K_{n_labels}, grouped by first-visit relabeling.

    Yields (shape of the canonical representative, number of labeled walks in its class).
    The multiplicities sum to the number of closed walks.
    """
    budget = Config.ENUMERATION_BUDGET if budget is None else budget
    if n_labels ** ell > budget:
        raise BudgetExceededError(f"{n_labels}^{ell} walks exceed the enumeration budget {budget}")
    for walk in _canonical_walks(ell):
        count = _falling(n_labels, len(set(walk)))
        if count:
            yield decompose(walk), count


def class_counts(ell: int, n_labels: int, budget: Optional[int] = None) -> Counter:
    counts = Counter()
    for shape, count in enumerate_shapes(ell, n_labels, budget):
        counts[shape.walk_class] += count
    return counts


def count_bound(ell: int, n: int, a: int, b: int, c: int) -> Union[int, Fraction]:
    """n^{a-c+1} * ell^{2(ell-b)} * ell^{2c}, exactly; a Fraction when a - c + 1 < 0."""
    exponent = a - c + 1
    rest = ell ** (2 * (ell - b) + 2 * c)
    if exponent < 0:
        return Fraction(rest, n ** (-exponent))
    return n ** exponent * rest


def class_table(ell: int, n_labels: int) -> List[ClassRow]:
    counts = class_counts(ell, n_labels)
    return [
        ClassRow(ell=ell, a=a, b=b, c=c, true_count=count, bound=count_bound(ell, n_labels, a, b, c))
        for (a, b, c), count in sorted(counts.items())
    ]


def check_shape_invariants(shape: WalkShape) -> List[str]:
    """Names of the structural invariants the shape violates; empty when all hold."""
    violated = []
    union = {frozenset(e) for e in shape.two_core.edges()} | {frozenset(e) for e in shape.forest_part.edges()}
    if union != {frozenset(e) for e in shape.graph.edges()}:
        violated.append("graph_is_union")
    if any(deg < 2 for _, deg in shape.two_core.degree()):
        violated.append("two_core_min_degree")
    if shape.forest_part.number_of_nodes():
        if not nx.is_forest(shape.forest_part):
            violated.append("forest_part_acyclic")
        core_nodes = set(shape.two_core.nodes())
        if any(len(core_nodes & comp) > 1 for comp in nx.connected_components(shape.forest_part)):
            violated.append("forest_meets_core_once")
    if not excess(shape.graph) == excess(shape.two_core) == excess(shape.junction_graph):
        violated.append("excess_preserved")
    if shape.junction_graph.number_of_edges() > 3 * shape.exc:
        violated.append("junction_edges")
    if 2 * shape.e > shape.length + shape.sing:
        violated.append("edge_count")
    return violated


def _pattern_nodes(pattern: nx.Graph):
    nodes = sorted(pattern.nodes())
    if len(nodes) > Config.MAX_PATTERN_VERTICES:
        raise PatternTooLargeError(f"pattern has {len(nodes)} vertices; at most {Config.MAX_PATTERN_VERTICES}")
    index = {v: i for i, v in enumerate(nodes)}
    edges = np.array([(index[u], index[v]) for u, v in pattern.edges()], dtype=np.int64).reshape(-1, 2)
    return len(nodes), edges


def subgraph_probability_mc(pattern: nx.Graph, n: int, d: int, p: float, trials: int,
                            rng: np.random.Generator) -> SubgraphEstimate:
    """
    Probability that independent uniform vectors realize every edge of `pattern`.

    Parameters:
    - pattern (nx.Graph): at most Config.MAX_PATTERN_VERTICES vertices.
    - n (int): host graph size; scales the estimate to expected labeled copies.
    - d, p: sphere dimension and edge probability.
    - trials (int): independent vector tuples.

    Returns:
    - SubgraphEstimate: point estimate with a Wilson interval. With zero successes
      only the upper end is informative and upper_bound_only is set.
    """
    k, edges = _pattern_nodes(pattern)
    tau = tau_of(p, d)
    successes = 0
    for start in range(0, trials, Config.MC_CHUNK):
        size = min(Config.MC_CHUNK, trials - start)
        vectors = sample_uniform_sphere_many(size * k, d, rng).reshape(size, k, d)
        ok = np.ones(size, dtype=bool)
        for u, v in edges:
            ok &= np.einsum("ij,ij->i", vectors[:, u], vectors[:, v]) >= tau
        successes += int(ok.sum())

    interval = stats.binomtest(successes, trials).proportion_ci(confidence_level=Config.CI_LEVEL, method="wilson")
    estimate = successes / trials
    if successes == 0:
        logger.warning("no successes in %d trials; reporting an upper bound only", trials)
    return SubgraphEstimate(
        estimate=estimate,
        ci_low=float(interval.low),
        ci_high=float(interval.high),
        successes=successes,
        trials=trials,
        upper_bound_only=successes == 0,
        expected_copies=_falling(n, k) * estimate,
    )


def triangle_window(p: float, d: int) -> Tuple[float, float]:
    """[p^3, p^2 (p + 1.5 tau sqrt(log(1/p) / 2))] for the triangle probability."""
    tau = tau_of(p, d)
    upper = p * p * (p + Config.TRIANGLE_SLACK * max(tau, 0.0) * math.sqrt(0.5 * math.log(1.0 / p)))
    return p ** 3, upper


@dataclass(frozen=True)
class TriangleVerdict:
    status: str
    passed: bool


def judge_triangle(est: SubgraphEstimate, low: float, high: float) -> TriangleVerdict:
    """
    The estimate must sit inside [low, high] with a Wilson interval narrower than the window.
    A wider interval, or zero successes, only bounds the probability from above.
    """
    if est.upper_bound_only or est.ci_high - est.ci_low >= high - low:
        return TriangleVerdict(status=Config.TRIANGLE_UPPER_BOUND_ONLY, passed=False)
    if low <= est.estimate <= high:
        return TriangleVerdict(status=Config.TRIANGLE_INSIDE, passed=True)
    return TriangleVerdict(status=Config.TRIANGLE_OUTSIDE, passed=False)


def random_forest(k: int, rng: np.random.Generator) -> nx.Graph:
    """Random labeled forest on k vertices: each vertex joins a uniform earlier one with probability 1/2."""
    forest = nx.Graph()
    forest.add_nodes_from(range(k))
    for v in range(1, k):
        if rng.random() < 0.5:
            forest.add_edge(int(rng.integers(v)), v)
    return forest


def trace_power_mc(n: int, d: int, p: float, ell: int, trials: int, rng: np.random.Generator,
                   epsilon: float = Config.MARKOV_EPSILON) -> TraceEstimate:
    """
    Monte Carlo E tr(M^ell) for the centered adjacency M = A - p(J - I) of Geo_d(n, p).

    Also reports the mean spectral norm and how often |M| exceeds e^eps (estimate)^{1/ell},
    which Markov's inequality bounds by e^{-eps ell}.
    """
    if n > Config.MAX_TRACE_N or ell > Config.MAX_TRACE_ELL or ell % 2:
        raise ValueError(f"need n <= {Config.MAX_TRACE_N} and even ell <= {Config.MAX_TRACE_ELL}")
    tau = tau_of(p, d)
    offset = p * (np.ones((n, n)) - np.eye(n))
    traces = np.empty(trials)
    norms = np.empty(trials)
    for t in range(trials):
        g = geo_graph_from_points(sample_uniform_sphere_many(n, d, rng), tau, p=p)
        values = np.linalg.eigvalsh(g.adjacency.toarray().astype(float) - offset)
        traces[t] = np.sum(values ** ell)
        norms[t] = np.abs(values).max()

    mean = float(traces.mean())
    spread = float(traces.std(ddof=1)) if trials > 1 else 0.0
    threshold = math.exp(epsilon) * max(mean, 0.0) ** (1.0 / ell)
    return TraceEstimate(
        mean=mean,
        ci_half_width=3.0 * spread / math.sqrt(trials),
        mean_norm=float(norms.mean()),
        markov_threshold=threshold,
        violation_rate=float(np.mean(norms > threshold)),
        violation_bound=math.exp(-epsilon * ell),
        trials=trials,
    )


def write_class_table(path, rows: Sequence[ClassRow]):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["ell", "a", "b", "c", "true_count", "paper_bound"])
        for row in rows:
            writer.writerow([row.ell, row.a, row.b, row.c, row.true_count, row.bound])


def write_pattern_table(path, rows: Sequence[PatternRow]):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["pattern_id", "estimate", "ci_low", "ci_high", "analytic_reference"])
        for row in rows:
            writer.writerow([row.pattern_id, repr(float(row.estimate)), repr(float(row.ci_low)),
                             repr(float(row.ci_high)), repr(float(row.analytic_reference))])
