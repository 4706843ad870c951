import logging
from dataclasses import dataclass

import numpy as np

from experiments.src.runners.base import ExperimentRunner
from experiments.src.settings import ConfigError
from geo_complex.src.tools import WeightedGraph, sample_geo_graph
from spectral.src.tools import normalized_adjacency, rayleigh_lower_bound, second_abs_eigenvalue
from sphere_core.src.tools import BetaDist, beta_tail, tau_of

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectrumSample:
    seed_index: int
    lambda2: float
    abs_lambda2: float
    rayleigh_lower: float
    isolated: int
    method: str


def resolve_density(d, p, tau):
    """(p, tau) from whichever one is given; tau wins when both are."""
    if d is None:
        raise ConfigError("d: value is required for this experiment")
    if tau is not None:
        return beta_tail(BetaDist(d), tau), tau
    if p is None:
        raise ConfigError("p: either p or tau must be given")
    return p, tau_of(p, d)


def graph_spectrum(n, d, p, graph_seed, tol):
    """lambda_2 of Geo_d(n, p) restricted to its non-isolated vertices, with the latent-vector lower bound."""
    g = sample_geo_graph(n, d, p, graph_seed)
    graph = WeightedGraph(labels=np.arange(g.n), weights=g.adjacency.astype(float)).without_isolated()
    report = second_abs_eigenvalue(normalized_adjacency(graph), tol=tol)
    lower = rayleigh_lower_bound(graph, points=g.cloud.points[graph.labels])
    return report, lower, g.n - graph.n


class SphereSpectrumExperiment(ExperimentRunner):
    def execute(self, config, recorder):
        n, d = config["n"], config["d"]
        p, tau = resolve_density(d, config["p"], config["tau"])
        recorder.derive("p", p)
        recorder.derive("tau", tau)
        recorder.derive("expected_degree", p * (n - 1))

        def one_seed(index, rng):
            report, lower, isolated = graph_spectrum(n, d, p, int(rng.integers(2 ** 63)), config["tol"])
            return SpectrumSample(seed_index=index, lambda2=report.second_eigenvalue,
                                  abs_lambda2=report.second_abs_eigenvalue, rayleigh_lower=lower,
                                  isolated=isolated, method=report.method.value)

        samples = recorder.map(one_seed, config["seeds"], "graph")
        recorder.write_csv("spectrum.csv", self.columns("spectrum.csv"), [
            (s.seed_index, n, d, p, tau, s.lambda2, s.abs_lambda2, s.rayleigh_lower, s.isolated, s.method)
            for s in samples
        ])
        if config["raw_samples"]:
            recorder.write_npz("samples.npz", lambda2=np.array([s.lambda2 for s in samples]),
                               rayleigh_lower=np.array([s.rayleigh_lower for s in samples]))

        window = config["lambda_window"]
        inside = sum(1 for s in samples if abs(s.lambda2 - tau) <= window)
        fraction = inside / len(samples)
        recorder.check("lambda2_near_tau", fraction >= config["pass_fraction"], fraction, config["pass_fraction"],
                       note=f"{inside}/{len(samples)} seeds with |lambda2 - tau| <= {window}")
        # a test embedding can only underestimate lambda_2
        gaps = [s.lambda2 - s.rayleigh_lower for s in samples]
        recorder.check("rayleigh_below_lambda2", min(gaps) >= -1e-9, min(gaps), -1e-9)
        logger.info("Sphere spectrum: %d/%d seeds within %s of tau=%.4f", inside, len(samples), window, tau)
