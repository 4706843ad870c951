import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from experiments.src.runners.base import ExperimentRunner
from experiments.src.runners.hdx_verify import LinkRow, link_spectra, record_links, skeleton_spectrum
from experiments.src.settings import ConfigError
from geo_complex.src.tools import build_two_complex, sample_geo_graph
from shell_analysis.src.tools import base_edge_prob
from spectral.src.report import SpectralReport
from spectral.src.tools import rayleigh_lower_bound
from sphere_core.src.tools import BetaDist, beta_tail
from utils.seeding import split_seed

logger = logging.getLogger(__name__)

MIN_LAMBDA = 0.05


@dataclass
class TightnessReport:
    lambda_target: float
    tau: float
    p: float
    q: float
    d: int
    n: int
    attempts_used: int
    connected: bool
    skeleton: Optional[SpectralReport] = None
    rayleigh_lower: float = math.nan
    stationary_tv: float = math.nan
    links: List[LinkRow] = field(default_factory=list)
    empty_links: int = 0

    @property
    def link_lambda_max(self) -> float:
        return max((row.abs_lambda2 for row in self.links), default=math.nan)

    @property
    def skeleton_lambda2(self) -> float:
        return self.skeleton.second_eigenvalue if self.skeleton is not None else math.nan


def stationary_tv(c, n) -> float:
    """TV between the triangle-weighted stationary law and the uniform law on all n vertices."""
    weights = c.vertex_weight_values.astype(float)
    total = weights.sum()
    if total <= 0.0:
        return 1.0
    return float(0.5 * np.abs(weights / total - 1.0 / n).sum())


def tightness_experiment(lambda_target: float, seed: int, n: int = 3000, d: int = 10, attempts: int = 3,
                         workers: int = 1) -> TightnessReport:
    """
    Complex at tau = lambda / (1 - lambda), whose links sit near lambda while the
    1-skeleton keeps lambda_2 near tau.

    A disconnected 1-skeleton is resampled with a fresh child seed, up to `attempts` times.
    Raises ConfigError for lambda_target outside [0.05, 0.5).
    """
    if not MIN_LAMBDA <= lambda_target < 0.5:
        raise ConfigError(f"lambda_target: {lambda_target!r} outside [{MIN_LAMBDA}, 0.5)")
    tau = lambda_target / (1.0 - lambda_target)
    p = beta_tail(BetaDist(d), tau)
    report = TightnessReport(lambda_target=lambda_target, tau=tau, p=p, q=base_edge_prob(tau, d), d=d, n=n,
                             attempts_used=0, connected=False)
    for attempt in range(attempts):
        report.attempts_used = attempt + 1
        g = sample_geo_graph(n, d, p, split_seed(seed, "tightness", attempt))
        c = build_two_complex(g)
        skeleton, skeleton_report = skeleton_spectrum(c)
        if not skeleton.connected:
            logger.warning("Attempt %d: 1-skeleton has %d components; resampling", attempt + 1,
                           skeleton.component_count)
            continue
        report.connected = True
        report.skeleton = skeleton_report
        report.rayleigh_lower = rayleigh_lower_bound(skeleton.graph, points=g.cloud.points[skeleton.graph.labels])
        report.stationary_tv = stationary_tv(c, n)
        report.links, report.empty_links = link_spectra(c, g, workers)
        break
    logger.info("Tightness lambda=%.4g: skeleton lambda_2=%.4g (lower %.4g), max link %.4g",
                lambda_target, report.skeleton_lambda2, report.rayleigh_lower, report.link_lambda_max)
    return report


class TightnessExperiment(ExperimentRunner):
    def execute(self, config, recorder):
        with recorder.phase("complex"):
            report = tightness_experiment(config["lambda_target"], recorder.config.master_seed, n=config["n"],
                                          d=config["d"], attempts=config["attempts"],
                                          workers=recorder.config.workers)
        for name in ("tau", "p", "q", "attempts_used", "empty_links", "rayleigh_lower", "stationary_tv",
                     "link_lambda_max", "skeleton_lambda2"):
            recorder.derive(name, getattr(report, name))
        record_links(recorder, self.columns("tightness_links.csv"), "tightness_links.csv", report.links)
        if config["raw_samples"]:
            recorder.write_npz("samples.npz", link_abs_lambda2=np.array([row.abs_lambda2 for row in report.links]))

        recorder.check("skeleton_connected", report.connected, report.attempts_used, config["attempts"])
        if not report.connected:
            return
        floor = report.tau - config["skeleton_slack"]
        recorder.check("skeleton_lambda2", report.skeleton_lambda2 >= floor, report.skeleton_lambda2, floor)
        recorder.check("rayleigh_consistent", report.rayleigh_lower <= report.skeleton_lambda2 + 1e-9,
                       report.rayleigh_lower, report.skeleton_lambda2)
        ceiling = report.tau / (1.0 + report.tau) + config["link_slack"]
        recorder.check("link_upper", report.link_lambda_max <= ceiling, report.link_lambda_max, ceiling)
        recorder.check("stationary_tv", report.stationary_tv <= config["tv_threshold"], report.stationary_tv,
                       config["tv_threshold"])
