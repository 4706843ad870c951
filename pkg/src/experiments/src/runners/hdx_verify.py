import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from experiments.src.pool import run_indexed
from experiments.src.runners.base import ExperimentRunner
from experiments.src.settings import ConfigError
from geo_complex.src.tools import build_two_complex, link_of, one_skeleton, sample_geo_graph
from shell_analysis.src.tools import DegenerateEtaError, base_edge_prob, classify_shells
from spectral.src.report import SpectralReport
from spectral.src.tools import TrickleDownResult, VacuousInputError, normalized_adjacency, second_abs_eigenvalue, \
    trickle_down_check
from sphere_core.src.tools import tau_of

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinkRow:
    vertex: int
    link_size: int
    raw_neighbor_count: int
    abs_lambda2: float
    lambda2: float
    method: str


@dataclass
class HdxReport:
    n: int
    d: int
    p: float
    tau: float
    q: float
    link_target: float
    links: List[LinkRow]
    empty_links: int
    connected: bool
    component_count: int
    uncovered_vertices: int
    skeleton: Optional[SpectralReport] = None
    trickle_down: Optional[TrickleDownResult] = None
    alpha: float = math.nan
    eta: float = math.nan
    points: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def link_lambda_max(self) -> float:
        return max((row.abs_lambda2 for row in self.links), default=math.nan)

    @property
    def link_lambda_min(self) -> float:
        return min((row.abs_lambda2 for row in self.links), default=math.nan)

    @property
    def delta_slack(self) -> float:
        """How far the worst link sits above tau / (1 + tau)."""
        return self.link_lambda_max - self.link_target


def dimension_for(n, eta_param):
    """d = eta * log_{4/3} n, rounded, at least 3."""
    return max(3, int(round(eta_param * math.log(n) / math.log(4.0 / 3.0))))


def link_spectra(c, g, workers=1):
    """
    Spectrum of every nonempty link, in vertex order.

    Returns the rows for links with at least two non-isolated vertices and the
    number of links that were empty after isolated vertices were dropped.
    """
    def one_link(v, rng):
        link = link_of(c, g, v)
        graph = link.graph.without_isolated()
        if graph.n < 2:
            return None
        report = second_abs_eigenvalue(normalized_adjacency(graph))
        return LinkRow(vertex=v, link_size=graph.n, raw_neighbor_count=link.raw_neighbor_count,
                       abs_lambda2=report.second_abs_eigenvalue, lambda2=report.second_eigenvalue,
                       method=report.method.value)

    results = run_indexed(one_link, g.n, "links", 0, workers)
    rows = [row for row in results if row is not None]
    empty = len(results) - len(rows)
    if empty:
        logger.warning("%d of %d links are empty and were left out of the spectra", empty, g.n)
    return rows, empty


def skeleton_spectrum(c, tol=1e-10):
    skeleton = one_skeleton(c)
    report = None
    if skeleton.graph.n >= 2:
        report = second_abs_eigenvalue(normalized_adjacency(skeleton.graph), tol=tol)
    return skeleton, report


def _shell_constants(c, g, rows):
    """alpha and eta of the median-sized link, or NaN when they are undefined there."""
    if not rows or g.d is None or g.d <= 3:
        return math.nan, math.nan
    median = sorted(rows, key=lambda r: (r.link_size, r.vertex))[len(rows) // 2]
    shells = link_of(c, g, median.vertex).shells
    try:
        classification = classify_shells(shells)
    except DegenerateEtaError as e:
        logger.warning("Shell constants undefined: %s", e)
        return math.nan, math.nan
    return classification.alpha, classification.eta


def hdx_verify(n: int, eps: float, eta_param: float, seed: int, d: Optional[int] = None,
               min_pn: float = 10.0, min_qpn: float = 1.0, tol: float = 1e-9, workers: int = 1) -> HdxReport:
    """
    Sample the geometric 2-complex with p = n^{-1+eps} and check it end to end.

    Parameters:
    - n (int): vertex count.
    - eps (float): density exponent in (0, 1).
    - eta_param (float): sets d = eta_param * log_{4/3} n unless d is given.
    - seed (int): seed of the point cloud.
    - min_pn, min_qpn: calibration floors on p*n and q*p*n, where q is the edge
      probability inside a link.
    - tol (float): additive tolerance of the trickle-down inequality.

    Returns:
    - HdxReport: link rows, skeleton spectrum, connectivity and trickle-down outcome.

    Raises:
    - ConfigError: when p*n or q*p*n is below its floor.
    """
    d = dimension_for(n, eta_param) if d is None else d
    p = n ** (-1.0 + eps)
    tau = tau_of(p, d)
    q = base_edge_prob(tau, d)
    if p * n < min_pn:
        raise ConfigError(f"n: p*n = {p * n:.3g} is below min_pn = {min_pn}")
    if q * p * n < min_qpn:
        raise ConfigError(f"n: q*p*n = {q * p * n:.3g} is below min_qpn = {min_qpn}")
    logger.info("hdx_verify: n=%d d=%d p=%.4g tau=%.4g q=%.4g", n, d, p, tau, q)

    g = sample_geo_graph(n, d, p, seed)
    c = build_two_complex(g)
    rows, empty = link_spectra(c, g, workers)
    skeleton, skeleton_report = skeleton_spectrum(c)
    report = HdxReport(
        n=n, d=d, p=p, tau=tau, q=q, link_target=tau / (1.0 + tau), links=rows, empty_links=empty,
        connected=skeleton.connected, component_count=skeleton.component_count,
        uncovered_vertices=n - skeleton.graph.n, skeleton=skeleton_report, points=g.cloud.points,
    )
    report.alpha, report.eta = _shell_constants(c, g, rows)
    if skeleton.connected and skeleton_report is not None and rows:
        try:
            report.trickle_down = trickle_down_check(skeleton_report, report.link_lambda_max, tol=tol)
        except VacuousInputError as e:
            logger.warning("Trickle-down not applicable: %s", e)
    return report


def graph_seed(recorder) -> int:
    return int(recorder.rng("graph").integers(2 ** 63))


def record_links(recorder, columns, filename, rows):
    recorder.write_csv(filename, columns, [
        tuple(getattr(row, name) for name in columns) for row in rows
    ])


class HdxVerifyExperiment(ExperimentRunner):
    def execute(self, config, recorder):
        with recorder.phase("complex"):
            report = hdx_verify(config["n"], config["eps"], config["eta_param"], graph_seed(recorder),
                                d=config["d"], min_pn=config["min_pn"], min_qpn=config["min_qpn"],
                                tol=config["tol"], workers=recorder.config.workers)
        for name in ("d", "p", "tau", "q", "alpha", "eta", "link_target", "empty_links",
                     "component_count", "uncovered_vertices", "link_lambda_max", "link_lambda_min", "delta_slack"):
            recorder.derive(name, getattr(report, name))
        if report.skeleton is not None:
            recorder.derive("skeleton", report.skeleton.to_record())
        record_links(recorder, self.columns("links.csv"), "links.csv", report.links)
        if config["raw_samples"]:
            recorder.write_npz("samples.npz", points=report.points,
                               link_abs_lambda2=np.array([row.abs_lambda2 for row in report.links]))

        slack = config["link_slack"]
        recorder.check("skeleton_connected", report.connected, report.component_count, 1)
        if report.trickle_down is not None:
            result = report.trickle_down
            recorder.derive("trickle_down_slack", result.slack)
            recorder.check("trickle_down", result.passed, result.skeleton_value, result.bound)
        elif report.connected:
            recorder.check("trickle_down", True, report.skeleton.second_abs_eigenvalue if report.skeleton else None,
                           None, note="vacuous: some link has |lambda|_2 >= 1")
        if report.links:
            recorder.check("link_upper", report.link_lambda_max <= report.link_target + slack,
                           report.link_lambda_max, report.link_target + slack)
            recorder.check("link_lower", report.link_lambda_min >= report.link_target - slack,
                           report.link_lambda_min, report.link_target - slack)
        else:
            recorder.check("links_nonempty", False, 0, 1, note="every link is empty")
