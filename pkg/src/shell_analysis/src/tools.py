import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate, sparse
from sklearn.metrics import pairwise_distances

from geo_complex.src.tools import WeightedGraph
from shell_analysis.src.config import Config
from shell_analysis.src.shells import SHELL_TOL, InvalidShellError, ShellVector
from spectral.src.report import Method, SpectralReport
from spectral.src.tools import ContractViolationError, normalized_adjacency, second_abs_eigenvalue
from sphere_core.src.tools import (
    BetaDist,
    DomainError,
    as_unit_vector,
    beta_log_tail_many,
    beta_tail,
    beta_tail_many,
    restricted_beta_sampler,
    sample_cap_many,
    sample_uniform_sphere,
    shifted_threshold,
    tau_of,
)

logger = logging.getLogger(__name__)


class DegenerateEtaError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ShellMatrices:
    """
    Expected link adjacency given the shells, and its random-walk normalization.

    Q[i, j] = Pr[edge ij | kappa] with zero diagonal, degrees = row sums of Q,
    Qbar = D^{-1} Q and pi = degrees / sum(degrees).
    """
    shells: ShellVector
    Q: np.ndarray
    degrees: np.ndarray
    Qbar: np.ndarray
    pi: np.ndarray

    @property
    def m(self) -> int:
        return self.shells.m

    @property
    def D_kappa(self) -> np.ndarray:
        return np.diag(self.degrees)


@dataclass(frozen=True, eq=False)
class ShellClassification:
    typical: np.ndarray
    alpha: float
    eta: float
    gamma: float

    @property
    def typical_indices(self) -> np.ndarray:
        return np.flatnonzero(self.typical)

    @property
    def outlier_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.typical)


@dataclass(frozen=True)
class RowSimilarityReport:
    max_row_l1: float
    max_row_l1_typical_columns: float
    max_squared_row_l1: float
    outlier_mass_max: float
    row_threshold: float
    outlier_threshold: float
    row_ok: bool
    outlier_ok: bool


@dataclass(frozen=True)
class SquaredChainReport:
    lambda_deflated: float
    lambda_squared_chain: float
    max_squared_row_l1: float
    consistent: bool
    chain_holds: bool


@dataclass(frozen=True)
class OutlierRatio:
    ratio: float
    log_ratio: float


@dataclass(frozen=True)
class RatioClaims:
    h_ratio_deviation: float
    ab_ratio_deviation: float
    bound: float
    passed: bool


@dataclass(frozen=True)
class DegreeConcentration:
    max_ratio: float
    zero_degree: bool
    bound: float
    passed: bool
    predicted_failure: float


@dataclass(frozen=True)
class DegreeFrequency:
    resamples: int
    failures: int
    zero_degree: int
    failure_rate: float
    predicted_failure: float
    allowed: float
    passed: bool
    vacuous: bool
    worst_finite_ratio: float


@dataclass(frozen=True, eq=False)
class LinkSample:
    center: np.ndarray
    points: np.ndarray
    shells: ShellVector
    graph: WeightedGraph


@dataclass
class ShellInstanceReport:
    d: int
    m: int
    tau: float
    gamma: float
    alpha: float
    eta: float
    n_typical: int
    n_outlier: int
    lambda_max_deflated: float
    max_row_l1: float
    outlier_mass_max: float
    slack_ratios: Dict[str, float] = field(default_factory=dict)

    def to_record(self) -> dict:
        return asdict(self)


def _edge_probabilities(x, y, tau, d):
    t = np.clip(shifted_threshold(x, y, tau), -1.0, 1.0)
    return beta_tail_many(d - 1, t)


def conditional_edge_prob(kappa_i: float, kappa_j: float, tau: float, d: int) -> float:
    """Pr[<v_i, v_j> >= tau | <v_i, w> = kappa_i, <v_j, w> = kappa_j] = Pr[Beta_{d-1} >= T(kappa_i, kappa_j)]."""
    t = shifted_threshold(kappa_i, kappa_j, tau)
    return beta_tail(BetaDist(d - 1), min(1.0, max(-1.0, t)))


def base_edge_prob(tau: float, d: int) -> float:
    """q = Pr[Beta_{d-1} >= tau / (1 + tau)], the edge probability of two shells sitting at tau."""
    return beta_tail(BetaDist(d - 1), tau / (1.0 + tau))


def sample_shells(m: int, tau: float, d: int, rng: np.random.Generator) -> ShellVector:
    if m < 2:
        raise DomainError("need at least two shells")
    kappas = restricted_beta_sampler(d, float(tau)).sample(m, rng)
    return ShellVector(kappas=kappas, tau=tau, d=d)


def build_shell_matrices(kappa: ShellVector) -> ShellMatrices:
    m, d, tau = kappa.m, kappa.d, kappa.tau
    if m < 2:
        raise DomainError("need at least two shells")
    k = kappa.kappas
    rows, cols = np.triu_indices(m, k=1)
    Q = np.zeros((m, m))
    Q[rows, cols] = _edge_probabilities(k[rows], k[cols], tau, d)
    Q += Q.T
    degrees = Q.sum(axis=1)
    if np.any(degrees <= 0.0):
        raise ContractViolationError(f"shell {int(np.flatnonzero(degrees <= 0.0)[0])} has zero expected degree")
    Qbar = Q / degrees[:, None]
    logger.debug("Built shell matrices: m=%d d=%d tau=%s min degree %.4g", m, d, tau, degrees.min())
    return ShellMatrices(shells=kappa, Q=Q, degrees=degrees, Qbar=Qbar, pi=degrees / degrees.sum())


def check_shell_matrices(mats: ShellMatrices) -> List[str]:
    """Names of violated ShellMatrices invariants."""
    violated = []
    if not np.allclose(mats.Q, mats.Q.T, rtol=0.0, atol=1e-15) or mats.Q.min() < 0.0 or mats.Q.max() > 1.0:
        violated.append("Q_symmetric_probabilities")
    if np.abs(mats.Qbar.sum(axis=1) - 1.0).max() > Config.ROW_STOCHASTIC_TOL:
        violated.append("Qbar_row_stochastic")
    flow = mats.pi[:, None] * mats.Qbar
    if np.abs(flow - flow.T).max() > Config.BALANCE_TOL:
        violated.append("detailed_balance")
    q = base_edge_prob(mats.shells.tau, mats.shells.d)
    if mats.degrees.min() < (mats.m - 1) * q * (1.0 - 1e-9):
        violated.append("degree_lower_bound")
    return violated


def classify_shells(kappa: ShellVector, gamma: float = Config.DEFAULT_GAMMA) -> ShellClassification:
    """
    Typical shells lie in [tau, tau(1 + alpha)].

    eta = tau_of(m^{-2 gamma - 1} Pr[X >= tau], d) and
    alpha = 36 log d / (tau^2 (d - 3)(1 - eta)).
    """
    d, m, tau = kappa.d, kappa.m, kappa.tau
    if d <= 3:
        raise DomainError("classification needs d > 3")
    p = beta_tail(BetaDist(d), tau)
    eta = tau_of(m ** (-2.0 * gamma - 1.0) * p, d)
    if eta >= 1.0 - Config.ETA_TOL:
        raise DegenerateEtaError(f"eta={eta!r} is numerically 1 at d={d}, m={m}")
    alpha = Config.ALPHA_CONSTANT * math.log(d) / (tau * tau * (d - 3) * (1.0 - eta))
    typical = kappa.kappas <= tau * (1.0 + alpha)
    logger.debug("Classified %d shells: alpha=%.4g eta=%.4g, %d outliers", m, alpha, eta, int((~typical).sum()))
    return ShellClassification(typical=typical, alpha=alpha, eta=eta, gamma=gamma)


def _symmetric_operator(mats: ShellMatrices):
    return normalized_adjacency(sparse.csr_matrix(mats.Q))


def shell_spectral_check(mats: ShellMatrices) -> SpectralReport:
    """
    |lambda|_max(Qbar - 1 pi^T).

    Qbar - 1 pi^T is similar to D^{-1/2} Q D^{-1/2} with its top eigenpair removed,
    so the normalized adjacency of Q carries the same nontrivial spectrum.
    """
    op = _symmetric_operator(mats)
    method = Method.DENSE if mats.m <= Config.DENSE_MAX_M else Method.ITERATIVE
    return second_abs_eigenvalue(op, method=method)


def _max_pair_l1(rows):
    if rows.shape[0] < 2:
        return 0.0
    return float(pairwise_distances(rows, metric="manhattan").max())


def row_similarity_check(mats: ShellMatrices, classification: ShellClassification,
                         slack: float = Config.ROW_SLACK,
                         outlier_slack: float = Config.OUTLIER_MASS_SLACK) -> RowSimilarityReport:
    typical = classification.typical_indices
    if typical.shape[0] < 2:
        raise ContractViolationError("row similarity needs at least two typical shells")
    d = mats.shells.d
    rows = mats.Qbar[typical]
    squared = (mats.Qbar @ mats.Qbar)[typical]
    outliers = classification.outlier_indices
    below_eta = mats.shells.kappas <= classification.eta
    if outliers.size and below_eta.any():
        outlier_mass = float(mats.Qbar[np.ix_(below_eta, outliers)].sum(axis=1).max())
    else:
        outlier_mass = 0.0

    max_row = _max_pair_l1(rows)
    row_threshold = slack * math.log(d) ** 2 / d
    outlier_threshold = outlier_slack / d
    return RowSimilarityReport(
        max_row_l1=max_row,
        max_row_l1_typical_columns=_max_pair_l1(rows[:, typical]),
        max_squared_row_l1=_max_pair_l1(squared),
        outlier_mass_max=outlier_mass,
        row_threshold=row_threshold,
        outlier_threshold=outlier_threshold,
        row_ok=max_row <= row_threshold,
        outlier_ok=outlier_mass <= outlier_threshold,
    )


def squared_chain_check(mats: ShellMatrices) -> SquaredChainReport:
    """
    Checks |lambda|_max(Qbar^2 - 1 pi^T) <= max_{i,j} |(Qbar^2)_i - (Qbar^2)_j|_1 and
    |lambda|_max(Qbar - 1 pi^T)^2 = |lambda|_max((Qbar - 1 pi^T)^2) on the symmetrized form.
    """
    op = _symmetric_operator(mats)
    deflated = op.matrix.toarray() - np.outer(op.top_vector, op.top_vector)
    values = np.linalg.eigvalsh(deflated)
    lam = float(np.abs(values).max())
    lam_sq = float(np.abs(np.linalg.eigvalsh(deflated @ deflated)).max())
    max_l1 = _max_pair_l1(mats.Qbar @ mats.Qbar)
    return SquaredChainReport(
        lambda_deflated=lam,
        lambda_squared_chain=lam_sq,
        max_squared_row_l1=max_l1,
        consistent=abs(lam * lam - lam_sq) <= Config.CONSISTENCY_TOL,
        chain_holds=lam_sq <= max_l1 + Config.CONSISTENCY_TOL,
    )


def outlier_ratio_quadrature(x: float, tau: float, d: int, alpha: float) -> OutlierRatio:
    """
    Share of the conditional edge mass of shell x that falls on outlier shells:

        N(x) / D(x) = int_{tau(1+alpha)}^1 w(y) dy / int_tau^1 w(y) dy,
        w(y) = (1 - y^2)^{(d-3)/2} Pr[Beta_{d-1} >= T(x, y)].

    Both integrals are taken after dividing w by its maximum on a grid, and the
    log-ratio is always returned.
    """
    if d <= 3:
        raise DomainError("the outlier ratio needs d > 3")
    lower = tau * (1.0 + alpha)
    if lower >= 1.0:
        return OutlierRatio(ratio=0.0, log_ratio=-math.inf)

    def log_weight(y):
        y = np.asarray(y, dtype=float)
        out = np.full(y.shape, -np.inf)
        inside = y < 1.0
        t = np.clip(shifted_threshold(x, y[inside], tau), -1.0, 1.0)
        out[inside] = 0.5 * (d - 3) * np.log1p(-y[inside] ** 2) + beta_log_tail_many(d - 1, t)
        return out

    grid = np.linspace(tau, 1.0, Config.PEAK_GRID)[:-1]
    values = log_weight(grid)
    shift = float(values.max())
    peak = float(grid[int(np.argmax(values))])

    def integrand(y):
        return float(np.exp(log_weight(np.array([y]))[0] - shift))

    def integral(a):
        points = [peak] if a < peak < 1.0 else None
        value, _ = integrate.quad(integrand, a, 1.0, points=points,
                                  epsrel=Config.QUAD_EPSREL, limit=Config.QUAD_LIMIT)
        return value

    numerator = integral(lower)
    denominator = integral(tau)
    if numerator <= 0.0:
        return OutlierRatio(ratio=0.0, log_ratio=-math.inf)
    log_ratio = math.log(numerator) - math.log(denominator)
    return OutlierRatio(ratio=math.exp(log_ratio), log_ratio=log_ratio)


def default_alpha(tau: float, d: int) -> float:
    """alpha with eta = 0, the smallest value the typicality window takes."""
    return Config.ALPHA_CONSTANT * math.log(d) / (tau * tau * (d - 3))


def ratio_claims_check(kappa_i: float, kappa_j: float, kappa_l: float, tau: float, d: int,
                       alpha: Optional[float] = None, slack: float = Config.RATIO_CLAIM_SLACK) -> RatioClaims:
    """
    Deviations from 1 of

        T(kj, kl) T(ki, tau) / (T(ki, kl) T(kj, tau))   and   A / B,
        A = (1 - T(ki, kl)^2)(1 - T(kj, tau)^2),  B = (1 - T(kj, kl)^2)(1 - T(ki, tau)^2),

    both compared with slack * alpha^2.
    """
    alpha = default_alpha(tau, d) if alpha is None else alpha

    def T(a, b):
        return shifted_threshold(a, b, tau)

    h = T(kappa_j, kappa_l) * T(kappa_i, tau) / (T(kappa_i, kappa_l) * T(kappa_j, tau))
    a = (1.0 - T(kappa_i, kappa_l) ** 2) * (1.0 - T(kappa_j, tau) ** 2)
    b = (1.0 - T(kappa_j, kappa_l) ** 2) * (1.0 - T(kappa_i, tau) ** 2)
    h_dev = abs(h - 1.0)
    ab_dev = abs(a / b - 1.0)
    bound = slack * alpha * alpha
    return RatioClaims(h_ratio_deviation=h_dev, ab_ratio_deviation=ab_dev, bound=bound,
                       passed=h_dev <= bound and ab_dev <= bound)


def _link_degrees(link_graph) -> np.ndarray:
    weights = getattr(link_graph, "weights", None)
    if weights is None:
        weights = getattr(link_graph, "adjacency", link_graph)
    if sparse.issparse(weights):
        return np.asarray(weights.sum(axis=1)).ravel().astype(float)
    return np.asarray(weights, dtype=float).sum(axis=1)


def degree_concentration_check(link_graph, mats: ShellMatrices,
                               alpha: float = Config.DEFAULT_DEGREE_ALPHA) -> DegreeConcentration:
    """
    max_i D_kappa[i, i] / deg(i) against 1 / (1 - alpha), with the Bernstein failure
    probability m exp(-alpha^2 q (m - 1) / 4). A zero-degree vertex gives ratio inf.
    """
    degrees = _link_degrees(link_graph)
    if degrees.shape[0] != mats.m:
        raise ContractViolationError("link graph and shells must have the same vertices")
    with np.errstate(divide="ignore"):
        ratios = np.where(degrees > 0.0, mats.degrees / np.where(degrees > 0.0, degrees, 1.0), np.inf)
    max_ratio = float(ratios.max())
    q = base_edge_prob(mats.shells.tau, mats.shells.d)
    bound = 1.0 / (1.0 - alpha)
    return DegreeConcentration(
        max_ratio=max_ratio,
        zero_degree=bool(np.any(degrees <= 0.0)),
        bound=bound,
        passed=max_ratio <= bound,
        predicted_failure=min(1.0, mats.m * math.exp(-alpha * alpha * q * (mats.m - 1) / 4.0)),
    )


def degree_concentration_frequency(reports: Sequence[DegreeConcentration],
                                   tolerance: float = 0.05) -> DegreeFrequency:
    """
    Failure rate of per-link degree checks over independent resamples.

    The rate may not exceed the Bernstein prediction or `tolerance`, whichever is larger.
    A prediction of 1 makes the check vacuous; it passes and says so.
    """
    if not reports:
        raise ContractViolationError("need at least one degree report")
    failures = sum(not r.passed for r in reports)
    rate = failures / len(reports)
    predicted = max(r.predicted_failure for r in reports)
    allowed = max(predicted, tolerance)
    finite = [r.max_ratio for r in reports if math.isfinite(r.max_ratio)]
    return DegreeFrequency(
        resamples=len(reports),
        failures=failures,
        zero_degree=sum(r.zero_degree for r in reports),
        failure_rate=rate,
        predicted_failure=predicted,
        allowed=allowed,
        passed=rate <= allowed,
        vacuous=predicted >= 1.0,
        worst_finite_ratio=max(finite, default=math.nan),
    )


def sample_link_from_cap(m: int, tau: float, d: int, rng: np.random.Generator,
                         center: Optional[np.ndarray] = None) -> LinkSample:
    """m points uniform in cap(tau) around `center` joined whenever <v_i, v_j> >= tau."""
    if m < 2:
        raise DomainError("need at least two link vertices")
    w = sample_uniform_sphere(d, rng) if center is None else as_unit_vector(center)
    points = sample_cap_many(np.tile(w, (m, 1)), tau, rng)
    kappas = points @ w
    if kappas.min() < tau - SHELL_TOL:
        raise InvalidShellError("cap sample fell below tau")
    adjacency = points @ points.T >= tau
    np.fill_diagonal(adjacency, False)
    graph = WeightedGraph(labels=np.arange(m), weights=sparse.csr_matrix(adjacency, dtype=float))
    return LinkSample(center=w, points=points, shells=ShellVector(kappas=kappas, tau=tau, d=d), graph=graph)


def link_spectrum(sample) -> SpectralReport:
    """|lambda|_2 of a link's normalized adjacency after isolated vertices are dropped."""
    graph = getattr(sample, "graph", sample).without_isolated()
    if graph.n < 2:
        raise ContractViolationError("link has fewer than two non-isolated vertices")
    return second_abs_eigenvalue(normalized_adjacency(graph))


def shell_instance_report(kappa: ShellVector, gamma: float = Config.DEFAULT_GAMMA) -> ShellInstanceReport:
    classification = classify_shells(kappa, gamma)
    mats = build_shell_matrices(kappa)
    spectral = shell_spectral_check(mats)
    d = kappa.d
    spectral_reference = Config.SPECTRAL_SLACK * math.sqrt(math.log(d) ** 2 / d)
    slack_ratios = {"spectral": spectral.second_abs_eigenvalue / spectral_reference}
    max_row, outlier_mass = math.nan, math.nan
    if classification.typical_indices.shape[0] >= 2:
        rows = row_similarity_check(mats, classification)
        max_row, outlier_mass = rows.max_row_l1, rows.outlier_mass_max
        slack_ratios["row_l1"] = max_row / rows.row_threshold
        slack_ratios["outlier_mass"] = outlier_mass / rows.outlier_threshold
    report = ShellInstanceReport(
        d=d,
        m=kappa.m,
        tau=kappa.tau,
        gamma=gamma,
        alpha=classification.alpha,
        eta=classification.eta,
        n_typical=int(classification.typical.sum()),
        n_outlier=int((~classification.typical).sum()),
        lambda_max_deflated=spectral.second_abs_eigenvalue,
        max_row_l1=max_row,
        outlier_mass_max=outlier_mass,
        slack_ratios=slack_ratios,
    )
    logger.info("Shell instance d=%d m=%d: lambda=%.4g max_row=%.4g", d, kappa.m,
                report.lambda_max_deflated, max_row)
    return report
