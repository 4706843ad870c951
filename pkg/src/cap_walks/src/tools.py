import csv
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy import stats

from cap_walks.src.config import Config
from sphere_core.src.tools import (
    DomainError,
    as_unit_vector,
    beta_cdf_many,
    beta_tail_many,
    combo_threshold,
    sample_cap_many,
    tau_of,
)

logger = logging.getLogger(__name__)


class StabilityError(ValueError):
    pass


class EmptySampleError(ValueError):
    pass


class InvalidBinningError(ValueError):
    pass


class InsufficientSignalError(RuntimeError):
    pass


class NotSphericallyMonotoneError(ValueError):
    pass


class InvalidDensityError(ValueError):
    pass


class InsufficientSamplesError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Projected1DMeasure:
    """Histogram of <x, axis> over a sample, normalized to total mass 1."""
    axis: np.ndarray
    weights: np.ndarray
    edges: np.ndarray
    d: int
    sample_count: int

    @property
    def bin_count(self) -> int:
        return int(self.weights.shape[0])


@dataclass(frozen=True, eq=False)
class BMPath:
    start: np.ndarray
    times: np.ndarray
    positions: np.ndarray
    step_size: float


@dataclass(frozen=True)
class TailRow:
    x: float
    empirical: float
    bound: float
    mc_error: float
    ok: bool


@dataclass(frozen=True)
class ConcentrationReport:
    passed: bool
    rows: List[TailRow]
    mean: float
    expected_mean: float
    mean_ci: float
    mean_within_ci: bool
    trials: int


@dataclass(frozen=True)
class TVRow:
    k: int
    tv_estimate: float
    noise_floor: float
    trials: int


@dataclass(frozen=True)
class DecayFit:
    slope: float
    rate: float
    noise_floor: float
    rows: List[TVRow]
    usable_steps: List[int]
    ratios: List[float]
    references: List[float] = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Piecewise-constant density l(<x, x0>) on [-1, 1]; value j holds on [breakpoints[j], breakpoints[j+1])."""
    breakpoints: np.ndarray
    values: np.ndarray
    d: int

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if b.ndim != 1 or v.shape != (b.shape[0] - 1,) or v.shape[0] < 1:
            raise InvalidDensityError("need m + 1 breakpoints for m values")
        if b[0] != -1.0 or b[-1] != 1.0 or np.any(np.diff(b) <= 0.0):
            raise InvalidDensityError("breakpoints must increase strictly from -1 to 1")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    def masses(self) -> np.ndarray:
        tails = beta_tail_many(self.d, self.breakpoints)
        return tails[:-1] - tails[1:]

    def integral(self) -> float:
        return float(self.values @ self.masses())

    def __call__(self, x):
        idx = np.clip(np.searchsorted(self.breakpoints, x, side="right") - 1, 0, self.values.shape[0] - 1)
        return self.values[idx]


@dataclass(frozen=True, eq=False)
class CapMeasure:
    """Mixture sum_j masses[j] * cap(thresholds[j]) of caps around a common center."""
    thresholds: np.ndarray
    masses: np.ndarray
    d: int


@dataclass(frozen=True)
class DominanceResult:
    holds: bool
    max_violation: float
    tolerance: float


def _start(x0):
    x0 = as_unit_vector(x0)
    if x0.shape[0] < 2:
        raise DomainError("walks need d >= 2")
    return x0


def cap_walk(x0, p, k, rng):
    """k steps of the cap walk: each step moves to a uniform point of the p-cap around the current one."""
    return cap_walk_many(x0, p, k, 1, rng)[0]


def cap_walk_many(x0, p, k, trials, rng):
    if not 0.0 < p <= 1.0:
        raise DomainError(f"p={p!r} outside (0, 1]")
    if k < 0 or trials < 1:
        raise DomainError("need k >= 0 and trials >= 1")
    x0 = _start(x0)
    positions = np.tile(x0, (trials, 1))
    tau = tau_of(p, x0.shape[0])
    for _ in range(k):
        positions = sample_cap_many(positions, tau, rng)
    return positions


def _bm_grid(d, t, dt):
    if t < 0.0:
        raise DomainError("t must be nonnegative")
    if dt is None:
        dt = Config.BM_DT_FACTOR / (d - 1)
    if dt <= 0.0:
        raise DomainError("dt must be positive")
    if 0.0 < t < dt:
        logger.debug("dt=%s exceeds t=%s; taking a single step of size t", dt, t)
        dt = t
    if dt * (d - 1) > Config.STABILITY_LIMIT:
        raise StabilityError(f"dt*(d-1)={dt * (d - 1):.3g} exceeds {Config.STABILITY_LIMIT}")
    steps = max(1, int(math.ceil(t / dt - 1e-12))) if t > 0.0 else 0
    return steps, (t / steps if steps else float(dt))


def _bm_step(positions, h, rng):
    d = positions.shape[1]
    noise = rng.standard_normal(positions.shape) * math.sqrt(h)
    tangent = noise - positions * np.sum(positions * noise, axis=1)[:, None]
    positions = positions * (1.0 - (d - 1) * h) + math.sqrt(2.0) * tangent
    return positions / np.linalg.norm(positions, axis=1)[:, None]


def brownian_sphere(x0, t, dt, rng) -> BMPath:
    """
    Euler-Maruyama path of Brownian motion on S^{d-1} with generator the Laplace-Beltrami operator.

    Each step projects Gaussian noise onto the tangent space, adds the -(d-1)V drift and
    renormalizes. The grid is uniform with step t / ceil(t / dt) <= dt.
    """
    x0 = _start(x0)
    d = x0.shape[0]
    steps, h = _bm_grid(d, t, dt)
    positions = np.empty((steps + 1, d))
    positions[0] = x0
    current = x0[None, :]
    for i in range(steps):
        current = _bm_step(current, h, rng)
        positions[i + 1] = current[0]
    return BMPath(start=x0, times=np.arange(steps + 1) * h, positions=positions, step_size=h)


def brownian_endpoints(x0, t, dt, trials, rng) -> np.ndarray:
    x0 = _start(x0)
    d = x0.shape[0]
    steps, h = _bm_grid(d, t, dt)
    out = np.empty((trials, d))
    for start in range(0, trials, Config.BATCH_SIZE):
        block = np.tile(x0, (min(Config.BATCH_SIZE, trials - start), 1))
        for _ in range(steps):
            block = _bm_step(block, h, rng)
        out[start:start + block.shape[0]] = block
    return out


def _tail_rows(deviations, bound_of, grid, trials):
    rows = []
    for x in grid:
        empirical = float(np.mean(deviations >= x))
        bound = float(bound_of(x))
        q = min(bound, 1.0)
        mc_error = Config.MC_SIGMAS * math.sqrt(max(q * (1.0 - q), 1.0 / trials) / trials)
        rows.append(TailRow(x=float(x), empirical=empirical, bound=bound, mc_error=mc_error,
                            ok=empirical <= bound + mc_error))
    return rows


def bm_concentration_check(d, t, trials, rng, dt=None, grid: Optional[Sequence[float]] = None) -> ConcentrationReport:
    """
    Compare <V_0, V_t> against its mean e^{-(d-1)t} and the Gaussian-type tail
    2 exp(-((d-1)/2) x^2 / (1 - e^{-2(d-1)t})).
    """
    x0 = np.zeros(d)
    x0[0] = 1.0
    grid = Config.DEFAULT_TAIL_GRID if grid is None else grid
    heights = brownian_endpoints(x0, t, dt, trials, rng)[:, 0]
    c = d - 1
    expected = math.exp(-c * t)
    spread = -math.expm1(-2.0 * c * t)
    deviations = np.abs(heights - expected)

    def bound_of(x):
        if spread == 0.0:
            return 0.0
        return 2.0 * math.exp(-0.5 * c * x * x / spread)

    rows = _tail_rows(deviations, bound_of, grid, trials)
    mean = float(heights.mean())
    mean_ci = Config.MC_SIGMAS * math.sqrt(max(spread, 0.0) / (c * trials))
    report = ConcentrationReport(
        passed=all(row.ok for row in rows),
        rows=rows,
        mean=mean,
        expected_mean=expected,
        mean_ci=mean_ci,
        mean_within_ci=abs(mean - expected) <= mean_ci + 1e-12,
        trials=trials,
    )
    logger.info("BM concentration d=%d t=%s: mean=%.5f expected=%.5f passed=%s",
                d, t, mean, expected, report.passed)
    return report


def martingale_tail_check(d, t, trials, rng, dt=None, grid: Optional[Sequence[float]] = None) -> ConcentrationReport:
    """
    Tails of the martingale X_t = e^{(d-1)t} <V_0, V_t> - 1 against 2 exp(-x^2 / (4 I_t)),
    where I_t = (e^{2(d-1)t} - 1) / (2(d-1)) integrates the squared diffusion coefficient bound.
    """
    x0 = np.zeros(d)
    x0[0] = 1.0
    c = d - 1
    variance_bound = math.expm1(2.0 * c * t) / (2.0 * c)
    scale = math.sqrt(variance_bound) if variance_bound > 0.0 else 1.0
    grid = [g * 4.0 * scale for g in Config.DEFAULT_TAIL_GRID] if grid is None else grid
    heights = brownian_endpoints(x0, t, dt, trials, rng)[:, 0]
    values = math.exp(c * t) * heights - 1.0

    def bound_of(x):
        if variance_bound == 0.0:
            return 0.0
        return 2.0 * math.exp(-x * x / (4.0 * variance_bound))

    rows = _tail_rows(np.abs(values), bound_of, grid, trials)
    mean = float(values.mean())
    mean_ci = Config.MC_SIGMAS * math.sqrt(2.0 * variance_bound / trials)
    return ConcentrationReport(
        passed=all(row.ok for row in rows),
        rows=rows,
        mean=mean,
        expected_mean=0.0,
        mean_ci=mean_ci,
        mean_within_ci=abs(mean) <= mean_ci + 1e-12,
        trials=trials,
    )


def quantile_edges(d, bins=Config.DEFAULT_BINS) -> np.ndarray:
    """Bin edges with equal Beta_d mass per bin."""
    if bins < Config.MIN_BINS:
        raise InvalidBinningError(f"need at least {Config.MIN_BINS} bins, got {bins}")
    inner = [tau_of(1.0 - j / bins, d) for j in range(1, bins)]
    return np.array([-1.0] + inner + [1.0])


def _edges(bins, edges):
    if edges is None:
        if bins < Config.MIN_BINS:
            raise InvalidBinningError(f"need at least {Config.MIN_BINS} bins, got {bins}")
        return np.linspace(-1.0, 1.0, bins + 1)
    edges = np.asarray(edges, dtype=float)
    if edges.shape[0] - 1 < Config.MIN_BINS or edges[0] != -1.0 or edges[-1] != 1.0 or np.any(np.diff(edges) <= 0):
        raise InvalidBinningError("edges must increase strictly from -1 to 1 with enough bins")
    return edges


def project_1d(samples, axis, bins=Config.DEFAULT_BINS, edges=None) -> Projected1DMeasure:
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[0] == 0 or samples.size == 0:
        raise EmptySampleError("no samples to project")
    axis = as_unit_vector(axis)
    edges = _edges(bins, edges)
    values = np.clip(samples @ axis, -1.0, 1.0)
    counts, _ = np.histogram(values, bins=edges)
    return Projected1DMeasure(axis=axis, weights=counts / samples.shape[0], edges=edges,
                              d=int(axis.shape[0]), sample_count=int(samples.shape[0]))


def reference_masses(d, edges) -> np.ndarray:
    tails = beta_tail_many(d, np.asarray(edges, dtype=float))
    return tails[:-1] - tails[1:]


def tv_to_uniform(measure: Projected1DMeasure) -> float:
    """Total variation between the binned measure and the binned Beta_d law of <U, axis>."""
    reference = reference_masses(measure.d, measure.edges)
    return float(0.5 * np.abs(measure.weights - reference).sum())


def tv_noise_floor(d, edges, sample_count, rng, repeats=1) -> float:
    """Mean binned TV between two independent uniform samples of the given size."""
    edges = _edges(len(edges) - 1, edges)
    a = 0.5 * (d - 1)
    floors = []
    for _ in range(repeats):
        first = 2.0 * rng.beta(a, a, size=sample_count) - 1.0
        second = 2.0 * rng.beta(a, a, size=sample_count) - 1.0
        h1, _ = np.histogram(first, bins=edges)
        h2, _ = np.histogram(second, bins=edges)
        floors.append(0.5 * np.abs(h1 - h2).sum() / sample_count)
    return float(np.mean(floors))


def decay_reference(k, tau, p, d, slack=None) -> float:
    """Predicted TV after k cap-walk steps: ((1 + o(1)) tau)^{k-1} sqrt(log(1/p) / 2), capped at 1."""
    if k < 1:
        return 1.0
    nu = combo_threshold(tau, d) if slack is None else combo_threshold(tau, d, slack)
    inner = 1.0 - 2.0 * math.exp(-nu * math.sqrt(d - 1))
    if nu <= 0.0 or inner <= 0.0:
        return 1.0
    factor = (1.0 + 4.0 / ((d - 1) ** 0.25 * math.sqrt(nu))) / math.sqrt(inner)
    value = (factor * abs(tau)) ** (k - 1) * math.sqrt(0.5 * math.log(1.0 / p))
    return min(1.0, value)


def tv_profile(x0, p, k_max, trials, rng, edges) -> List[float]:
    """TV to uniform of the k-step cap walk for k = 0..k_max, sharing walkers across k."""
    x0 = _start(x0)
    tau = tau_of(p, x0.shape[0])
    positions = np.tile(x0, (trials, 1))
    profile = []
    for k in range(k_max + 1):
        if k:
            positions = sample_cap_many(positions, tau, rng)
        profile.append(tv_to_uniform(project_1d(positions, x0, edges=edges)))
    return profile


def fit_decay_rate(x0, p, k_max, trials, rng, bins=Config.DEFAULT_BINS, edges=None) -> DecayFit:
    """
    Fit log TV_k ~ slope * k over the leading run of steps whose estimate clears the noise floor.

    Raises InsufficientSignalError when no step k >= 1 clears it. With a single usable
    step the slope is NaN.
    """
    if k_max < 2:
        raise DomainError("k_max must be >= 2")
    x0 = _start(x0)
    d = x0.shape[0]
    edges = quantile_edges(d, bins) if edges is None else _edges(bins, edges)
    profile = tv_profile(x0, p, k_max, trials, rng, edges)
    floor = tv_noise_floor(d, edges, trials, rng)
    rows = [TVRow(k=k, tv_estimate=tv, noise_floor=floor, trials=trials) for k, tv in enumerate(profile)]

    usable = []
    for row in rows[1:]:
        if row.tv_estimate < Config.NOISE_MULTIPLIER * floor:
            break
        usable.append(row.k)
    if not usable:
        raise InsufficientSignalError(
            f"every TV estimate is within {Config.NOISE_MULTIPLIER}x the noise floor {floor:.4g}"
        )

    tau = tau_of(p, d)
    references = [decay_reference(k, tau, p, d) for k in range(k_max + 1)]
    ratios = [profile[k + 1] / profile[k] for k in usable[:-1]]
    if len(usable) < 2:
        warnings.warn("only one usable step; decay slope undefined", RuntimeWarning)
        slope = math.nan
    else:
        slope = float(np.polyfit(usable, np.log([profile[k] for k in usable]), 1)[0])
    logger.info("Decay fit d=%d p=%s: slope=%s over k=%s (floor %.4g)", d, p, slope, usable, floor)
    return DecayFit(slope=slope, rate=math.exp(slope) if not math.isnan(slope) else math.nan,
                    noise_floor=floor, rows=rows, usable_steps=usable, ratios=ratios, references=references)


def ks_to_beta(values, d):
    """Kolmogorov-Smirnov test of projections against Beta_d."""
    return stats.kstest(np.asarray(values, dtype=float), lambda x: beta_cdf_many(d, x))


def ks_to_restricted_beta(values, d, tau):
    """Kolmogorov-Smirnov test against Beta_d conditioned on [tau, 1]."""
    mass = float(beta_tail_many(d, tau))

    def cdf(x):
        x = np.clip(x, tau, 1.0)
        return np.clip((mass - beta_tail_many(d, x)) / mass, 0.0, 1.0)

    return stats.kstest(np.asarray(values, dtype=float), cdf)


def cap_decomposition(ell: StepFunction) -> CapMeasure:
    """
    Write a spherically monotone step density as a mixture of caps around the same center.

    The cap at breakpoint b_j gets mass (l_j - l_{j-1}) * Pr[X >= b_j], with l_{-1} = 0.
    """
    if np.any(ell.values < 0.0):
        raise InvalidDensityError("density values must be nonnegative")
    if np.any(np.diff(ell.values) < 0.0):
        raise NotSphericallyMonotoneError("density decreases somewhere along <x, x0>")
    total = ell.integral()
    if abs(total - 1.0) > Config.NORMALIZATION_TOL:
        raise InvalidDensityError(f"density integrates to {total!r}, not 1")

    jumps = np.diff(np.concatenate(([0.0], ell.values)))
    tails = beta_tail_many(ell.d, ell.breakpoints[:-1])
    masses = jumps * tails
    keep = jumps > 0.0
    return CapMeasure(thresholds=ell.breakpoints[:-1][keep], masses=masses[keep], d=ell.d)


def reconstruct_from_caps(measure: CapMeasure, x) -> np.ndarray:
    """Density of the cap mixture at <y, x0> = x."""
    x = np.asarray(x, dtype=float)
    tails = beta_tail_many(measure.d, measure.thresholds)
    heights = measure.masses / tails
    return np.sum(heights[None, :] * (x.reshape(-1, 1) >= measure.thresholds[None, :]), axis=1).reshape(x.shape)


def _dkw(n, alpha):
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def dominance_details(mu_samples, nu_samples, axis, alpha=Config.DKW_ALPHA) -> DominanceResult:
    """
    Empirical test that the projection of mu is stochastically larger than that of nu.

    F_mu <= F_nu must hold on a grid up to the sum of both DKW radii at level alpha.
    """
    mu = np.sort(np.atleast_2d(mu_samples) @ as_unit_vector(axis))
    nu = np.sort(np.atleast_2d(nu_samples) @ as_unit_vector(axis))
    if min(mu.shape[0], nu.shape[0]) < Config.MIN_DOMINANCE_SAMPLES:
        raise InsufficientSamplesError(f"need at least {Config.MIN_DOMINANCE_SAMPLES} samples per measure")
    grid = np.linspace(-1.0, 1.0, Config.DOMINANCE_GRID)
    f_mu = np.searchsorted(mu, grid, side="right") / mu.shape[0]
    f_nu = np.searchsorted(nu, grid, side="right") / nu.shape[0]
    tolerance = _dkw(mu.shape[0], alpha) + _dkw(nu.shape[0], alpha)
    violation = float(np.max(f_mu - f_nu))
    return DominanceResult(holds=violation <= tolerance, max_violation=violation, tolerance=tolerance)


def dominance_check(mu_samples, nu_samples, axis, alpha=Config.DKW_ALPHA) -> bool:
    return dominance_details(mu_samples, nu_samples, axis, alpha).holds


def write_tv_table(path, rows: Sequence[TVRow]):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["k", "tv_estimate", "noise_floor", "trials"])
        for row in rows:
            writer.writerow([row.k, repr(float(row.tv_estimate)), repr(float(row.noise_floor)), row.trials])
    logger.info("Wrote %d TV rows to %s", len(rows), path)
