import logging
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from sphere_core.src.config import Config

logger = logging.getLogger(__name__)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(Config.GL_ORDER)


class InvalidDimensionError(ValueError):
    pass


class DomainError(ValueError):
    pass


class SingularInputError(ValueError):
    pass


class EmptyCapError(ValueError):
    pass


class DegenerateCapWarning(UserWarning):
    pass


@dataclass(frozen=True)
class BetaDist:
    """Law of <u, e1> for u uniform on S^{d-1}."""
    d: int

    def __post_init__(self):
        if self.d < 2:
            raise InvalidDimensionError(f"Beta_d needs d >= 2, got {self.d}")

    @property
    def log_z(self) -> float:
        return _log_z(self.d)

    @property
    def z(self) -> float:
        return math.exp(self.log_z)


@dataclass(frozen=True)
class TailBounds:
    lower: Optional[float]
    upper: float


@dataclass(frozen=True)
class CapSpec:
    center: np.ndarray
    tau: float
    p: float

    @property
    def d(self) -> int:
        return self.center.shape[0]

    @classmethod
    def from_p(cls, center, p):
        center = as_unit_vector(center)
        return cls(center=center, tau=tau_of(p, center.shape[0]), p=float(p))

    @classmethod
    def from_tau(cls, center, tau):
        center = as_unit_vector(center)
        return cls(center=center, tau=float(tau), p=beta_tail(BetaDist(center.shape[0]), tau))


def _log_z(d):
    return float(gammaln(d / 2.0) - gammaln((d - 1) / 2.0) - 0.5 * math.log(math.pi))


def _check_unit_interval(values, name):
    arr = np.asarray(values, dtype=float)
    if np.any(np.abs(arr) > 1.0) or np.any(np.isnan(arr)):
        raise DomainError(f"{name} must lie in [-1, 1]")
    return arr


def as_unit_vector(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 1:
        raise InvalidDimensionError("a unit vector must be a nonempty 1-d array")
    if abs(np.linalg.norm(x) - 1.0) > Config.NORM_TOL:
        raise DomainError(f"vector norm {np.linalg.norm(x)!r} is not 1")
    return x


# Tails are computed through x = sin(theta):
#   Pr[X >= t] = Z_d * integral_{asin t}^{pi/2} cos^{d-2}(theta) d(theta),  t >= 0,
# which is smooth for every d >= 2. The integrand is scaled by its value at
# asin(t) so that everything stays in log-space.

def _cutoff_angle(theta0, k):
    return np.arccos(np.clip(np.cos(theta0) * math.exp(-Config.TAIL_CUTOFF / k), 0.0, 1.0))


def _log_tail_nonneg_quad(d, t):
    if t >= 1.0:
        return -math.inf
    log_z = _log_z(d)
    theta0 = math.asin(t)
    k = d - 2
    if k == 0:
        return log_z + math.log(math.pi / 2.0 - theta0)
    log_c0 = 0.5 * math.log1p(-t * t)
    theta_cut = float(_cutoff_angle(theta0, k))

    def integrand(theta):
        c = math.cos(theta)
        if c <= 0.0:
            return 0.0
        return math.exp(k * (math.log(c) - log_c0))

    value, abserr = integrate.quad(
        integrand, theta0, theta_cut,
        epsabs=0.0, epsrel=Config.QUAD_EPSREL, limit=Config.QUAD_LIMIT,
    )
    logger.debug("tail quadrature d=%s t=%s value=%s abserr=%s", d, t, value, abserr)
    return log_z + k * log_c0 + math.log(value)


def _log_tail_nonneg_many(d, t):
    t = np.asarray(t, dtype=float)
    out = np.full(t.shape, -np.inf)
    inside = t < 1.0
    if not np.any(inside):
        return out
    log_z = _log_z(d)
    theta0 = np.arcsin(t[inside])
    k = d - 2
    if k == 0:
        out[inside] = log_z + np.log(np.pi / 2.0 - theta0)
        return out
    log_c0 = 0.5 * np.log1p(-t[inside] ** 2)
    width = (_cutoff_angle(theta0, k) - theta0) / Config.GL_PANELS
    total = np.zeros_like(theta0)
    with np.errstate(divide="ignore"):
        for panel in range(Config.GL_PANELS):
            left = theta0 + panel * width
            nodes = left[:, None] + 0.5 * (_GL_NODES[None, :] + 1.0) * width[:, None]
            values = np.exp(k * (np.log(np.cos(nodes)) - log_c0[:, None]))
            total += 0.5 * width * (values @ _GL_WEIGHTS)
    out[inside] = log_z + k * log_c0 + np.log(total)
    return out


def _log_tail_many(d, t):
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape)
    nonneg = t >= 0.0
    out[nonneg] = _log_tail_nonneg_many(d, t[nonneg])
    if np.any(~nonneg):
        out[~nonneg] = np.log1p(-np.exp(_log_tail_nonneg_many(d, -t[~nonneg])))
    return out


def beta_density(dist: BetaDist, x: float) -> float:
    """psi_d(x) = Z_d (1 - x^2)^((d-3)/2)."""
    if abs(x) > 1.0:
        raise DomainError(f"x={x!r} outside [-1, 1]")
    if dist.d == 3:
        return dist.z
    if abs(x) == 1.0:
        return math.inf if dist.d == 2 else 0.0
    return math.exp(dist.log_z + 0.5 * (dist.d - 3) * math.log1p(-x * x))


def beta_log_density_many(d, x):
    x = _check_unit_interval(x, "x")
    with np.errstate(divide="ignore"):
        return _log_z(d) + 0.5 * (d - 3) * np.log1p(-x * x) if d != 3 else np.full(x.shape, _log_z(d))


def beta_log_tail(dist: BetaDist, t: float) -> float:
    if abs(t) > 1.0:
        raise DomainError(f"t={t!r} outside [-1, 1]")
    if t == 0.0:
        return math.log(0.5)
    if t > 0.0:
        return _log_tail_nonneg_quad(dist.d, t)
    return math.log1p(-math.exp(_log_tail_nonneg_quad(dist.d, -t)))


def beta_tail(dist: BetaDist, t: float) -> float:
    """
    Pr[X >= t] for X ~ Beta_d, by adaptive quadrature.

    Parameters:
    - dist (BetaDist): the projected-coordinate law.
    - t (float): threshold in [-1, 1].

    Returns:
    - float: the tail probability in [0, 1].

    Raises:
    - DomainError: if |t| > 1.
    """
    if abs(t) > 1.0:
        raise DomainError(f"t={t!r} outside [-1, 1]")
    if t == 0.0:
        return 0.5
    if t > 0.0:
        return math.exp(_log_tail_nonneg_quad(dist.d, t))
    return 1.0 - math.exp(_log_tail_nonneg_quad(dist.d, -t))


def beta_log_tail_many(d, t):
    return _log_tail_many(d, _check_unit_interval(t, "t"))


def beta_tail_many(d, t):
    """Vectorized tails via the fixed Gauss-Legendre rule; agrees with beta_tail to ~1e-13."""
    t = _check_unit_interval(t, "t")
    out = np.empty(t.shape)
    nonneg = t >= 0.0
    out[nonneg] = np.exp(_log_tail_nonneg_many(d, t[nonneg]))
    out[~nonneg] = 1.0 - np.exp(_log_tail_nonneg_many(d, -t[~nonneg]))
    out[t == 0.0] = 0.5
    return out


def beta_cdf_many(d, x):
    return beta_tail_many(d, -np.asarray(x, dtype=float))


def tail_sandwich(t: float, d: int) -> TailBounds:
    """Analytic bounds around Pr[X >= t] for t > 0; lower is None where its correction factor is <= 0."""
    if not 0.0 < t < 1.0:
        raise DomainError("the tail sandwich needs 0 < t < 1")
    log_front = _log_z(d) - math.log(t * (d - 1)) + 0.5 * (d - 1) * math.log1p(-t * t)
    upper = math.exp(log_front)
    dt2 = d * t * t
    factor = 1.0 - 4.0 * math.log1p(dt2) / dt2
    lower = upper * factor if factor > 0.0 else None
    return TailBounds(lower=lower, upper=upper)


def tau_of(p: float, d: int) -> float:
    """Threshold tau with Pr[X >= tau] = p, X ~ Beta_d."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p={p!r} outside [0, 1]")
    if p == 0.0:
        logger.warning("tau_of called with p=0 (d=%s); returning the degenerate cap tau=1", d)
        warnings.warn("p = 0 gives a degenerate cap, tau = 1", DegenerateCapWarning, stacklevel=2)
        return 1.0
    BetaDist(d)
    return _tau_of_cached(float(p), int(d))


@lru_cache(maxsize=4096)
def _tau_of_cached(p, d):
    if p == 1.0:
        return -1.0
    if p == 0.5:
        return 0.0
    if p > 0.5:
        return -_tau_of_cached(1.0 - p, d)

    dist = BetaDist(d)
    log_p = math.log(p)
    lo, hi = 0.0, 1.0
    iterations = 0
    while hi - lo > Config.BISECTION_TOL and iterations < Config.BISECTION_MAX_ITER:
        mid = 0.5 * (lo + hi)
        if beta_log_tail(dist, mid) >= log_p:
            lo = mid
        else:
            hi = mid
        iterations += 1
    tau = 0.5 * (lo + hi)
    logger.debug("tau_of(p=%s, d=%s) = %s after %d bisection steps", p, d, tau, iterations)
    return tau


def shifted_threshold(x, y, tau):
    """T(x, y) = (tau - xy) / sqrt((1 - x^2)(1 - y^2)); accepts scalars or broadcastable arrays."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x >= 1.0) or np.any(y >= 1.0):
        raise SingularInputError("shifted threshold is singular at x = 1 or y = 1")
    value = (tau - x * y) / np.sqrt((1.0 - x * x) * (1.0 - y * y))
    return float(value) if value.ndim == 0 else value


def combo_threshold(tau, d, slack=Config.COMBO_SLACK):
    return tau + slack / math.sqrt(d)


def sample_uniform_sphere(d: int, rng: np.random.Generator) -> np.ndarray:
    if d < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {d}")
    while True:
        g = rng.standard_normal(d)
        norm = np.linalg.norm(g)
        if norm > 0.0:
            return g / norm


def sample_uniform_sphere_many(n, d, rng):
    if d < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {d}")
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1)
    # a zero row has probability zero; redraw it anyway
    while np.any(norms == 0.0):
        bad = norms == 0.0
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(g, axis=1)
    return g / norms[:, None]


class RestrictedBetaSampler:
    """
    Inverse-CDF sampler for Beta_d conditioned on [tau, 1].

    A table of log-tails brackets each target. Safeguarded Newton steps
    on log Pr[X >= a] then refine it.
    """

    def __init__(self, d, tau):
        BetaDist(d)
        if not -1.0 <= tau < 1.0:
            raise EmptyCapError(f"cap with tau={tau!r} is empty")
        self.d = d
        self.tau = float(tau)
        half = Config.SAMPLER_GRID // 2 + 1
        s = np.linspace(0.0, 1.0, half)
        grid = np.union1d(self.tau + (1.0 - self.tau) * s, self.tau + (1.0 - self.tau) * s ** 3)
        self._grid = grid[grid < 1.0]
        self._log_tails = _log_tail_many(d, self._grid)
        self.log_mass = float(self._log_tails[0])
        if not np.isfinite(self.log_mass):
            raise EmptyCapError(f"cap with tau={tau!r} has zero mass at d={d}")

    def inverse(self, u):
        """Map u in (0, 1] to a in [tau, 1) with Pr[X >= a] = u * Pr[X >= tau]."""
        u = np.asarray(u, dtype=float)
        target = np.log(u) + self.log_mass
        idx = np.searchsorted(-self._log_tails, -target, side="right")
        lo = self._grid[np.clip(idx - 1, 0, len(self._grid) - 1)]
        hi = np.where(idx < len(self._grid), self._grid[np.clip(idx, 0, len(self._grid) - 1)], 1.0)
        lt_lo = self._log_tails[np.clip(idx - 1, 0, len(self._grid) - 1)]
        lt_hi = np.where(idx < len(self._grid), self._log_tails[np.clip(idx, 0, len(self._grid) - 1)], -np.inf)

        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(np.isfinite(lt_hi), (lt_lo - target) / (lt_lo - lt_hi), 0.5)
            a = lo + np.clip(np.nan_to_num(frac, nan=0.5), 0.0, 1.0) * (hi - lo)
            for _ in range(Config.NEWTON_STEPS):
                g = _log_tail_many(self.d, a) - target
                lo = np.where(g >= 0.0, a, lo)
                hi = np.where(g < 0.0, a, hi)
                slope = -np.exp(beta_log_density_many(self.d, a) - _log_tail_many(self.d, a))
                step = a - g / slope
                ok = np.isfinite(step) & (step > lo) & (step < hi)
                a = np.where(ok, step, 0.5 * (lo + hi))
        a = np.where(u >= 1.0, self.tau, a)
        return np.clip(a, self.tau, 1.0)

    def sample(self, size, rng):
        return self.inverse(1.0 - rng.random(size))


@lru_cache(maxsize=256)
def restricted_beta_sampler(d, tau):
    return RestrictedBetaSampler(d, tau)


def _embed(centers, heights, rng):
    """Return heights * c + sqrt(1 - heights^2) * u with u uniform on the sphere orthogonal to c."""
    g = rng.standard_normal(centers.shape)
    g -= np.sum(g * centers, axis=1)[:, None] * centers
    g /= np.linalg.norm(g, axis=1)[:, None]
    v = heights[:, None] * centers + np.sqrt(np.clip(1.0 - heights ** 2, 0.0, None))[:, None] * g
    return v / np.linalg.norm(v, axis=1)[:, None]


def sample_cap_many(centers, tau, rng):
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    sampler = restricted_beta_sampler(centers.shape[1], float(tau))
    out = np.empty_like(centers)
    for start in range(0, centers.shape[0], Config.BATCH_SIZE):
        block = centers[start:start + Config.BATCH_SIZE]
        out[start:start + Config.BATCH_SIZE] = _embed(block, sampler.sample(block.shape[0], rng), rng)
    return out


def sample_cap(spec: CapSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.p <= 0.0:
        raise EmptyCapError("cannot sample from a measure-zero cap")
    return sample_cap_many(spec.center[None, :], spec.tau, rng)[0]


def sample_shell_many(centers, tau, rng):
    if not -1.0 <= tau <= 1.0:
        raise DomainError(f"tau={tau!r} outside [-1, 1]")
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    return _embed(centers, np.full(centers.shape[0], float(tau)), rng)


def sample_shell(center, tau, rng):
    return sample_shell_many(as_unit_vector(center)[None, :], tau, rng)[0]
