import csv
import math

import numpy as np
import pytest

from cap_walks.src.tools import (
    EmptySampleError,
    InsufficientSamplesError,
    InvalidBinningError,
    InvalidDensityError,
    NotSphericallyMonotoneError,
    StabilityError,
    StepFunction,
    TVRow,
    bm_concentration_check,
    brownian_endpoints,
    brownian_sphere,
    cap_decomposition,
    cap_walk,
    cap_walk_many,
    decay_reference,
    dominance_check,
    dominance_details,
    fit_decay_rate,
    ks_to_beta,
    ks_to_restricted_beta,
    martingale_tail_check,
    project_1d,
    quantile_edges,
    reconstruct_from_caps,
    reference_masses,
    tv_to_uniform,
    write_tv_table,
)
from sphere_core.src.tools import DomainError, sample_cap_many, sample_uniform_sphere_many, tau_of


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def e1(d):
    x = np.zeros(d)
    x[0] = 1.0
    return x


def test_single_cap_step_stays_in_cap(rng):
    d, p = 8, 0.2
    tau = tau_of(p, d)
    walkers = cap_walk_many(e1(d), p, 1, 500, rng)
    assert np.all(walkers[:, 0] >= tau - 1e-12)
    assert np.allclose(np.linalg.norm(walkers, axis=1), 1.0)
    assert cap_walk(e1(d), p, 3, rng).shape == (d,)


def test_zero_steps_is_the_start(rng):
    assert np.array_equal(cap_walk_many(e1(4), 0.5, 0, 3, rng), np.tile(e1(4), (3, 1)))
    with pytest.raises(DomainError):
        cap_walk_many(e1(4), 0.0, 1, 3, rng)
    with pytest.raises(DomainError):
        cap_walk_many(e1(4), 0.5, -1, 3, rng)


def test_brownian_path_stays_on_sphere(rng):
    path = brownian_sphere(e1(5), 0.05, None, rng)
    assert np.allclose(np.linalg.norm(path.positions, axis=1), 1.0)
    assert path.times[-1] == pytest.approx(0.05)
    assert np.allclose(np.diff(path.times), path.step_size)
    assert brownian_sphere(e1(5), 0.0, None, rng).positions.shape == (1, 5)


def test_brownian_step_stability(rng):
    with pytest.raises(StabilityError):
        brownian_sphere(e1(11), 1.0, 0.05, rng)
    with pytest.raises(DomainError):
        brownian_endpoints(e1(3), -1.0, None, 2, rng)


def test_brownian_step_is_clamped_to_the_horizon(rng):
    # dt alone would break the stability limit; the horizon is shorter than one step
    path = brownian_sphere(e1(11), 0.002, 0.05, rng)
    assert path.step_size == pytest.approx(0.002)
    np.testing.assert_allclose(path.times, [0.0, 0.002])
    assert np.allclose(np.linalg.norm(path.positions, axis=1), 1.0)
    assert brownian_endpoints(e1(11), 0.002, 0.05, 3, rng).shape == (3, 11)


def test_bm_mean_and_tails(rng):
    report = bm_concentration_check(10, 0.1, 4000, rng)
    assert report.expected_mean == pytest.approx(math.exp(-0.9))
    assert report.mean_within_ci
    assert report.passed
    assert len(report.rows) == 8


def test_martingale_tails(rng):
    report = martingale_tail_check(10, 0.05, 4000, rng)
    assert report.expected_mean == 0.0
    assert report.passed
    assert report.mean_within_ci


def test_quantile_edges_have_equal_mass():
    edges = quantile_edges(12, 20)
    assert edges[0] == -1.0 and edges[-1] == 1.0
    assert np.allclose(reference_masses(12, edges), 1.0 / 20, atol=1e-9)
    with pytest.raises(InvalidBinningError):
        quantile_edges(12, 5)


def test_projection_and_tv(rng):
    d = 6
    samples = sample_uniform_sphere_many(20000, d, rng)
    measure = project_1d(samples, e1(d), edges=quantile_edges(d, 20))
    assert measure.weights.sum() == pytest.approx(1.0)
    assert measure.bin_count == 20
    assert tv_to_uniform(measure) < 0.05
    point_mass = project_1d(np.tile(e1(d), (10, 1)), e1(d), edges=quantile_edges(d, 20))
    assert tv_to_uniform(point_mass) == pytest.approx(1.0 - 1.0 / 20)
    with pytest.raises(EmptySampleError):
        project_1d(np.zeros((0, d)), e1(d))
    with pytest.raises(InvalidBinningError):
        project_1d(samples, e1(d), edges=[-1.0, 0.0, 1.0])


def test_decay_fit_profile(rng):
    fit = fit_decay_rate(e1(10), 0.1, 3, 20000, rng, bins=20)
    assert [row.k for row in fit.rows] == [0, 1, 2, 3]
    assert fit.rows[0].tv_estimate == pytest.approx(1.0 - 1.0 / 20)
    assert fit.usable_steps[0] == 1
    assert fit.rows[2].tv_estimate < fit.rows[1].tv_estimate
    assert fit.references[0] == 1.0
    with pytest.raises(DomainError):
        fit_decay_rate(e1(10), 0.1, 1, 100, rng)


def test_decay_reference_is_capped_and_decreasing():
    d, p = 50, 0.05
    tau = tau_of(p, d)
    values = [decay_reference(k, tau, p, d) for k in range(6)]
    assert values[0] == 1.0
    assert all(0.0 < v <= 1.0 for v in values)
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_projections_follow_beta_laws(rng):
    d, tau = 7, 0.3
    uniform = sample_uniform_sphere_many(3000, d, rng)
    assert ks_to_beta(uniform @ e1(d), d).pvalue > 1e-3
    capped = sample_cap_many(np.tile(e1(d), (3000, 1)), tau, rng)
    assert ks_to_restricted_beta(capped @ e1(d), d, tau).pvalue > 1e-3


def normalized_step(values, breakpoints, d):
    raw = StepFunction(breakpoints=np.asarray(breakpoints), values=np.asarray(values, dtype=float), d=d)
    return StepFunction(breakpoints=raw.breakpoints, values=raw.values / raw.integral(), d=d)


def test_cap_decomposition_reconstructs_density():
    ell = normalized_step([0.0, 1.0, 3.0], [-1.0, 0.0, 0.5, 1.0], 5)
    caps = cap_decomposition(ell)
    assert caps.masses.sum() == pytest.approx(1.0)
    assert caps.thresholds.tolist() == [0.0, 0.5]
    midpoints = np.array([-0.5, 0.25, 0.75])
    assert np.allclose(reconstruct_from_caps(caps, midpoints), ell(midpoints))


def test_cap_decomposition_rejects_bad_densities():
    with pytest.raises(NotSphericallyMonotoneError):
        cap_decomposition(normalized_step([2.0, 1.0], [-1.0, 0.0, 1.0], 4))
    with pytest.raises(InvalidDensityError):
        cap_decomposition(StepFunction(breakpoints=np.array([-1.0, 0.0, 1.0]), values=np.array([1.0, 2.0]), d=4))
    with pytest.raises(InvalidDensityError):
        StepFunction(breakpoints=np.array([-1.0, 0.5, 0.2, 1.0]), values=np.ones(3), d=4)


def test_cap_measure_dominates_uniform(rng):
    d, n = 6, 10000
    capped = sample_cap_many(np.tile(e1(d), (n, 1)), 0.2, rng)
    uniform = sample_uniform_sphere_many(n, d, rng)
    assert dominance_check(capped, uniform, e1(d))
    reverse = dominance_details(uniform, capped, e1(d))
    assert not reverse.holds
    assert reverse.max_violation > reverse.tolerance
    with pytest.raises(InsufficientSamplesError):
        dominance_check(capped[:100], uniform[:100], e1(d))


def test_write_tv_table(tmp_path):
    path = tmp_path / "tv.csv"
    write_tv_table(path, [TVRow(k=0, tv_estimate=0.5, noise_floor=0.01, trials=10)])
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows == [["k", "tv_estimate", "noise_floor", "trials"], ["0", "0.5", "0.01", "10"]]
