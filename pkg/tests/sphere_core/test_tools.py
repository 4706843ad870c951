import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from sphere_core.src.tools import (
    BetaDist,
    CapSpec,
    DegenerateCapWarning,
    DomainError,
    EmptyCapError,
    InvalidDimensionError,
    SingularInputError,
    as_unit_vector,
    beta_density,
    beta_log_tail,
    beta_tail,
    beta_tail_many,
    combo_threshold,
    restricted_beta_sampler,
    sample_cap,
    sample_cap_many,
    sample_shell,
    sample_uniform_sphere,
    sample_uniform_sphere_many,
    shifted_threshold,
    tail_sandwich,
    tau_of,
)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def e1(d):
    x = np.zeros(d)
    x[0] = 1.0
    return x


def test_beta_dist_rejects_small_dimension():
    with pytest.raises(InvalidDimensionError):
        BetaDist(1)


@pytest.mark.parametrize("t", [-0.9, -0.3, 0.0, 0.2, 0.7, 0.99])
def test_beta_tail_circle_is_arc_length(t):
    assert beta_tail(BetaDist(2), t) == pytest.approx(math.acos(t) / math.pi, abs=1e-12)


@pytest.mark.parametrize("t", [-0.5, 0.1, 0.6, 0.95])
def test_beta_tail_two_sphere_is_linear(t):
    # on S^2 the height of a uniform point is uniform on [-1, 1]
    assert beta_tail(BetaDist(3), t) == pytest.approx((1.0 - t) / 2.0, abs=1e-12)


def test_beta_tail_endpoints_and_symmetry():
    dist = BetaDist(40)
    assert beta_tail(dist, 0.0) == 0.5
    assert beta_tail(dist, 1.0) == 0.0
    assert beta_tail(dist, -1.0) == pytest.approx(1.0)
    assert beta_tail(dist, 0.2) + beta_tail(dist, -0.2) == pytest.approx(1.0, abs=1e-12)


def test_beta_tail_rejects_out_of_range():
    with pytest.raises(DomainError):
        beta_tail(BetaDist(10), 1.5)


def test_beta_log_tail_is_finite_far_in_the_tail():
    value = beta_log_tail(BetaDist(500), 0.9)
    assert math.isfinite(value)
    assert value < -200.0


def test_beta_density_values():
    assert beta_density(BetaDist(3), 0.4) == pytest.approx(0.5)
    assert beta_density(BetaDist(2), 1.0) == math.inf
    assert beta_density(BetaDist(10), 1.0) == 0.0
    assert beta_density(BetaDist(2), 0.0) == pytest.approx(1.0 / math.pi)


@pytest.mark.parametrize("d", [3, 10, 100, 400])
def test_beta_density_integrates_to_one(d):
    dist = BetaDist(d)
    total, _ = integrate.quad(lambda x: beta_density(dist, x), -1.0, 1.0, points=[0.0], limit=200)
    assert total == pytest.approx(1.0, abs=1e-8)
    upper, _ = integrate.quad(lambda x: beta_density(dist, x), 0.2, 1.0, limit=200)
    assert upper == pytest.approx(beta_tail(dist, 0.2), rel=1e-7, abs=1e-14)


def test_beta_tail_many_matches_adaptive_quadrature():
    t = np.array([-0.8, -0.1, 0.0, 0.05, 0.3, 0.6, 0.9])
    for d in (2, 5, 60, 400):
        expected = [beta_tail(BetaDist(d), float(x)) for x in t]
        np.testing.assert_allclose(beta_tail_many(d, t), expected, rtol=1e-10, atol=1e-15)


@pytest.mark.parametrize("d", [20, 100, 500])
@pytest.mark.parametrize("t", [0.1, 0.3, 0.6])
def test_tail_sandwich_brackets_the_tail(d, t):
    bounds = tail_sandwich(t, d)
    tail = beta_tail(BetaDist(d), t)
    assert tail <= bounds.upper
    if bounds.lower is not None:
        assert bounds.lower <= tail


def test_tail_sandwich_lower_vacuous_for_small_t():
    assert tail_sandwich(0.05, 20).lower is None


@pytest.mark.parametrize("d", [3, 20, 200])
@pytest.mark.parametrize("p", [1e-4, 0.01, 0.2, 0.7])
def test_tau_of_round_trip(d, p):
    assert beta_tail(BetaDist(d), tau_of(p, d)) == pytest.approx(p, abs=1e-10)


def test_tau_of_special_values():
    assert tau_of(0.5, 30) == 0.0
    assert tau_of(1.0, 30) == -1.0
    assert tau_of(0.9, 30) == pytest.approx(-tau_of(0.1, 30))


def test_tau_of_zero_warns():
    with pytest.warns(DegenerateCapWarning):
        assert tau_of(0.0, 30) == 1.0


def test_tau_of_rejects_bad_probability():
    with pytest.raises(DomainError):
        tau_of(1.2, 10)


def test_shifted_threshold():
    tau = 0.5
    assert shifted_threshold(0.0, 0.0, tau) == pytest.approx(tau)
    assert shifted_threshold(tau, tau, tau) == pytest.approx(tau / (1.0 + tau))
    values = shifted_threshold(np.array([0.5, 0.6]), np.array([0.5, 0.6]), tau)
    assert values.shape == (2,)
    with pytest.raises(SingularInputError):
        shifted_threshold(1.0, 0.2, tau)


def test_combo_threshold():
    assert combo_threshold(0.5, 100) == pytest.approx(0.9)
    assert combo_threshold(0.5, 100, slack=1.0) == pytest.approx(0.6)


def test_as_unit_vector_checks_norm():
    with pytest.raises(DomainError):
        as_unit_vector([1.0, 1.0])
    np.testing.assert_array_equal(as_unit_vector([0.0, 1.0]), [0.0, 1.0])


def test_uniform_sphere_samples_are_unit_and_centered(rng):
    x = sample_uniform_sphere_many(20000, 5, rng)
    np.testing.assert_allclose(np.linalg.norm(x, axis=1), 1.0, atol=1e-12)
    assert np.abs(x.mean(axis=0)).max() < 0.03
    assert np.linalg.norm(sample_uniform_sphere(7, rng)) == pytest.approx(1.0)
    with pytest.raises(InvalidDimensionError):
        sample_uniform_sphere(0, rng)


def test_uniform_sphere_in_one_dimension_is_a_sign(rng):
    draws = np.array([sample_uniform_sphere(1, rng)[0] for _ in range(64)])
    np.testing.assert_allclose(np.abs(draws), 1.0, rtol=0, atol=1e-15)
    assert draws.min() < 0.0 < draws.max()
    many = sample_uniform_sphere_many(500, 1, rng)
    assert many.shape == (500, 1)
    np.testing.assert_allclose(np.abs(many), 1.0, rtol=0, atol=1e-15)
    assert many.min() < 0.0 < many.max()


def test_uniform_sphere_is_seed_deterministic():
    a = sample_uniform_sphere_many(10, 4, np.random.default_rng(9))
    b = sample_uniform_sphere_many(10, 4, np.random.default_rng(9))
    np.testing.assert_array_equal(a, b)


def test_restricted_sampler_matches_conditional_tail(rng):
    d, tau = 50, 0.3
    sampler = restricted_beta_sampler(d, tau)
    heights = sampler.sample(20000, rng)
    assert heights.min() >= tau
    # the median of the conditional law solves Pr[X >= a] = Pr[X >= tau] / 2
    median = float(sampler.inverse(np.array([0.5]))[0])
    assert beta_tail(BetaDist(d), median) == pytest.approx(0.5 * beta_tail(BetaDist(d), tau), rel=1e-8)
    assert np.mean(heights >= median) == pytest.approx(0.5, abs=0.02)


def test_sample_cap_stays_in_cap(rng):
    spec = CapSpec.from_p(e1(30), 0.05)
    points = np.array([sample_cap(spec, rng) for _ in range(200)])
    assert np.all(points @ spec.center >= spec.tau - 1e-12)
    np.testing.assert_allclose(np.linalg.norm(points, axis=1), 1.0, atol=1e-12)


def test_sample_cap_many_uses_each_center(rng):
    centers = sample_uniform_sphere_many(500, 12, rng)
    points = sample_cap_many(centers, 0.4, rng)
    assert np.all(np.sum(points * centers, axis=1) >= 0.4 - 1e-12)


def test_cap_spec_round_trip():
    spec = CapSpec.from_tau(e1(25), 0.2)
    again = CapSpec.from_p(e1(25), spec.p)
    assert again.tau == pytest.approx(0.2, abs=1e-10)


def test_empty_cap_rejected(rng):
    with pytest.raises(EmptyCapError):
        restricted_beta_sampler(10, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateCapWarning)
        spec = CapSpec.from_p(e1(10), 0.0)
    with pytest.raises(EmptyCapError):
        sample_cap(spec, rng)


def test_sample_shell_is_exact(rng):
    c = e1(15)
    x = sample_shell(c, 0.35, rng)
    assert x @ c == pytest.approx(0.35, abs=1e-12)
    assert np.linalg.norm(x) == pytest.approx(1.0)
