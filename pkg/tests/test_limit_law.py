from __future__ import annotations

import math

import numpy as np
import pytest

from semirps import limit_law
from semirps.limit_law import LimitRep, constants, draw, draw_stream, orthant_win_prob

C = constants()


def test_constant_values():
    assert C.mean == pytest.approx(1.4658075, abs=5e-8)
    assert C.second_moment == pytest.approx(4.82699, abs=5e-6)
    assert C.variance == pytest.approx(2.67840, abs=5e-6)
    assert C.win_prob == pytest.approx(0.064677, abs=5e-7)
    assert C.variance == pytest.approx(C.second_moment - C.mean**2, abs=1e-12)
    assert C.mean_radius == pytest.approx(math.sqrt(math.pi))
    assert C.mean_cos_angle == pytest.approx(3 * math.sqrt(3) / (2 * math.pi))
    assert math.acos(11 / 16) == pytest.approx(3 * math.acos(0.25) - math.pi, abs=1e-12)


def test_mean_factorizes_through_radius_and_angle():
    assert C.mean == pytest.approx(C.mean_radius * C.mean_cos_angle, abs=1e-14)


def test_rep_d_degenerate_draw():
    assert limit_law.rep_d_transform(0.0, 1.0, 0.7) == 0.0


def test_rep_a_planar_example():
    z = limit_law.planar_triple(np.array([2.5, 0.0]))
    assert np.allclose(z, [2.5, -1.25, -1.25]) and z.max() == 2.5


def test_parse():
    assert LimitRep.parse("erock") is LimitRep.EROCK
    with pytest.raises(ValueError):
        LimitRep.parse("E")


def test_z_sums_to_zero_and_covariance():
    z = limit_law.z_triple(10**6, np.random.default_rng(1))
    assert np.abs(z.sum(axis=1)).max() < 1e-12
    target = np.array([[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])
    assert np.abs(np.cov(z.T) - target).max() <= 0.02


def test_stream_is_chunk_seeded():
    a = draw_stream("A", 1000, 9, chunk=256)
    assert np.array_equal(a, draw_stream("A", 1000, 9, chunk=256))
    assert np.array_equal(a[:256], draw("A", 256, np.random.default_rng([0, 9])))


@pytest.fixture(scope="module")
def rock_draws():
    return draw_stream(LimitRep.EROCK, 10**6, 3)


def test_erock_atom(rock_draws):
    assert abs(np.mean(rock_draws == 0) - 1 / 3) <= 0.002


def test_erock_mean(rock_draws):
    se = rock_draws.std(ddof=1) / math.sqrt(rock_draws.size)
    assert abs(rock_draws.mean() - C.mean) <= 4 * se


def test_erock_variance_bounds(rock_draws):
    lo, hi = limit_law.rock_variance_bounds()
    assert lo == pytest.approx(0.348, abs=1e-3) and hi == pytest.approx(5.008, abs=1e-3)
    assert lo <= rock_draws.var(ddof=1) <= hi


@pytest.mark.parametrize("rep", limit_law.GREEDY_REPS, ids=lambda r: r.value)
def test_negative_mass_matches_orthant_probability(rep):
    # The samplers agree with the orthant probability of the limit vector.
    x = draw_stream(rep, 10**6, 11)
    p = orthant_win_prob()
    assert abs(np.mean(x < 0) - p) <= 4 * math.sqrt(p * (1 - p) / x.size)


def test_orthant_probability_against_gaussian_cdf():
    from scipy.stats import multivariate_normal

    # W + Z_i: variance 4, pairwise covariance 1.
    cov = np.full((3, 3), 1.0) + 3.0 * np.eye(3)
    p = multivariate_normal.cdf(np.zeros(3), np.zeros(3), cov, abseps=1e-8, releps=1e-8)
    assert orthant_win_prob() == pytest.approx(p, abs=1e-5)
    # The stated closed form is the same orthant with correlation -1/4.
    cov_neg = np.full((3, 3), -1.0) + 5.0 * np.eye(3)
    p_neg = multivariate_normal.cdf(np.zeros(3), np.zeros(3), cov_neg, abseps=1e-8, releps=1e-8)
    assert C.win_prob == pytest.approx(p_neg, abs=1e-5)
