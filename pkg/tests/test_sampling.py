import math

import numpy as np
import pytest
from scipy import stats

from kflux.sampling import (
    ConfigError,
    RngStream,
    SampleMode,
    sample_point_in_ball,
    sample_points_in_ball,
    sample_unit_direction,
    sample_unit_directions,
)

N_BIG = 10**6


def test_same_stream_is_bitwise_identical():
    a = RngStream(123, 7).uniform(1000)
    b = RngStream(123, 7).uniform(1000)
    assert a.tobytes() == b.tobytes()


def test_streams_differ_by_id_and_seed():
    a = RngStream(123, 7).uniform(100)
    assert not np.array_equal(a, RngStream(123, 8).uniform(100))
    assert not np.array_equal(a, RngStream(124, 7).uniform(100))


def test_known_stream_prefix():
    # frozen so that any change to the generator is caught
    u = RngStream(0, 0).uniform(3)
    assert u.tolist() == pytest.approx(FROZEN_PREFIX, abs=0)


FROZEN_PREFIX = [0.955284023351694, 0.35279902062534574, 0.14056759707097732]


def test_distinct_streams_uncorrelated():
    a = RngStream(5, 0).uniform(200_000)
    b = RngStream(5, 1).uniform(200_000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


def test_uniform_and_normal_moments():
    rng = RngStream(9)
    u = rng.uniform(N_BIG)
    assert u.min() >= 0 and u.max() < 1
    assert stats.kstest(u, "uniform").statistic < 0.002
    z = rng.normal(N_BIG)
    assert stats.kstest(z, "norm").statistic < 0.002
    assert abs((z**4).mean() - 3) < 0.03


def test_bulk_and_single_draws_consume_identically():
    a, b = RngStream(1, 2), RngStream(1, 2)
    bulk = sample_unit_directions(4, a, size=5)
    single = np.array([sample_unit_direction(4, b) for _ in range(5)])
    assert bulk.tobytes() == single.tobytes()


@pytest.mark.parametrize("mode", list(SampleMode))
def test_one_dimensional_direction_is_sign(mode):
    d = sample_unit_directions(1, RngStream(3), mode, size=100_000)
    assert set(np.unique(d)) == {-1.0, 1.0}
    assert abs((d > 0).mean() - 0.5) < 0.005


@pytest.mark.parametrize("mode", list(SampleMode))
def test_direction_norm(mode):
    d = sample_unit_directions(3, RngStream(4), mode, size=10_000)
    assert np.abs(np.linalg.norm(d, axis=1) - 1).max() < 1e-12
    assert abs(np.linalg.norm(sample_unit_direction(3, RngStream(11), mode)) - 1) < 1e-12


def test_direction_mean_clt_bound():
    d = sample_unit_directions(2, RngStream(5), size=N_BIG)
    assert np.linalg.norm(d.mean(axis=0)) < 0.005


@pytest.mark.parametrize("n", [2, 3, 5, 10])
def test_direction_isotropy(n):
    d = sample_unit_directions(n, RngStream(6, n), size=N_BIG)
    cov = d.T @ d / len(d)
    assert np.abs(cov - np.eye(n) / n).max() < 0.005


@pytest.mark.parametrize("mode", list(SampleMode))
def test_ball_radial_fraction(mode):
    p = sample_points_in_ball(3, 1.0, RngStream(7), mode, size=N_BIG)
    assert abs((np.linalg.norm(p, axis=1) <= 0.5).mean() - 0.125) < 0.001


def test_ball_one_dimension_interval():
    p = sample_points_in_ball(1, 2.0, RngStream(8), size=10_000)
    assert p.shape == (10_000, 1)
    assert np.all(np.abs(p) <= 2.0)
    assert -2 <= sample_point_in_ball(1, 2.0, RngStream(8))[0] <= 2


def test_ball_quadrant_symmetry():
    p = sample_points_in_ball(2, 1.0, RngStream(9), size=N_BIG)
    assert abs(((p[:, 0] > 0) & (p[:, 1] > 0)).mean() - 0.25) < 0.0015


@pytest.mark.parametrize("n", [1, 2, 4, 8, 16])
def test_radial_law_uniform(n):
    r = 2.5
    p = sample_points_in_ball(n, r, RngStream(10, n), size=N_BIG)
    u = (np.linalg.norm(p, axis=1) / r) ** n
    assert u.max() <= 1.0
    assert stats.kstest(u, "uniform").statistic < 0.002


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_rejection_and_direct_agree(n):
    a = sample_points_in_ball(n, 1.0, RngStream(11, n), SampleMode.REJECTION, size=N_BIG)
    b = sample_points_in_ball(n, 1.0, RngStream(12, n), SampleMode.DIRECT, size=N_BIG)
    ra, rb = np.linalg.norm(a, axis=1), np.linalg.norm(b, axis=1)
    assert stats.ks_2samp(ra, rb).statistic < 0.005
    # angular marginal: first coordinate of the normalized point
    assert stats.ks_2samp(a[:, 0] / ra, b[:, 0] / rb).statistic < 0.005
    da = sample_unit_directions(n, RngStream(13, n), SampleMode.REJECTION, size=N_BIG)
    db = sample_unit_directions(n, RngStream(14, n), SampleMode.DIRECT, size=N_BIG)
    assert stats.ks_2samp(da[:, 0], db[:, 0]).statistic < 0.005


def test_rejection_refused_above_twelve():
    with pytest.raises(ConfigError):
        sample_unit_direction(13, RngStream(1), SampleMode.REJECTION)
    with pytest.raises(ConfigError):
        sample_point_in_ball(13, 1.0, RngStream(1), "rejection")
    sample_unit_direction(12, RngStream(1), "rejection")
    sample_unit_direction(16, RngStream(1), "direct")


def test_bad_stream_arguments():
    with pytest.raises(ConfigError):
        RngStream(-1)
    with pytest.raises(ConfigError):
        RngStream(2**64)
    with pytest.raises(ConfigError):
        sample_unit_direction(3, RngStream(1), "sobol")


def test_finalizer_matches_reference_splitmix64():
    # first output of the reference SplitMix64 seeded with 0
    from kflux.sampling import GOLDEN, mix64

    assert int(mix64(np.uint64(0) + GOLDEN)) == 0xE220A8397B1DCDAF
