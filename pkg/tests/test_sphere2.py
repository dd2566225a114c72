import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kflux.geometry import DomainError, mean_chord
from kflux.sampling import ConfigError, RngStream
from kflux.sphere2 import (
    CapSpec,
    S2WalkConfig,
    cap_boundary_length,
    cap_mean_chord,
    cap_volume,
    geodesic_chord_length,
    s2_walk_trial,
)

HEMI = CapSpec(1.0, math.pi / 2)


def test_cap_volume_examples():
    assert cap_volume(HEMI) == pytest.approx(2 * math.pi, rel=1e-15)
    assert cap_volume(CapSpec(1.0, math.pi / 3)) == pytest.approx(math.pi, rel=1e-12)
    assert cap_volume(CapSpec(1.0, 1e-8)) < 1e-15


def test_cap_boundary_examples():
    assert cap_boundary_length(HEMI) == pytest.approx(2 * math.pi, rel=1e-15)
    assert cap_boundary_length(CapSpec(1.0, math.pi / 6)) == pytest.approx(math.pi, rel=1e-12)
    assert cap_boundary_length(CapSpec(2.0, math.pi / 2)) == pytest.approx(4 * math.pi, rel=1e-15)


def test_cap_mean_chord_examples():
    assert cap_mean_chord(HEMI) == pytest.approx(math.pi, rel=1e-15)
    assert cap_mean_chord(CapSpec(1.0, math.pi / 3)) == pytest.approx(math.pi / math.sqrt(3), rel=1e-12)
    assert cap_mean_chord(CapSpec(1.0, math.pi / 3)) == pytest.approx(1.8138, abs=1e-4)
    t = 1e-6
    assert cap_mean_chord(CapSpec(1.0, t)) == pytest.approx(math.pi * t / 2, rel=1e-9)


@pytest.mark.parametrize("theta", [0.0, -0.1, math.pi / 2 + 1e-9])
def test_cap_domain(theta):
    with pytest.raises(DomainError):
        CapSpec(1.0, theta)


def test_geodesic_chord_examples():
    assert geodesic_chord_length(0.3, HEMI) == pytest.approx(math.pi, abs=1e-9)
    assert geodesic_chord_length(math.pi / 2, CapSpec(1.0, math.pi / 3)) == pytest.approx(
        2 * math.pi / 3, abs=1e-12
    )
    # sin(psi) < cos(theta): the circle misses the cap
    assert geodesic_chord_length(0.2, CapSpec(1.0, math.pi / 4)) == 0.0


def test_geodesic_chord_bruteforce():
    # sample the great circle densely and measure the arc with z >= cos(theta)
    cap = CapSpec(1.0, 1.1)
    for psi in (0.6, 1.0, 1.4):
        phi = np.linspace(0, 2 * np.pi, 2_000_001)
        z = np.sin(psi) * np.cos(phi)
        arc = (z >= np.cos(cap.theta)).mean() * 2 * np.pi
        assert geodesic_chord_length(psi, cap) == pytest.approx(arc, abs=1e-5)


@given(st.floats(1e-6, math.pi / 2), st.floats(1e-3, 1e3))
def test_manifold_flux_identity(theta, r):
    cap = CapSpec(r, theta)
    lhs = cap_mean_chord(cap) * (1 / math.pi) * cap_boundary_length(cap)
    assert lhs == pytest.approx(cap_volume(cap), rel=1e-12)


def test_hemisphere_constant_chord():
    psi = RngStream(50).uniform(10**4) * (math.pi / 2)
    psi = psi[psi > 0]
    lengths = np.array([geodesic_chord_length(p, HEMI) for p in psi])
    assert np.abs(lengths - math.pi).max() < 1e-9


def test_small_cap_flat_limit():
    theta = 0.05
    flat = mean_chord(2, theta)
    assert abs(cap_mean_chord(CapSpec(1.0, theta)) / flat - 1) < 0.01


def test_config_validation():
    with pytest.raises(ConfigError):
        S2WalkConfig(CapSpec(1.0, 0.1), dt=0.01)
    S2WalkConfig(CapSpec(1.0, 0.2), dt=0.01)


def test_empty_walk():
    s = s2_walk_trial(S2WalkConfig(HEMI, walkers=0))
    assert s.boundary_hits == 0 and math.isnan(s.k_hat)


def test_frame_drift_over_a_million_steps():
    s = s2_walk_trial(S2WalkConfig(HEMI, walkers=100, steps=10_000, seed=4))
    assert s.frame_drift < 1e-9
    assert abs(s.boundary_hits - s.exits) <= 100


def test_workers_do_not_change_results():
    cfg = dict(cap=CapSpec(1.0, math.pi / 4), walkers=257, steps=300, seed=8)
    a = s2_walk_trial(S2WalkConfig(**cfg, workers=1))
    b = s2_walk_trial(S2WalkConfig(**cfg, workers=5))
    assert a.hits_per_walker.tobytes() == b.hits_per_walker.tobytes()
    assert a.in_region_path_samples.tobytes() == b.in_region_path_samples.tobytes()
    assert a.occupancy_time == b.occupancy_time


def test_occupancy_matches_cap_fraction():
    cap = CapSpec(1.0, math.pi / 3)
    s = s2_walk_trial(S2WalkConfig(cap, walkers=4000, steps=500, seed=6))
    fraction = s.occupancy_time / (s.walkers * s.steps * s.dt)
    assert fraction == pytest.approx(cap_volume(cap) / (4 * math.pi), abs=0.02)


def test_radius_scaling():
    # same walk on a sphere twice as large with twice the step: K is unchanged
    a = s2_walk_trial(S2WalkConfig(CapSpec(1.0, 1.0), dt=0.02, walkers=3000, steps=500, seed=2))
    b = s2_walk_trial(S2WalkConfig(CapSpec(2.0, 1.0), dt=0.04, walkers=3000, steps=500, seed=2))
    assert a.boundary_hits == b.boundary_hits
    assert b.k_hat == pytest.approx(a.k_hat, rel=1e-12)
    assert b.in_region_path_samples == pytest.approx(2 * a.in_region_path_samples, rel=1e-9)
