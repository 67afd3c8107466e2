"""Initial-data and forcing recipe tests."""

import numpy as np
import pytest

from lpflow.grid import divergence, lp_norm, make_grid
from lpflow.initial import (
    orszag_tang_magnetic,
    random_divergence_free,
    single_mode_force,
    stress_bump,
    taylor_green,
    taylor_green_hold_force,
)


def test_taylor_green_is_divergence_free_unit_cell():
    g = make_grid(64)
    v = taylor_green(g)
    assert v.divergence_free
    assert lp_norm(divergence(v), np.inf) < 1e-13
    assert abs(lp_norm(v, np.inf) - 1.0) < 1e-12
    # phases follow the fundamental frequency on a different torus
    g2 = make_grid(64, length=np.pi)
    assert lp_norm(divergence(taylor_green(g2)), np.inf) < 1e-12


def test_taylor_green_amplitude_scales_linearly():
    g = make_grid(32)
    v = taylor_green(g, amplitude=0.25)
    assert np.allclose(v.x.values, 0.25 * taylor_green(g).x.values)


def test_random_velocity_is_solenoidal_normalized_and_band_limited():
    g = make_grid(64)
    v = random_divergence_free(g, np.random.default_rng(3), slope=2.0, cutoff=8)
    assert lp_norm(divergence(v), np.inf) < 1e-13
    assert abs(lp_norm(v, np.inf) - 1.0) < 1e-12
    radial = np.hypot(g.freq_x, g.freq_y)
    outside = radial > 8
    assert np.max(np.abs(v.x.spectrum[outside])) == 0.0
    assert np.max(np.abs(v.y.spectrum[outside])) == 0.0


def test_random_velocity_is_reproducible_per_seed():
    g = make_grid(32)
    a = random_divergence_free(g, np.random.default_rng(11))
    b = random_divergence_free(g, np.random.default_rng(11))
    c = random_divergence_free(g, np.random.default_rng(12))
    assert np.array_equal(a.x.values, b.x.values)
    assert not np.array_equal(a.x.values, c.x.values)


def test_stress_bump_meets_conformation_margin():
    g = make_grid(64)
    tau = stress_bump(g)
    det = (1.0 + 2.0 * tau.xx.values) * (1.0 + 2.0 * tau.yy.values) - (
        2.0 * tau.xy.values
    ) ** 2
    assert det.min() > 1.2
    # random perturbation variant honors the same bound
    tau_r = stress_bump(g, rng=np.random.default_rng(5))
    det_r = (1.0 + 2.0 * tau_r.xx.values) * (1.0 + 2.0 * tau_r.yy.values) - (
        2.0 * tau_r.xy.values
    ) ** 2
    assert det_r.min() > 1.2


def test_stress_bump_rejects_oversized_perturbation():
    g = make_grid(32)
    with pytest.raises(ValueError):
        stress_bump(g, epsilon=0.15, delta=2.0)


def test_orszag_tang_profile_is_solenoidal():
    g = make_grid(64)
    H = orszag_tang_magnetic(g, amplitude=0.5)
    assert lp_norm(divergence(H), np.inf) < 1e-13
    # amplitude scales each component; the extrema co-locate at (pi/4, pi/2)
    assert abs(np.max(np.abs(H.x.values)) - 0.5) < 1e-12
    assert abs(np.max(np.abs(H.y.values)) - 0.5) < 1e-12
    assert abs(lp_norm(H, np.inf) - 0.5 * np.sqrt(2.0)) < 1e-12


def test_single_mode_force_shape():
    g = make_grid(32)
    f = single_mode_force(g, amplitude=0.7)
    assert np.allclose(f.x.values, 0.7 * np.sin(g.y) + 0.0 * g.x)
    assert np.max(np.abs(f.y.values)) == 0.0


def test_hold_force_is_twice_nu_taylor_green():
    g = make_grid(32)
    f = taylor_green_hold_force(g, nu=0.5, amplitude=1.0)
    base = taylor_green(g)
    assert np.allclose(f.x.values, 1.0 * base.x.values)
    assert np.allclose(f.y.values, 1.0 * base.y.values)
