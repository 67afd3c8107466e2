"""Dyadic partition, block norms, and inequality-check tests.

Block weights for single Fourier modes are frozen from the closed-form
profile values phi(1) = 0.358165954911269 and phi(2) = 0.641834045088731
(the exponential-mollifier smoothstep evaluated by hand once); everything a
block operator produces on cos(k x) follows from those two numbers.
"""

import math

import numpy as np
import pytest

from lpflow import reference
from lpflow.grid import (
    ScalarField,
    SymTensorField,
    VectorField,
    dealias,
    gradient,
    lp_norm,
    make_grid,
)
from lpflow.lp import (
    annulus_profile,
    bernstein_window,
    besov_b0_inf_inf,
    block_sup_norms,
    bmo_norm,
    build_partition,
    check_bernstein,
    check_heat_decay,
    check_log_interpolation,
    check_log_interpolation_time,
    decompose,
    delta_q,
    heat_decay_bounds,
    holder_norm,
    lowpass_profile,
    partition_unity_error,
    s_q,
)

PHI_AT_1 = 0.358165954911269
PHI_AT_2 = 0.641834045088731


def random_field(grid, rng):
    return dealias(ScalarField.from_values(grid, rng.standard_normal((grid.n, grid.n))))


def resolved_random_field(grid, part, rng):
    """White noise band-limited to |xi| below the top block's lower edge.

    Every frequency of such a field lies in a block whose annulus the grid
    fully represents; the top (dealias-clipped) block is identically zero.
    """
    f = ScalarField.from_values(grid, rng.standard_normal((grid.n, grid.n)))
    edge = 0.75 * 2.0**part.q_max
    return ScalarField.from_spectrum(grid, np.where(grid.kmag < edge, f.spectrum, 0.0))


def cosine_mode(grid, k, axis="x"):
    phase = k * (grid.x if axis == "x" else grid.y)
    return ScalarField.from_values(grid, np.cos(phase) + 0.0 * grid.x * grid.y)


# ---------------------------------------------------------------------------
# radial profiles


def test_lowpass_profile_plateaus_and_support():
    assert np.array_equal(lowpass_profile([0.0, 0.5, 0.75]), [1.0, 1.0, 1.0])
    assert np.array_equal(lowpass_profile([4.0 / 3.0, 2.0, 100.0]), [0.0, 0.0, 0.0])
    # the mollifier tails underflow right at the edges, so probe the interior
    mid = lowpass_profile(np.linspace(0.85, 1.25, 50))
    assert np.all((mid > 0.0) & (mid < 1.0))
    assert np.all(np.diff(mid) < 0.0)  # strictly decreasing across the ramp


def test_annulus_profile_support_and_frozen_values():
    assert np.array_equal(annulus_profile([0.0, 0.5, 0.75]), [0.0, 0.0, 0.0])
    assert np.array_equal(annulus_profile([8.0 / 3.0, 3.0, 64.0]), [0.0, 0.0, 0.0])
    assert annulus_profile(1.5) == 1.0  # plateau: psi(0.75) - psi(1.5)
    assert abs(annulus_profile(1.0) - PHI_AT_1) < 1e-15
    assert abs(annulus_profile(2.0) - PHI_AT_2) < 1e-15
    # the two weights covering a lacunary mode partition its energy
    assert annulus_profile(1.0) + annulus_profile(2.0) == 1.0


def test_profiles_telescope_to_one():
    r = np.logspace(-2, 5, 400)
    total = lowpass_profile(r)
    for j in range(25):
        total = total + annulus_profile(r / 2.0**j)
    assert np.max(np.abs(total - 1.0)) < 1e-14


# ---------------------------------------------------------------------------
# partition construction


@pytest.mark.parametrize("n,q_lo,q_hi", [(16, 0, 3), (64, 0, 5), (128, 0, 6)])
def test_block_range_tracks_resolution(n, q_lo, q_hi):
    part = build_partition(make_grid(n))
    assert (part.q_min, part.q_max) == (q_lo, q_hi)
    assert part.n_blocks == q_hi - q_lo + 1
    assert list(part.qs) == list(range(q_lo, q_hi + 1))


def test_block_range_tracks_length():
    # fundamental frequency 2 doubles every physical wavenumber
    part = build_partition(make_grid(64, length=np.pi))
    assert (part.q_min, part.q_max) == (1, 6)
    part = build_partition(make_grid(64, length=4.0 * np.pi))
    assert part.q_min == -1


@pytest.mark.parametrize("n", [16, 64, 128])
def test_partition_of_unity(n):
    assert partition_unity_error(build_partition(make_grid(n))) <= 1e-12


def test_tabulated_masks_sum_to_one_at_default_length():
    # at L = 2*pi the stored range alone covers every grid wavenumber
    part = build_partition(make_grid(64))
    total = part.psi_mask.copy()
    for q in part.qs:
        total = total + part.phi_masks[q]
    assert np.max(np.abs(total - 1.0)) < 1e-14


def test_annuli_two_apart_are_disjoint():
    part = build_partition(make_grid(64))
    for q in part.qs:
        for q2 in part.qs:
            overlap = np.max(part.phi_masks[q] * part.phi_masks[q2])
            if abs(q - q2) >= 2:
                assert overlap == 0.0
            elif abs(q - q2) == 1:
                assert overlap > 0.0


def test_delta_q_outside_range_is_zero():
    g = make_grid(64)
    part = build_partition(g)
    f = random_field(g, np.random.default_rng(0))
    for q in (part.q_min - 1, part.q_max + 1, part.q_max + 7):
        assert np.array_equal(delta_q(f, q, part).values, np.zeros((64, 64)))


def test_full_lowpass_reproduces_field():
    g = make_grid(64)
    part = build_partition(g)
    f = random_field(g, np.random.default_rng(1))
    full = s_q(f, part.q_max + 1, part)
    assert np.max(np.abs(full.values - f.values)) < 1e-12 * np.max(np.abs(f.values))


# ---------------------------------------------------------------------------
# block decomposition


def test_single_mode_block_weights():
    g = make_grid(64)
    part = build_partition(g)
    sups = block_sup_norms(cosine_mode(g, 2), part)
    assert abs(sups[0] - PHI_AT_2) < 1e-12
    assert abs(sups[1] - PHI_AT_1) < 1e-12
    for q in part.qs:
        if q > 1:
            assert sups[q] < 1e-13


def test_reconstruction_matches_field():
    g = make_grid(64)
    part = build_partition(g)
    rng = np.random.default_rng(2)
    for _ in range(10):
        f = random_field(g, rng)
        err = decompose(f, part).reconstruct() - f
        assert np.max(np.abs(err.values)) <= 1e-10 * np.max(np.abs(f.values))


def test_decompose_vector_and_tensor():
    g = make_grid(32)
    part = build_partition(g)
    rng = np.random.default_rng(3)
    v = VectorField(random_field(g, rng), random_field(g, rng))
    tau = SymTensorField(random_field(g, rng), random_field(g, rng), random_field(g, rng))
    for f in (v, tau):
        blocks = decompose(f, part)
        assert type(blocks.blocks[part.q_min]) is type(f)
        rec = blocks.reconstruct()
        for got, want in zip(rec.components(), f.components()):
            assert np.max(np.abs(got.values - want.values)) < 1e-10


# ---------------------------------------------------------------------------
# Besov / Hoelder norms


def test_besov_of_single_mode_is_top_block_weight():
    g = make_grid(64)
    part = build_partition(g)
    assert abs(besov_b0_inf_inf(cosine_mode(g, 1), part) - PHI_AT_1) < 1e-12


def test_besov_two_modes_takes_sup_not_sum():
    g = make_grid(64)
    part = build_partition(g)
    f = ScalarField.from_values(g, np.cos(g.x) + 0.5 * np.cos(8.0 * g.y))
    # candidate block sups: phi(1), 0.5*phi(2), 0.5*phi(1); the first wins
    assert abs(besov_b0_inf_inf(f, part) - PHI_AT_1) < 1e-12


@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_holder_norm_is_dyadically_homogeneous(alpha):
    g = make_grid(64)
    part = build_partition(g)
    for k in (1, 2):
        lo = holder_norm(cosine_mode(g, 2**k), alpha, part)
        hi = holder_norm(cosine_mode(g, 2 ** (k + 1)), alpha, part)
        assert abs(hi / lo - 2.0**alpha) < 1e-12


def test_holder_norm_single_mode_closed_form():
    g = make_grid(64)
    part = build_partition(g)
    alpha = 0.7
    expected = max(2.0**alpha * PHI_AT_2, 4.0**alpha * PHI_AT_1)
    assert abs(holder_norm(cosine_mode(g, 4), alpha, part) - expected) < 1e-12


@pytest.mark.parametrize("alpha", [-0.5, 0.0, 1.0, 2.0, 2.5])
def test_holder_norm_rejects_out_of_range_exponents(alpha):
    g = make_grid(16)
    part = build_partition(g)
    f = cosine_mode(g, 1)
    with pytest.raises(ValueError):
        holder_norm(f, alpha, part)


# ---------------------------------------------------------------------------
# BMO estimator


def test_bmo_of_constant_is_zero():
    g = make_grid(16)
    f = ScalarField.from_values(g, np.full((16, 16), 3.7))
    # square means of identical samples drift a few ulp under pairwise sums
    assert bmo_norm(f) < 1e-13


def test_bmo_of_checkerboard_is_one():
    g = make_grid(32)
    i = np.arange(32)
    f = ScalarField.from_values(g, ((-1.0) ** (i[:, None] + i[None, :])))
    assert bmo_norm(f) == 1.0


def test_bmo_matches_exhaustive_scan():
    g = make_grid(16)
    rng = np.random.default_rng(4)
    for _ in range(20):
        f = random_field(g, rng)
        fast = bmo_norm(f)
        slow = reference.bmo_exhaustive(f.values)
        assert abs(fast - slow) <= 1e-13 * slow


def test_bmo_bounded_by_twice_sup():
    g = make_grid(64)
    rng = np.random.default_rng(5)
    for _ in range(5):
        f = random_field(g, rng)
        assert bmo_norm(f) <= 2.0 * lp_norm(f, np.inf) * (1.0 + 1e-12)


def test_bmo_of_vector_and_tensor_is_component_max():
    g = make_grid(16)
    rng = np.random.default_rng(6)
    a, b, c = (random_field(g, rng) for _ in range(3))
    assert bmo_norm(VectorField(a, b)) == max(bmo_norm(a), bmo_norm(b))
    assert bmo_norm(SymTensorField(a, b, c)) == max(bmo_norm(a), bmo_norm(b), bmo_norm(c))


# ---------------------------------------------------------------------------
# Bernstein inequality


def test_bernstein_single_modes_frozen_ratios():
    g = make_grid(64)
    part = build_partition(g)
    # |xi| = 2^q: ratio 1; |xi| = 2^(q+1) seen from block q: ratio 2
    assert abs(check_bernstein(cosine_mode(g, 1), 0, part).ratio - 1.0) < 1e-12
    assert abs(check_bernstein(cosine_mode(g, 2), 1, part).ratio - 1.0) < 1e-12
    assert abs(check_bernstein(cosine_mode(g, 2), 0, part).ratio - 2.0) < 1e-12


def test_bernstein_returns_reciprocal_pair():
    g = make_grid(64)
    part = build_partition(g)
    got = check_bernstein(cosine_mode(g, 4), 2, part)
    assert got.inverse == 1.0 / got.ratio


def test_bernstein_rejects_zero_block_and_higher_derivatives():
    g = make_grid(64)
    part = build_partition(g)
    # exact single mode straight in spectral space (a sampled cosine carries
    # ~1e-17 transform dust on every other mode, so its far blocks are not 0)
    spec = np.zeros((64, 64), dtype=complex)
    spec[1, 0] = spec[-1, 0] = 0.5
    f = ScalarField.from_spectrum(g, spec)
    with pytest.raises(ValueError):
        check_bernstein(f, 3, part)  # block 3 of cos(x) is zero
    with pytest.raises(ValueError):
        check_bernstein(f, 0, part, s=2)


def test_bernstein_sup_ratios_stay_in_window():
    g = make_grid(64)
    part = build_partition(g)
    rng = np.random.default_rng(7)
    lo, hi = bernstein_window(g.length)
    seen = []
    for _ in range(20):
        f = resolved_random_field(g, part, rng)
        for q in range(part.q_min, part.q_max):
            seen.append(check_bernstein(f, q, part).ratio)
        # the dealias-clipped top block carries none of this corpus
        with pytest.raises(ValueError):
            check_bernstein(f, part.q_max, part)
    assert lo < min(seen) and max(seen) < hi


def test_bernstein_l2_ratios_stay_inside_annulus_edges():
    # in L2 the ratio is an |xi|-weighted mean, so the raw profile edges bound it
    g = make_grid(64)
    part = build_partition(g)
    rng = np.random.default_rng(8)
    for _ in range(5):
        f = random_field(g, rng)
        for q in part.qs:
            r = check_bernstein(f, q, part, p=2).ratio
            assert 0.75 * 2.0**q <= r * 2.0**q <= (8.0 / 3.0) * 2.0**q


def test_bernstein_window_scales_with_length():
    lo, hi = bernstein_window(2.0 * np.pi)
    assert (lo, hi) == (0.7, 2.7)
    lo2, hi2 = bernstein_window(np.pi)
    assert np.allclose((lo2, hi2), (1.4, 5.4))


# ---------------------------------------------------------------------------
# heat decay


def test_heat_decay_at_time_zero_is_one():
    g = make_grid(64)
    part = build_partition(g)
    assert check_heat_decay(cosine_mode(g, 2), 1, 0.0, part) == 1.0


def test_heat_decay_single_mode_is_exact_exponential():
    g = make_grid(64)
    part = build_partition(g)
    got = check_heat_decay(cosine_mode(g, 4), 2, 0.3, part)
    assert abs(got - math.exp(-16.0 * 0.3)) < 1e-12


@pytest.mark.parametrize("t", [0.01, 0.1, 1.0])
def test_heat_decay_bracketed_by_annulus_bounds(t):
    g = make_grid(64)
    part = build_partition(g)
    rng = np.random.default_rng(9)
    for _ in range(10):
        f = random_field(g, rng)
        for q in part.qs:
            lo, hi = heat_decay_bounds(q, t)
            ratio = check_heat_decay(f, q, t, part)
            assert lo <= ratio <= hi


def test_heat_decay_rejects_negative_time():
    g = make_grid(64)
    part = build_partition(g)
    with pytest.raises(ValueError):
        check_heat_decay(cosine_mode(g, 1), 0, -0.1, part)


def test_heat_decay_bounds_underflow_to_zero():
    assert heat_decay_bounds(10, 1.0) == (0.0, 0.0)


# ---------------------------------------------------------------------------
# logarithmic interpolation (instantaneous)


def test_log_interpolation_family_is_monotone():
    # needs every mode resolved by >= 8 samples per period, hence n = 128
    g = make_grid(128)
    part = build_partition(g)
    ratios = [
        check_log_interpolation(cosine_mode(g, 2**k), 0.5, part).ratio for k in (2, 3, 4)
    ]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))


def test_log_interpolation_corpus_is_bounded():
    g = make_grid(64)
    part = build_partition(g)
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(20):
        ratio = check_log_interpolation(random_field(g, rng), 0.5, part).ratio
        assert np.isfinite(ratio) and ratio > 0.0
        worst = max(worst, ratio)
    assert worst < 1.0


def test_log_interpolation_reports_its_pieces():
    g = make_grid(64)
    part = build_partition(g)
    got = check_log_interpolation(cosine_mode(g, 4), 0.5, part)
    assert abs(got.sup_norm - 1.0) < 1e-12
    assert abs(got.l2_norm - np.pi * np.sqrt(2.0)) < 1e-12
    expected = 1.0 + got.l2_norm + got.bmo * math.log(math.e + got.holder)
    assert got.denominator == expected
    assert got.ratio == got.sup_norm / got.denominator


def test_log_interpolation_rejects_bad_exponent():
    g = make_grid(16)
    part = build_partition(g)
    with pytest.raises(ValueError):
        check_log_interpolation(cosine_mode(g, 1), 1.0, part)


# ---------------------------------------------------------------------------
# logarithmic interpolation (time-integrated)


def test_time_interpolation_static_history_reduces_to_instantaneous():
    g = make_grid(64)
    part = build_partition(g)
    f = random_field(g, np.random.default_rng(11))
    T = 0.8
    got = check_log_interpolation_time([0.0, 0.5 * T, T], [f, f, f], 0.5, part)
    grad = gradient(f)
    assert abs(got.lhs - T * lp_norm(grad, np.inf)) < 1e-12
    assert abs(got.l2_integral - T * lp_norm(f, 2)) < 1e-12
    block = max(block_sup_norms(grad, part).values())
    assert abs(got.block_sup_integral - T * block) < 1e-12
    holder = holder_norm(grad, 0.5, part)
    bracket = 1.0 + T * lp_norm(f, 2) + T * block * math.log(math.e + T * holder)
    assert abs(got.bracket - bracket) < 1e-12


def test_time_interpolation_zero_history():
    g = make_grid(16)
    part = build_partition(g)
    z = ScalarField.zeros(g)
    got = check_log_interpolation_time([0.0, 1.0], [z, z], 0.5, part)
    assert got.ratio == 0.0 and got.bracket == 1.0


def test_time_interpolation_heat_history_is_bounded():
    g = make_grid(64)
    part = build_partition(g)
    f = random_field(g, np.random.default_rng(12))
    times = np.linspace(0.0, 0.5, 6)
    fields = [ScalarField.from_spectrum(g, f.spectrum * np.exp(-g.k2 * t)) for t in times]
    got = check_log_interpolation_time(times, fields, 0.5, part)
    assert 0.0 < got.ratio < 1.0
    assert got.cutoff > 0.0


def test_time_interpolation_rejects_length_mismatch():
    g = make_grid(16)
    part = build_partition(g)
    f = cosine_mode(g, 1)
    with pytest.raises(ValueError):
        check_log_interpolation_time([0.0, 1.0], [f], 0.5, part)
