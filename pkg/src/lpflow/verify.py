"""Self-verification suite: every module invariant on generated corpora.

Each check reports PASS/FAIL with the measured margin against its
documented tolerance.  Small grids (n = 16) additionally compare the fast
paths against the O(n^4) oracles: the naive DFT, the exhaustive BMO scan,
true spectral convolution, and the mode-by-mode Leray projection.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import reference
from .config import SimulationConfig
from .grid import (
    ScalarField,
    SymTensorField,
    VectorField,
    divergence,
    leray_project,
    lp_norm,
    make_grid,
)
from .initial import orszag_tang_magnetic, stress_bump, taylor_green
from .lp import (
    BlockSet,
    bernstein_window,
    bmo_norm,
    build_partition,
    check_bernstein,
    check_heat_decay,
    check_log_interpolation,
    decompose,
    heat_decay_bounds,
    partition_unity_error,
)
from .mhd import MhdState, check_tensor_transport, evolve_with_tensor, h_tensor, step_mhd, mhd_energy
from .monitor import chemin_lerner_norm, energy_law_residual, sample
from .oldroyd import (
    OldroydParams,
    OldroydState,
    conformation_diagnostics,
    rhs_velocity,
    step,
)
from .stepping import StepControls


@dataclass(frozen=True)
class CheckResult:
    """One verification check: measured value against its tolerance."""

    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


def format_line(r: CheckResult) -> str:
    mark = "PASS" if r.passed else "FAIL"
    extra = f"  ({r.detail})" if r.detail else ""
    return f"{mark}  {r.name:36s} measured={r.measured:.3e}  tol={r.tolerance:.3e}{extra}"


def _random_field(grid, rng, slope=1.5) -> ScalarField:
    spec = (
        rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n))
    )
    weight = np.where(grid.kmag > 0, (1.0 + grid.kmag) ** -slope, 0.0)
    f = ScalarField.from_spectrum(grid, spec * weight)
    return ScalarField.from_values(grid, f.values)


def _band_limited_field(grid, part, rng) -> ScalarField:
    """White noise strictly below the top block's lower edge.

    The dealias cut truncates the highest block's annulus, so only fields
    resolved below it exercise the two-sided Bernstein window; the top
    block of such fields is exactly zero and is skipped.
    """
    spec = (
        rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n))
    )
    scale = 2.0 * np.pi / grid.length
    edge = 0.75 * 2.0**part.q_max * scale
    spec = np.where(grid.kmag < edge, spec, 0.0)
    spec[0, 0] = 0.0
    return ScalarField.from_spectrum(grid, spec)


def run_checks(config: SimulationConfig) -> list[CheckResult]:
    """Run the whole invariant suite on the configured grid."""
    grid = make_grid(config.n, config.length)
    part = build_partition(grid)
    rng = np.random.default_rng(config.seed)
    checks = []

    # --- partition ---------------------------------------------------------
    err = partition_unity_error(part)
    checks.append(CheckResult("partition_unity", err <= 1e-12, err, 1e-12))

    worst = 0.0
    for _ in range(10):
        f = _random_field(grid, rng)
        blocks = decompose(f, part)
        rebuilt = BlockSet.reconstruct(blocks)
        rel = np.max(np.abs(rebuilt.values - f.values)) / max(
            np.max(np.abs(f.values)), 1e-300
        )
        worst = max(worst, rel)
    checks.append(CheckResult("block_reconstruction", worst <= 1e-10, worst, 1e-10))

    # --- Bernstein window on the resolved corpus ---------------------------
    lo, hi = bernstein_window(grid.length)
    ratios = []
    for _ in range(10):
        f = _band_limited_field(grid, part, rng)
        for q in range(part.q_min, part.q_max):
            ratios.append(check_bernstein(f, q, part).ratio)
    margin = min(min(ratios) - lo, hi - max(ratios))
    checks.append(
        CheckResult(
            "bernstein_window",
            margin >= 0.0,
            margin,
            0.0,
            detail=f"ratios in [{min(ratios):.4f}, {max(ratios):.4f}], window [{lo:.2f}, {hi:.2f}]",
        )
    )

    # --- heat decay brackets ------------------------------------------------
    slack = np.inf
    for _ in range(5):
        f = _random_field(grid, rng)
        for q in part.qs:
            for t in (0.01, 0.1, 1.0):
                ratio = check_heat_decay(f, q, t, part)
                lo_b, hi_b = heat_decay_bounds(q, t)
                slack = min(slack, ratio - lo_b, hi_b - ratio)
    checks.append(CheckResult("heat_decay_brackets", slack >= 0.0, slack, 0.0))

    # --- logarithmic interpolation corpus ----------------------------------
    max_ratio = 0.0
    for _ in range(20):
        f = _random_field(grid, rng)
        max_ratio = max(max_ratio, check_log_interpolation(f, config.beta, part).ratio)
    checks.append(
        CheckResult(
            "log_interpolation_corpus",
            max_ratio < 1.0,
            max_ratio,
            1.0,
            detail=f"beta={config.beta}",
        )
    )

    # --- BMO ----------------------------------------------------------------
    worst = -np.inf
    for _ in range(10):
        f = _random_field(grid, rng)
        bmo = bmo_norm(f)
        sup = 2.0 * lp_norm(f, np.inf)
        worst = max(worst, bmo - sup)
    checks.append(CheckResult("bmo_le_two_sup", worst <= 0.0, worst, 0.0))

    # --- Leray projection ---------------------------------------------------
    idem, div_rel = 0.0, 0.0
    for _ in range(10):
        u = VectorField(_random_field(grid, rng), _random_field(grid, rng))
        once = leray_project(u)
        twice = leray_project(once)
        scale = max(lp_norm(once, np.inf), 1e-300)
        idem = max(
            idem,
            max(
                np.max(np.abs(twice.x.values - once.x.values)),
                np.max(np.abs(twice.y.values - once.y.values)),
            )
            / scale,
        )
        div_rel = max(div_rel, lp_norm(divergence(once), np.inf) / scale)
    checks.append(CheckResult("leray_idempotent", idem <= 1e-12, idem, 1e-12))
    checks.append(CheckResult("leray_divergence_free", div_rel <= 1e-10, div_rel, 1e-10))

    # --- small-grid oracle comparisons --------------------------------------
    if grid.n == 16:
        checks.extend(_oracle_checks(grid, rng))

    # --- dynamics ------------------------------------------------------------
    checks.extend(_dynamics_checks(config, grid, part))
    return checks


def _oracle_checks(grid, rng) -> list[CheckResult]:
    checks = []
    worst = 0.0
    for _ in range(5):
        f = _random_field(grid, rng)
        naive = reference.naive_dft2(f.values)
        worst = max(worst, np.max(np.abs(naive - f.spectrum)))
    checks.append(CheckResult("oracle_naive_dft", worst <= 1e-12, worst, 1e-12))

    worst = 0.0
    for _ in range(20):
        f = _random_field(grid, rng)
        fast = bmo_norm(f)
        slow = reference.bmo_exhaustive(f.values)
        worst = max(worst, abs(fast - slow) / max(slow, 1e-300))
    checks.append(CheckResult("oracle_exhaustive_bmo", worst <= 1e-13, worst, 1e-13))

    spec_v = np.zeros((16, 16), complex)
    spec_v[0, 1] = spec_v[0, -1] = 0.5
    v = VectorField(ScalarField.from_spectrum(grid, spec_v), ScalarField.zeros(grid))
    spec_t = np.zeros((16, 16), complex)
    spec_t[1, 0] = spec_t[-1, 0] = 0.5
    tau = SymTensorField(
        ScalarField.from_spectrum(grid, spec_t), ScalarField.zeros(grid), ScalarField.zeros(grid)
    )
    params = OldroydParams(nu=0.7, mu1=0.9)
    state = OldroydState(v=v, tau=tau, t=0.0, step=0, params=params)
    got = rhs_velocity(state)
    mask = grid.dealias_mask
    kx, ky = 1j * grid.kx, 1j * grid.ky
    adv_x = reference.convolve_then_mask(
        v.x.spectrum, kx * v.x.spectrum, mask
    ) + reference.convolve_then_mask(v.y.spectrum, ky * v.x.spectrum, mask)
    adv_y = reference.convolve_then_mask(
        v.x.spectrum, kx * v.y.spectrum, mask
    ) + reference.convolve_then_mask(v.y.spectrum, ky * v.y.spectrum, mask)
    fx = -adv_x + params.mu1 * (kx * tau.xx.spectrum + ky * tau.xy.spectrum)
    fy = -adv_y + params.mu1 * (kx * tau.xy.spectrum + ky * tau.yy.spectrum)
    px, py = reference.leray_project_modewise(fx, fy, grid.length)
    gap = max(
        np.max(np.abs(got.x.spectrum - (px - params.nu * grid.k2 * v.x.spectrum))),
        np.max(np.abs(got.y.spectrum - (py - params.nu * grid.k2 * v.y.spectrum))),
    )
    checks.append(CheckResult("oracle_spectral_convolution", gap <= 1e-13, gap, 1e-13))

    worst = 0.0
    for _ in range(5):
        u = VectorField(_random_field(grid, rng), _random_field(grid, rng))
        fast = leray_project(u)
        px, py = reference.leray_project_modewise(u.x.spectrum, u.y.spectrum, grid.length)
        worst = max(
            worst,
            np.max(np.abs(fast.x.spectrum - px)),
            np.max(np.abs(fast.y.spectrum - py)),
        )
    checks.append(CheckResult("oracle_modewise_leray", worst <= 1e-12, worst, 1e-12))
    return checks


def _dynamics_checks(config: SimulationConfig, grid, part) -> list[CheckResult]:
    checks = []
    dt, horizon = 1e-3, 0.1
    n_steps = round(horizon / dt)

    # Navier-Stokes limit against the exact Taylor-Green decay
    state = OldroydState(
        v=taylor_green(grid),
        tau=SymTensorField.zeros(grid),
        t=0.0,
        step=0,
        params=OldroydParams(mu1=0.0, mu2=0.0),
    )
    ctl = StepControls(dt=dt)
    for _ in range(n_steps):
        state = step(state, ctl)
    decay = math.exp(-2.0 * state.t)
    exact = taylor_green(grid, decay)
    err = max(
        np.max(np.abs(state.v.x.values - exact.x.values)),
        np.max(np.abs(state.v.y.values - exact.y.values)),
    )
    checks.append(CheckResult("taylor_green_decay", err <= 1e-6, err, 1e-6))

    # coupled run: energy balance, solenoidality, conformation floor
    params = OldroydParams()
    state = OldroydState(
        v=taylor_green(grid, 0.5), tau=stress_bump(grid), t=0.0, step=0, params=params
    )
    history = [sample(state, part, config.alpha)]
    min_det = history[0].conf_min_det
    for _ in range(n_steps):
        state = step(state, ctl)
        history.append(sample(state, part, config.alpha))
        min_det = min(min_det, conformation_diagnostics(state).min_det)
    residual = energy_law_residual(history, params)
    checks.append(CheckResult("energy_law_residual", residual <= 1e-3, residual, 1e-3))
    div_rel = lp_norm(divergence(state.v), np.inf) / lp_norm(state.v, np.inf)
    checks.append(CheckResult("velocity_solenoidal", div_rel <= 1e-10, div_rel, 1e-10))
    checks.append(
        CheckResult("conformation_det_floor", min_det >= 1.0 - 1e-3, min_det, 1.0 - 1e-3)
    )

    # Chemin-Lerner norm of an exactly heat-decaying mode vs the closed form
    k2 = (2.0 * np.pi / grid.length) ** 2 * 4.0  # mode (2, 0)
    spec = np.zeros((grid.n, grid.n), complex)
    spec[2, 0] = spec[-2, 0] = 0.35
    times = np.arange(0.0, 0.3 + 1e-12, 1e-3)
    heat_history = []
    for t in times:
        vt = VectorField(
            ScalarField.zeros(grid),
            ScalarField.from_spectrum(grid, spec * math.exp(-k2 * t)),
            divergence_free=True,
        )
        st = OldroydState(
            v=vt, tau=SymTensorField.zeros(grid), t=float(t), step=0, params=params
        )
        heat_history.append(sample(st, part, config.alpha))
    # a single mode decays uniformly, so every per-block integral has the
    # same closed form and the sup picks the largest initial block weight
    measured = chemin_lerner_norm(heat_history)
    d0 = max(heat_history[0].dq_v)
    closed = (1.0 - math.exp(-k2 * times[-1])) * d0 / k2
    rel = abs(measured - closed) / closed
    checks.append(CheckResult("chemin_lerner_closed_form", rel <= 1e-4, rel, 1e-4))

    # MHD: tensor transport identity and the energy balance.  The identity
    # G = H (x) H needs the quadratic products of H resolved; below n = 32
    # the truncation tail, not the time step, dominates the deviation, so
    # the check enforces its own resolution floor.
    tgrid = grid if grid.n >= 32 else make_grid(32, grid.length)
    h0 = orszag_tang_magnetic(tgrid, 0.5)
    mstate = MhdState(v=taylor_green(tgrid, 0.5), H=h0, nu=1.0, t=0.0, step=0)
    states, tensors = evolve_with_tensor(
        mstate, h_tensor(h0), ctl, 50, sample_every=25
    )
    deviation = check_tensor_transport(states, tensors)
    checks.append(CheckResult("tensor_transport", deviation <= 1e-5, deviation, 1e-5))
    h0 = orszag_tang_magnetic(grid, 0.5)

    mstate = MhdState(v=taylor_green(grid, 0.5), H=h0, nu=1.0, t=0.0, step=0)
    ts, es, ds = [0.0], [], []
    e0, d0 = mhd_energy(mstate)
    es.append(e0)
    ds.append(d0)
    for _ in range(n_steps):
        mstate = step_mhd(mstate, ctl)
        e, d = mhd_energy(mstate)
        ts.append(mstate.t)
        es.append(e)
        ds.append(d)
    ts, es, ds = map(np.asarray, (ts, es, ds))
    dissipated = float(np.sum(0.5 * np.diff(ts) * (ds[1:] + ds[:-1])))
    residual = abs(es[-1] + 2.0 * dissipated - es[0]) / es[0]
    checks.append(CheckResult("mhd_energy_balance", residual <= 1e-3, residual, 1e-3))

    return checks
