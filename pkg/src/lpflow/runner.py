"""Run orchestration: initial data, stepping loop, sampling, outputs.

Deterministic by construction: random initial data comes from named RNG
streams spawned off the config seed (stream 0 velocity, 1 stress,
2 magnetic, 3 forcing), sampling happens at absolute step numbers, and
every float is serialized via ``repr``, so identical configs produce
byte-identical outputs and a resumed run reproduces an uninterrupted one
bit for bit.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import checkpoint as ckpt
from .config import SimulationConfig
from .grid import SymTensorField, VectorField, make_grid
from .initial import (
    orszag_tang_magnetic,
    random_divergence_free,
    single_mode_force,
    stress_bump,
    taylor_green,
    taylor_green_hold_force,
)
from .lp import build_partition
from .mhd import MhdState, step_mhd
from .monitor import sample
from .oldroyd import OldroydParams, OldroydState, ns_forced_step, step
from .report import build_report, read_samples_csv, write_report_json, write_samples_csv
from .stepping import BlowupDetected, CflViolation, StepControls, check_cfl

RNG_STREAMS = {"velocity": 0, "stress": 1, "magnetic": 2, "forcing": 3}


def stream_rng(seed: int, stream: str) -> np.random.Generator:
    """Named, portable RNG stream: PCG64 seeded via a spawn key per field."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(RNG_STREAMS[stream],))
    )


@dataclass(frozen=True)
class RunOutcome:
    """What a run produced: exit status, explanation, and artifact paths."""

    status: int
    message: str
    samples_path: Path | None
    report_path: Path | None
    checkpoint_path: Path | None
    n_samples: int


def build_velocity(config: SimulationConfig, grid) -> VectorField:
    recipe = config.initial_velocity
    if recipe == "zero":
        return VectorField.zeros(grid)
    if recipe == "taylor-green":
        return taylor_green(grid, config.amplitude)
    return random_divergence_free(
        grid, stream_rng(config.seed, "velocity"), config.slope, config.amplitude
    )


def build_stress(config: SimulationConfig, grid) -> SymTensorField:
    recipe = config.initial_stress
    if recipe == "zero":
        return SymTensorField.zeros(grid)
    rng = stream_rng(config.seed, "stress") if recipe == "random-bump" else None
    return stress_bump(grid, config.epsilon, config.delta, rng)


def build_magnetic(config: SimulationConfig, grid) -> VectorField:
    recipe = config.initial_magnetic
    if recipe == "zero":
        return VectorField.zeros(grid)
    if recipe == "orszag-tang":
        return orszag_tang_magnetic(grid, config.magnetic_amplitude)
    return random_divergence_free(
        grid, stream_rng(config.seed, "magnetic"), config.slope, config.magnetic_amplitude
    )


def build_force(config: SimulationConfig, grid):
    if config.force == "none":
        return VectorField.zeros(grid)
    if config.force == "single-mode":
        return single_mode_force(grid, config.force_amplitude)
    hold = taylor_green_hold_force(grid, config.nu)
    return VectorField(
        hold.x * config.force_amplitude, hold.y * config.force_amplitude
    )


def build_state(config: SimulationConfig, grid):
    """Initial state for the configured system."""
    v = build_velocity(config, grid)
    if config.system == "mhd":
        return MhdState(v=v, H=build_magnetic(config, grid), nu=config.nu, t=0.0, step=0)
    params = OldroydParams(
        nu=config.nu, a=config.a, mu1=config.mu1, mu2=config.mu2, b=config.b
    )
    return OldroydState(v=v, tau=build_stress(config, grid), t=0.0, step=0, params=params)


def build_controls(config: SimulationConfig) -> StepControls:
    return StepControls(
        dt=config.dt,
        scheme=config.scheme,
        safety=config.safety,
        dealias_products=config.dealias,
        velocity_cap=config.velocity_cap,
    )


def make_metadata(config: SimulationConfig, qs) -> dict:
    return {
        "system": config.system,
        "n": config.n,
        "length": config.length,
        "alpha": config.alpha,
        "b": config.b,
        "nu": config.nu,
        "dt": config.dt,
        "cadence": config.cadence,
        "qs": list(qs),
        "planchon_deltas": list(config.planchon_deltas),
        "config": config.as_dict(),
    }


def _advance(state, controls: StepControls, config: SimulationConfig, force):
    if config.system == "mhd":
        return step_mhd(state, controls)
    if config.system == "ns-forced":
        return ns_forced_step(state, controls, force)
    return step(state, controls)


def _write_outputs(out_dir: Path, history, metadata, state, config) -> tuple:
    samples_path = write_samples_csv(out_dir / "samples.csv", history, metadata)
    report_path = write_report_json(
        out_dir / "report.json", build_report(history, metadata)
    )
    ckpt_path = ckpt.save(
        state, out_dir / "final.ckpt", config=config.as_dict(), system=config.system
    )
    return samples_path, report_path, ckpt_path


def run(config: SimulationConfig, output_dir) -> RunOutcome:
    """Advance the configured system to t_final, writing all artifacts.

    Status 0 on success, 2 when the very first step already violates the
    CFL bound (a configuration problem), 3 when the run dies mid-flight
    (blowup detection or a CFL violation after the flow has sharpened);
    partial outputs are written in the failure cases too.
    """
    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = make_grid(config.n, config.length)
    part = build_partition(grid)
    state = build_state(config, grid)
    controls = build_controls(config)
    force = build_force(config, grid) if config.system == "ns-forced" else None

    try:
        check_cfl(state.v, controls, 0.0)
    except CflViolation as exc:
        return RunOutcome(
            status=2,
            message=(
                f"config error: dt={exc.dt} violates the CFL bound {exc.limit:.6g} "
                "already at t=0; reduce dt or the initial amplitude"
            ),
            samples_path=None,
            report_path=None,
            checkpoint_path=None,
            n_samples=0,
        )

    metadata = make_metadata(config, part.qs)
    n_steps = round(config.t_final / config.dt)
    history = [sample(state, part, config.alpha)]
    status, message = 0, f"completed {n_steps} steps to t={n_steps * config.dt:.6g}"
    try:
        for _ in range(n_steps):
            state = _advance(state, controls, config, force)
            if config.checkpoint_interval and state.step % config.checkpoint_interval == 0:
                ckpt.save(
                    state,
                    out_dir / f"checkpoint_{state.step:08d}.ckpt",
                    config=config.as_dict(),
                    system=config.system,
                )
            if state.step % config.cadence == 0 or state.step == n_steps:
                history.append(sample(state, part, config.alpha))
    except BlowupDetected as exc:
        status, message = 3, f"blowup detected at t={exc.t:.6g} (step {exc.step}): {exc.reason}"
    except CflViolation as exc:
        status, message = 3, (
            f"CFL violation at t={exc.t:.6g}: dt={exc.dt} exceeds limit {exc.limit:.6g}"
        )

    samples_path, report_path, ckpt_path = _write_outputs(
        out_dir, history, metadata, state, config
    )
    return RunOutcome(
        status=status,
        message=message,
        samples_path=samples_path,
        report_path=report_path,
        checkpoint_path=ckpt_path,
        n_samples=len(history),
    )


def resume(checkpoint_path, until: float, output_dir=None) -> RunOutcome:
    """Continue a checkpointed run to t = until, splicing the sample CSV.

    Rows recorded after the checkpoint (or at an off-cadence final step of
    the interrupted run) are dropped before new samples are appended, so
    the result is bitwise identical to a run that never stopped.
    """
    checkpoint_path = Path(checkpoint_path)
    loaded = ckpt.load(checkpoint_path)
    from .config import ConfigError, from_mapping

    config = from_mapping(loaded.config)
    state = loaded.state
    if until <= state.t:
        raise ConfigError(
            f"--until {until} does not extend the run (checkpoint is at t={state.t})"
        )

    src_dir = checkpoint_path.parent
    out_dir = Path(output_dir) if output_dir is not None else src_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = src_dir / "samples.csv"
    metadata, old_history = read_samples_csv(csv_path)

    def recorded_step(s) -> int:
        return round(s.t / config.dt)

    history = [
        s
        for s in old_history
        if recorded_step(s) <= state.step
        and (recorded_step(s) % config.cadence == 0 or recorded_step(s) == 0)
    ]

    grid = make_grid(config.n, config.length)
    part = build_partition(grid)
    controls = build_controls(config)
    force = build_force(config, grid) if config.system == "ns-forced" else None
    n_steps = round(until / config.dt)
    status, message = 0, (
        f"resumed from step {state.step} and completed {n_steps - state.step} "
        f"steps to t={n_steps * config.dt:.6g}"
    )
    try:
        while state.step < n_steps:
            state = _advance(state, controls, config, force)
            if config.checkpoint_interval and state.step % config.checkpoint_interval == 0:
                ckpt.save(
                    state,
                    out_dir / f"checkpoint_{state.step:08d}.ckpt",
                    config=config.as_dict(),
                    system=config.system,
                )
            if state.step % config.cadence == 0 or state.step == n_steps:
                history.append(sample(state, part, config.alpha))
    except BlowupDetected as exc:
        status, message = 3, f"blowup detected at t={exc.t:.6g} (step {exc.step}): {exc.reason}"
    except CflViolation as exc:
        status, message = 3, (
            f"CFL violation at t={exc.t:.6g}: dt={exc.dt} exceeds limit {exc.limit:.6g}"
        )

    samples_path, report_path, ckpt_path = _write_outputs(
        out_dir, history, metadata, state, config
    )
    return RunOutcome(
        status=status,
        message=message,
        samples_path=samples_path,
        report_path=report_path,
        checkpoint_path=ckpt_path,
        n_samples=len(history),
    )
