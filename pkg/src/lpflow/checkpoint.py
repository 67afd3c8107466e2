"""Byte-exact run checkpoints: one JSON header line plus raw float64 planes.

The header records the system, grid, parameters, clock, field list, and a
full echo of the run configuration, so a resumed run needs nothing but the
checkpoint file.  Field planes are stored row-major as little-endian
float64, making the save/load round trip bitwise exact.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import ScalarField, SymTensorField, VectorField, make_grid
from .mhd import MhdState
from .oldroyd import OldroydParams, OldroydState

FORMAT = "lpflow-checkpoint"
VERSION = 1

FIELDS = {
    "oldroyd": ("v_x", "v_y", "tau_xx", "tau_xy", "tau_yy"),
    "ns-forced": ("v_x", "v_y", "tau_xx", "tau_xy", "tau_yy"),
    "mhd": ("v_x", "v_y", "H_x", "H_y"),
}


class CheckpointError(Exception):
    """Unreadable or inconsistent checkpoint file."""


@dataclass(frozen=True)
class Checkpoint:
    """A loaded checkpoint: the state plus the run configuration echo."""

    state: object
    system: str
    config: dict


def _planes(state) -> tuple:
    if isinstance(state, OldroydState):
        return (
            state.v.x.values,
            state.v.y.values,
            state.tau.xx.values,
            state.tau.xy.values,
            state.tau.yy.values,
        )
    if isinstance(state, MhdState):
        return (state.v.x.values, state.v.y.values, state.H.x.values, state.H.y.values)
    raise TypeError(f"cannot checkpoint {type(state).__name__}")


def save(state, path, config: dict | None = None, system: str | None = None) -> Path:
    """Write the state to ``path``; returns the path written."""
    if system is None:
        system = "mhd" if isinstance(state, MhdState) else "oldroyd"
    if system not in FIELDS:
        raise ValueError(f"unknown system {system!r}")
    g = state.grid
    if isinstance(state, OldroydState):
        p = state.params
        params = {"nu": p.nu, "a": p.a, "mu1": p.mu1, "mu2": p.mu2, "b": p.b}
    else:
        params = {"nu": state.nu}
    header = {
        "format": FORMAT,
        "version": VERSION,
        "system": system,
        "n": g.n,
        "length": g.length,
        "params": params,
        "t": state.t,
        "step": state.step,
        "fields": list(FIELDS[system]),
        "config": config or {},
    }
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8"))
        fh.write(b"\n")
        for plane in _planes(state):
            fh.write(np.ascontiguousarray(plane, dtype="<f8").tobytes())
    return path


def load(path) -> Checkpoint:
    """Read a checkpoint; raises CheckpointError on any inconsistency."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint: {exc}") from exc
    newline = raw.find(b"\n")
    if newline < 0:
        raise CheckpointError("corrupt header: no header line found")
    try:
        header = json.loads(raw[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt header: {exc}") from exc
    if not isinstance(header, dict) or header.get("format") != FORMAT:
        raise CheckpointError("corrupt header: not a checkpoint file")
    if header.get("version") != VERSION:
        raise CheckpointError(
            f"version mismatch: file has {header.get('version')}, expected {VERSION}"
        )
    try:
        system = header["system"]
        n = header["n"]
        length = header["length"]
        params = header["params"]
        t = header["t"]
        step = header["step"]
        fields = tuple(header["fields"])
    except KeyError as exc:
        raise CheckpointError(f"corrupt header: missing key {exc}") from exc
    if system not in FIELDS:
        raise CheckpointError(f"corrupt header: unknown system {system!r}")
    if fields != FIELDS[system]:
        raise CheckpointError(
            f"field list mismatch: expected {FIELDS[system]}, found {fields}"
        )
    payload = raw[newline + 1 :]
    expected = len(fields) * n * n * 8
    if len(payload) != expected:
        raise CheckpointError(
            f"truncated payload: expected {expected} bytes, found {len(payload)}"
        )
    grid = make_grid(n, length)
    planes = [
        ScalarField.from_values(
            grid,
            np.frombuffer(payload, dtype="<f8", count=n * n, offset=i * n * n * 8)
            .reshape(n, n)
            .copy(),
        )
        for i in range(len(fields))
    ]
    v = VectorField(planes[0], planes[1], divergence_free=True)
    if system == "mhd":
        state = MhdState(
            v=v,
            H=VectorField(planes[2], planes[3], divergence_free=True),
            nu=params["nu"],
            t=t,
            step=step,
        )
    else:
        state = OldroydState(
            v=v,
            tau=SymTensorField(planes[2], planes[3], planes[4]),
            t=t,
            step=step,
            params=OldroydParams(**params),
        )
    return Checkpoint(state=state, system=system, config=dict(header["config"]))
