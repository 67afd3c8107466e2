"""The 2D incompressible ideal-induction MHD system.

    dv/dt + v . grad v + grad p = nu lap v + div(H (x) H)
    dH/dt + v . grad H = H . grad v,      div v = div H = 0

where H (x) H is the outer product.  The induced tensor G = H (x) H obeys
the same upper-convected transport law as the viscoelastic stress with
b = 1 and no relaxation or strain source, so the stress stepper doubles as
an independent discretization of the tensor — ``evolve_with_tensor`` runs
both side by side and ``check_tensor_transport`` measures their agreement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import (
    Grid,
    ScalarField,
    SymTensorField,
    VectorField,
    dealias,
    lp_norm,
    leray_project,
    tensor_divergence,
    velocity_gradient,
)
from .oldroyd import OldroydParams, stress_transport_rhs
from .stepping import (
    BlowupDetected,
    StepControls,
    advect_scalar,
    check_cfl,
    heat_factor,
    heun_step,
    momentum_nonlinearity,
    require_finite,
)

__all__ = [
    "MhdState",
    "h_tensor",
    "rhs_mhd",
    "step_mhd",
    "mhd_energy",
    "evolve_with_tensor",
    "check_tensor_transport",
]

_TRANSPORT_PARAMS = OldroydParams(nu=0.0, a=0.0, mu1=0.0, mu2=0.0, b=1.0)


@dataclass(frozen=True)
class MhdState:
    """Immutable snapshot: velocity, magnetic field, viscosity, clock."""

    v: VectorField
    H: VectorField
    nu: float
    t: float
    step: int

    @property
    def grid(self) -> Grid:
        return self.v.grid


def h_tensor(H: VectorField) -> SymTensorField:
    """Pointwise outer product H (x) H as a symmetric tensor field."""
    g = H.grid
    hx, hy = H.x.values, H.y.values
    return SymTensorField(
        ScalarField.from_values(g, hx * hx),
        ScalarField.from_values(g, hx * hy),
        ScalarField.from_values(g, hy * hy),
    )


def _magnetic_tension(H: VectorField, dealias_products: bool = True) -> VectorField:
    tensor = h_tensor(H)
    if dealias_products:
        tensor = dealias(tensor)
    return tensor_divergence(tensor)


def _induction_rhs(
    v: VectorField, H: VectorField, dealias_products: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """Spectra of -v.grad H + H.grad v, component by component."""
    dx = (
        -advect_scalar(v, H.x, dealias_products).spectrum
        + advect_scalar(H, v.x, dealias_products).spectrum
    )
    dy = (
        -advect_scalar(v, H.y, dealias_products).spectrum
        + advect_scalar(H, v.y, dealias_products).spectrum
    )
    return dx, dy


def rhs_mhd(
    state: MhdState, dealias_products: bool = True
) -> tuple[VectorField, VectorField]:
    """Full right-hand sides (dv, dH) including the viscous term."""
    g = state.grid
    mom_x, mom_y = momentum_nonlinearity(
        state.v, _magnetic_tension(state.H, dealias_products), dealias_products
    )
    dv = VectorField(
        ScalarField.from_spectrum(g, mom_x - state.nu * g.k2 * state.v.x.spectrum),
        ScalarField.from_spectrum(g, mom_y - state.nu * g.k2 * state.v.y.spectrum),
        divergence_free=True,
    )
    hx, hy = _induction_rhs(state.v, state.H, dealias_products)
    dh = VectorField(
        ScalarField.from_spectrum(g, hx), ScalarField.from_spectrum(g, hy)
    )
    return dv, dh


def _project_both(grid: Grid, spectra):
    """Leray projection of the velocity and magnetic pairs of a stage."""
    out = []
    for base in (0, 2):
        pair = leray_project(
            VectorField(
                ScalarField.from_spectrum(grid, spectra[base]),
                ScalarField.from_spectrum(grid, spectra[base + 1]),
            )
        )
        out.extend((pair.x.spectrum, pair.y.spectrum))
    return tuple(out) + tuple(spectra[4:])


def _vector_pair(grid: Grid, sx, sy) -> VectorField:
    return VectorField(
        ScalarField.from_spectrum(grid, sx),
        ScalarField.from_spectrum(grid, sy),
        divergence_free=True,
    )


def step_mhd(state: MhdState, controls: StepControls) -> MhdState:
    """Advance one step; both fields re-projected at every stage."""
    check_cfl(state.v, controls, state.t)
    g = state.grid
    spectra = (
        state.v.x.spectrum,
        state.v.y.spectrum,
        state.H.x.spectrum,
        state.H.y.spectrum,
    )
    e_vel = (
        heat_factor(g, state.nu, controls.dt)
        if controls.scheme == "imex-rk2"
        else np.ones_like(g.k2)
    )
    factors = (e_vel, e_vel, 1.0, 1.0)

    def explicit_terms(stage, _time):
        v = _vector_pair(g, stage[0], stage[1])
        H = _vector_pair(g, stage[2], stage[3])
        if controls.nonlinear:
            mom_x, mom_y = momentum_nonlinearity(
                v, _magnetic_tension(H, controls.dealias_products), controls.dealias_products
            )
            ind_x, ind_y = _induction_rhs(v, H, controls.dealias_products)
        else:
            mom_x = mom_y = np.zeros_like(stage[0])
            ind_x = ind_y = np.zeros_like(stage[2])
        if controls.scheme == "explicit-rk2":
            mom_x = mom_x - state.nu * g.k2 * stage[0]
            mom_y = mom_y - state.nu * g.k2 * stage[1]
        return (mom_x, mom_y, ind_x, ind_y)

    out = heun_step(
        spectra,
        factors,
        explicit_terms,
        lambda s: _project_both(g, s),
        state.t,
        controls.dt,
    )
    t_next = state.t + controls.dt
    values = [g.inverse(s) for s in out]
    for arr, what in zip(values, ("velocity", "velocity", "magnetic", "magnetic")):
        require_finite(arr, what, t_next, state.step + 1, state)
    speed = float(np.max(np.hypot(values[0], values[1])))
    if speed > controls.velocity_cap:
        raise BlowupDetected(
            f"velocity sup norm {speed:.6g} exceeds cap {controls.velocity_cap:.6g}",
            t_next,
            state.step + 1,
            state,
        )
    return MhdState(
        v=VectorField(
            ScalarField.from_values(g, values[0]),
            ScalarField.from_values(g, values[1]),
            divergence_free=True,
        ),
        H=VectorField(
            ScalarField.from_values(g, values[2]),
            ScalarField.from_values(g, values[3]),
            divergence_free=True,
        ),
        nu=state.nu,
        t=t_next,
        step=state.step + 1,
    )


def mhd_energy(state: MhdState) -> tuple[float, float]:
    """Grid quadrature of (int |v|^2 + |H|^2 dx, int |grad v|^2 dx)."""
    g = state.grid
    vx, vy = state.v.x.values, state.v.y.values
    hx, hy = state.H.x.values, state.H.y.values
    energy = float(g.cell_area * np.sum(vx * vx + vy * vy + hx * hx + hy * hy))
    grad = velocity_gradient(state.v)
    dissipation = float(
        g.cell_area * sum(np.sum(c.values * c.values) for c in grad.components())
    )
    return energy, dissipation


def evolve_with_tensor(
    state: MhdState,
    tensor: SymTensorField,
    controls: StepControls,
    n_steps: int,
    sample_every: int = 1,
) -> tuple[list[MhdState], list[SymTensorField]]:
    """Co-evolve the MHD state and an independent tensor G from G(0).

    G follows the upper-convected transport law (the stress right-hand side
    with b = 1 and no relaxation or strain source) using the same stage
    velocities as the MHD step, so the two trajectories discretize the same
    identity G = H (x) H in different variables.
    """
    g = state.grid
    states = [state]
    tensors = [tensor]
    current, gt = state, tensor
    for _ in range(n_steps):
        check_cfl(current.v, controls, current.t)
        spectra = (
            current.v.x.spectrum,
            current.v.y.spectrum,
            current.H.x.spectrum,
            current.H.y.spectrum,
            gt.xx.spectrum,
            gt.xy.spectrum,
            gt.yy.spectrum,
        )
        e_vel = (
            heat_factor(g, current.nu, controls.dt)
            if controls.scheme == "imex-rk2"
            else np.ones_like(g.k2)
        )
        factors = (e_vel, e_vel, 1.0, 1.0, 1.0, 1.0, 1.0)

        def explicit_terms(stage, _time):
            v = _vector_pair(g, stage[0], stage[1])
            H = _vector_pair(g, stage[2], stage[3])
            tensor_stage = SymTensorField(
                ScalarField.from_spectrum(g, stage[4]),
                ScalarField.from_spectrum(g, stage[5]),
                ScalarField.from_spectrum(g, stage[6]),
            )
            mom_x, mom_y = momentum_nonlinearity(
                v, _magnetic_tension(H, controls.dealias_products), controls.dealias_products
            )
            ind_x, ind_y = _induction_rhs(v, H, controls.dealias_products)
            dg = stress_transport_rhs(
                v, tensor_stage, _TRANSPORT_PARAMS, controls.dealias_products
            )
            if controls.scheme == "explicit-rk2":
                mom_x = mom_x - current.nu * g.k2 * stage[0]
                mom_y = mom_y - current.nu * g.k2 * stage[1]
            return (mom_x, mom_y, ind_x, ind_y) + tuple(
                c.spectrum for c in dg.components()
            )

        out = heun_step(
            spectra,
            factors,
            explicit_terms,
            lambda s: _project_both(g, s),
            current.t,
            controls.dt,
        )
        t_next = current.t + controls.dt
        values = [g.inverse(s) for s in out]
        for arr in values:
            require_finite(arr, "field", t_next, current.step + 1, current)
        current = MhdState(
            v=VectorField(
                ScalarField.from_values(g, values[0]),
                ScalarField.from_values(g, values[1]),
                divergence_free=True,
            ),
            H=VectorField(
                ScalarField.from_values(g, values[2]),
                ScalarField.from_values(g, values[3]),
                divergence_free=True,
            ),
            nu=current.nu,
            t=t_next,
            step=current.step + 1,
        )
        gt = SymTensorField(
            ScalarField.from_values(g, values[4]),
            ScalarField.from_values(g, values[5]),
            ScalarField.from_values(g, values[6]),
        )
        if current.step % sample_every == 0:
            states.append(current)
            tensors.append(gt)
    if states[-1] is not current:
        states.append(current)
        tensors.append(gt)
    return states, tensors


def check_tensor_transport(
    states: list[MhdState], tensors: list[SymTensorField]
) -> float:
    """Sup over samples of || G - H (x) H ||_inf (pointwise operator norm)."""
    if len(states) != len(tensors):
        raise ValueError(
            f"history length mismatch: {len(states)} states vs {len(tensors)} tensors"
        )
    worst = 0.0
    for state, tensor in zip(states, tensors):
        outer = h_tensor(state.H)
        diff = SymTensorField(
            tensor.xx - outer.xx, tensor.xy - outer.xy, tensor.yy - outer.yy
        )
        worst = max(worst, lp_norm(diff, np.inf))
    return worst
