"""The 2D incompressible viscoelastic (Oldroyd-B) system.

Unknowns are a divergence-free velocity v and a symmetric extra-stress tau
on the periodic square:

    dv/dt  + v . grad v + grad p = nu lap v + mu1 div tau
    dtau/dt + v . grad tau + a tau = Q(tau, grad v) + mu2 D(v)

with D the deformation tensor, W the vorticity tensor, and the objective
bilinear term Q = W tau - tau W + b (D tau + tau D).  Pressure is
eliminated by the Leray projection and recoverable as a diagnostic.  The
conformation tensor A = I + 2 tau stays positive definite under transport;
its pointwise minima are exposed for monitoring.

Setting ``b = 1`` and ``a = mu2 = 0`` turns the stress equation into the
pure upper-convected transport law, which is how the magnetic-tensor
consistency check reuses this module's right-hand side.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import (
    Grid,
    ScalarField,
    SymTensorField,
    Tensor2Field,
    VectorField,
    dealias,
    divergence,
    invert_laplacian,
    leray_project,
    tensor_divergence,
    velocity_gradient,
)
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
    "OldroydParams",
    "OldroydState",
    "ConformationDiagnostics",
    "deformation",
    "vorticity",
    "stress_bilinear",
    "stress_transport_rhs",
    "rhs_velocity",
    "rhs_stress",
    "step",
    "ns_forced_step",
    "energy_functional",
    "conformation_diagnostics",
    "recover_pressure",
]


@dataclass(frozen=True)
class OldroydParams:
    """Model coefficients; the default is the normalized case.

    nu: viscosity; a: reciprocal relaxation time; mu1: stress feedback on
    the momentum; mu2: strain forcing of the stress; b: slip parameter of
    the objective derivative.
    """

    nu: float = 1.0
    a: float = 0.0
    mu1: float = 1.0
    mu2: float = 1.0
    b: float = 1.0

    def __post_init__(self) -> None:
        for name in ("nu", "a", "mu1", "mu2"):
            value = getattr(self, name)
            if not (value >= 0.0 and np.isfinite(value)):
                raise ValueError(f"{name} must be >= 0; got {value}")
        if not (-1.0 <= self.b <= 1.0):
            raise ValueError(f"b must lie in [-1, 1]; got {self.b}")

    @property
    def normalized(self) -> bool:
        """True for the coefficient choice whose energy law is exact."""
        return (
            self.nu == 1.0
            and self.a == 0.0
            and self.mu1 == 1.0
            and self.mu2 == 1.0
            and self.b == 1.0
        )


@dataclass(frozen=True)
class OldroydState:
    """Immutable snapshot of one simulation instant."""

    v: VectorField
    tau: SymTensorField
    t: float
    step: int
    params: OldroydParams

    @property
    def grid(self) -> Grid:
        return self.v.grid


@dataclass(frozen=True)
class ConformationDiagnostics:
    """Pointwise minima of the conformation tensor A = I + 2 tau."""

    min_eigenvalue: float
    min_det: float
    positive_definite: bool
    det_above_one: bool


def deformation(v: VectorField) -> SymTensorField:
    """Symmetric part D = (grad v + (grad v)^t) / 2."""
    grad = velocity_gradient(v)
    g = v.grid
    return SymTensorField(
        grad.xx,
        ScalarField.from_spectrum(g, 0.5 * (grad.xy.spectrum + grad.yx.spectrum)),
        grad.yy,
    )


def vorticity(v: VectorField) -> ScalarField:
    """The xy entry of the antisymmetric part W = (grad v - (grad v)^t) / 2."""
    grad = velocity_gradient(v)
    return ScalarField.from_spectrum(
        v.grid, 0.5 * (grad.xy.spectrum - grad.yx.spectrum)
    )


def stress_bilinear(
    tau: SymTensorField, grad_v: Tensor2Field, b: float, dealias_products: bool = True
) -> SymTensorField:
    """Objective-derivative term Q = W tau - tau W + b (D tau + tau D).

    Expanded in components with tau = [[A, C], [C, B]], D = [[p, q], [q, r]]
    and W = [[0, w], [-w, 0]]:

        Q_xx = 2 w C + 2 b (p A + q C)
        Q_xy = w (B - A) + b (p C + q B + A q + C r)
        Q_yy = -2 w C + 2 b (q C + r B)

    Each entry is a pointwise product, so the result is dealiased.
    """
    g = tau.grid
    p = grad_v.xx.values
    q = 0.5 * (grad_v.xy.values + grad_v.yx.values)
    r = grad_v.yy.values
    w = 0.5 * (grad_v.xy.values - grad_v.yx.values)
    A, C, B = tau.xx.values, tau.xy.values, tau.yy.values
    q_xx = 2.0 * w * C + 2.0 * b * (p * A + q * C)
    q_xy = w * (B - A) + b * (p * C + q * B + A * q + C * r)
    q_yy = -2.0 * w * C + 2.0 * b * (q * C + r * B)
    out = SymTensorField(
        ScalarField.from_values(g, q_xx),
        ScalarField.from_values(g, q_xy),
        ScalarField.from_values(g, q_yy),
    )
    return dealias(out) if dealias_products else out


def stress_transport_rhs(
    v: VectorField,
    tau: SymTensorField,
    params: OldroydParams,
    dealias_products: bool = True,
) -> SymTensorField:
    """Explicit stress right-hand side -v.grad tau - a tau + Q + mu2 D."""
    g = tau.grid
    q_term = stress_bilinear(tau, velocity_gradient(v), params.b, dealias_products)
    d_term = deformation(v)
    out = []
    for comp, q_c, d_c in zip(tau.components(), q_term.components(), d_term.components()):
        adv = advect_scalar(v, comp, dealias_products)
        spec = (
            -adv.spectrum
            - params.a * comp.spectrum
            + q_c.spectrum
            + params.mu2 * d_c.spectrum
        )
        out.append(ScalarField.from_spectrum(g, spec))
    return SymTensorField(*out)


def _stress_force(tau: SymTensorField, mu1: float) -> VectorField:
    div = tensor_divergence(tau)
    g = tau.grid
    return VectorField(
        ScalarField.from_spectrum(g, mu1 * div.x.spectrum),
        ScalarField.from_spectrum(g, mu1 * div.y.spectrum),
    )


def rhs_velocity(state: OldroydState, dealias_products: bool = True) -> VectorField:
    """Full momentum right-hand side P(-v.grad v + mu1 div tau) + nu lap v."""
    params = state.params
    fx, fy = momentum_nonlinearity(
        state.v, _stress_force(state.tau, params.mu1), dealias_products
    )
    g = state.grid
    return VectorField(
        ScalarField.from_spectrum(g, fx - params.nu * g.k2 * state.v.x.spectrum),
        ScalarField.from_spectrum(g, fy - params.nu * g.k2 * state.v.y.spectrum),
        divergence_free=True,
    )


def rhs_stress(state: OldroydState, dealias_products: bool = True) -> SymTensorField:
    """Explicit stress right-hand side of the transport equation."""
    return stress_transport_rhs(state.v, state.tau, state.params, dealias_products)


def _unpack(grid: Grid, spectra) -> tuple[VectorField, SymTensorField]:
    v = VectorField(
        ScalarField.from_spectrum(grid, spectra[0]),
        ScalarField.from_spectrum(grid, spectra[1]),
        divergence_free=True,
    )
    tau = SymTensorField(
        ScalarField.from_spectrum(grid, spectra[2]),
        ScalarField.from_spectrum(grid, spectra[3]),
        ScalarField.from_spectrum(grid, spectra[4]),
    )
    return v, tau


def _project_velocity(grid: Grid, spectra):
    head = leray_project(
        VectorField(
            ScalarField.from_spectrum(grid, spectra[0]),
            ScalarField.from_spectrum(grid, spectra[1]),
        )
    )
    return (head.x.spectrum, head.y.spectrum) + tuple(spectra[2:])


def _velocity_factors(grid: Grid, nu: float, controls: StepControls) -> np.ndarray:
    if controls.scheme == "imex-rk2":
        return heat_factor(grid, nu, controls.dt)
    return np.ones_like(grid.k2)


def _explicit_diffusion(grid: Grid, nu: float, controls: StepControls, spec: np.ndarray):
    if controls.scheme == "imex-rk2":
        return 0.0
    return -nu * grid.k2 * spec


def step(state: OldroydState, controls: StepControls) -> OldroydState:
    """Advance one time step; raises CflViolation / BlowupDetected."""
    check_cfl(state.v, controls, state.t)
    g = state.grid
    params = state.params
    spectra = (
        state.v.x.spectrum,
        state.v.y.spectrum,
        state.tau.xx.spectrum,
        state.tau.xy.spectrum,
        state.tau.yy.spectrum,
    )
    e_vel = _velocity_factors(g, params.nu, controls)
    factors = (e_vel, e_vel, 1.0, 1.0, 1.0)

    def explicit_terms(stage, _time):
        v, tau = _unpack(g, stage)
        if controls.nonlinear:
            mom_x, mom_y = momentum_nonlinearity(
                v, _stress_force(tau, params.mu1), controls.dealias_products
            )
            dtau = stress_transport_rhs(v, tau, params, controls.dealias_products)
            tau_terms = tuple(c.spectrum for c in dtau.components())
        else:
            mom_x = mom_y = np.zeros_like(stage[0])
            tau_terms = tuple(np.zeros_like(s) for s in stage[2:])
        mom_x = mom_x + _explicit_diffusion(g, params.nu, controls, stage[0])
        mom_y = mom_y + _explicit_diffusion(g, params.nu, controls, stage[1])
        return (mom_x, mom_y) + tau_terms

    out = heun_step(
        spectra,
        factors,
        explicit_terms,
        lambda s: _project_velocity(g, s),
        state.t,
        controls.dt,
    )
    return _finish_step(state, out, controls)


def _finish_step(state, out_spectra, controls: StepControls):
    g = state.grid
    t_next = state.t + controls.dt
    values = [g.inverse(s) for s in out_spectra]
    for arr, what in zip(values, ("velocity", "velocity", "stress", "stress", "stress")):
        require_finite(arr, what, t_next, state.step + 1, state)
    speed = float(np.max(np.hypot(values[0], values[1])))
    if speed > controls.velocity_cap:
        raise BlowupDetected(
            f"velocity sup norm {speed:.6g} exceeds cap {controls.velocity_cap:.6g}",
            t_next,
            state.step + 1,
            state,
        )
    v = VectorField(
        ScalarField.from_values(g, values[0]),
        ScalarField.from_values(g, values[1]),
        divergence_free=True,
    )
    tau = SymTensorField(
        ScalarField.from_values(g, values[2]),
        ScalarField.from_values(g, values[3]),
        ScalarField.from_values(g, values[4]),
    )
    return OldroydState(v=v, tau=tau, t=t_next, step=state.step + 1, params=state.params)


def ns_forced_step(
    state: OldroydState,
    controls: StepControls,
    force: Callable[[float], VectorField] | VectorField,
) -> OldroydState:
    """Navier-Stokes sub-step with prescribed forcing in place of mu1 div tau.

    The stress field rides along unchanged; ``force`` is either a constant
    vector field or a callable of time evaluated at both Heun stages.
    """
    if isinstance(force, VectorField):
        constant = force
        force = lambda _t: constant  # noqa: E731 - tiny adapter
    check_cfl(state.v, controls, state.t)
    g = state.grid
    params = state.params
    spectra = (state.v.x.spectrum, state.v.y.spectrum)
    e_vel = _velocity_factors(g, params.nu, controls)
    factors = (e_vel, e_vel)

    def explicit_terms(stage, time):
        v = VectorField(
            ScalarField.from_spectrum(g, stage[0]),
            ScalarField.from_spectrum(g, stage[1]),
            divergence_free=True,
        )
        f_now = force(time)
        if controls.nonlinear:
            mom_x, mom_y = momentum_nonlinearity(v, f_now, controls.dealias_products)
        else:
            projected = leray_project(f_now)
            mom_x, mom_y = projected.x.spectrum, projected.y.spectrum
        mom_x = mom_x + _explicit_diffusion(g, params.nu, controls, stage[0])
        mom_y = mom_y + _explicit_diffusion(g, params.nu, controls, stage[1])
        return (mom_x, mom_y)

    out = heun_step(
        spectra,
        factors,
        explicit_terms,
        lambda s: _project_velocity(g, s),
        state.t,
        controls.dt,
    )
    t_next = state.t + controls.dt
    values = [g.inverse(s) for s in out]
    for arr in values:
        require_finite(arr, "velocity", t_next, state.step + 1, state)
    speed = float(np.max(np.hypot(values[0], values[1])))
    if speed > controls.velocity_cap:
        raise BlowupDetected(
            f"velocity sup norm {speed:.6g} exceeds cap {controls.velocity_cap:.6g}",
            t_next,
            state.step + 1,
            state,
        )
    v = VectorField(
        ScalarField.from_values(g, values[0]),
        ScalarField.from_values(g, values[1]),
        divergence_free=True,
    )
    return OldroydState(
        v=v, tau=state.tau, t=t_next, step=state.step + 1, params=state.params
    )


def energy_functional(state: OldroydState) -> tuple[float, float]:
    """Grid quadrature of (int |v|^2 + tr tau dx, int |grad v|^2 dx)."""
    g = state.grid
    vx, vy = state.v.x.values, state.v.y.values
    energy = float(g.cell_area * np.sum(vx * vx + vy * vy + state.tau.trace_values()))
    grad = velocity_gradient(state.v)
    dissipation = float(
        g.cell_area * sum(np.sum(c.values * c.values) for c in grad.components())
    )
    return energy, dissipation


def conformation_diagnostics(state: OldroydState) -> ConformationDiagnostics:
    """Pointwise eigen/det minima of A = I + 2 tau via the 2x2 closed form."""
    return conformation_of(state.tau)


def conformation_of(tau: SymTensorField) -> ConformationDiagnostics:
    """Eigen/det minima of A = I + 2 tau for any symmetric tensor field."""
    a_xx = 1.0 + 2.0 * tau.xx.values
    a_xy = 2.0 * tau.xy.values
    a_yy = 1.0 + 2.0 * tau.yy.values
    mean = 0.5 * (a_xx + a_yy)  # eigenvalues are mean +- radius
    radius = np.hypot(0.5 * (a_xx - a_yy), a_xy)
    min_eig = float(np.min(mean - radius))
    min_det = float(np.min(a_xx * a_yy - a_xy * a_xy))
    return ConformationDiagnostics(
        min_eigenvalue=min_eig,
        min_det=min_det,
        positive_definite=min_eig > 0.0,
        det_above_one=min_det > 1.0,
    )


def recover_pressure(state: OldroydState, dealias_products: bool = True) -> ScalarField:
    """Mean-zero diagnostic pressure solving -lap p = div(v.grad v - mu1 div tau)."""
    v = state.v
    adv = VectorField(
        advect_scalar(v, v.x, dealias_products), advect_scalar(v, v.y, dealias_products)
    )
    tension = _stress_force(state.tau, state.params.mu1)
    g = state.grid
    source = VectorField(
        ScalarField.from_spectrum(g, adv.x.spectrum - tension.x.spectrum),
        ScalarField.from_spectrum(g, adv.y.spectrum - tension.y.spectrum),
    )
    return invert_laplacian(divergence(source))
