"""Shared time-stepping machinery for the transport systems.

One Heun (RK2) engine advances every system.  Diffusion is handled by an
exact integrating factor per spectral component: velocity components carry
``exp(-nu |xi|^2 dt)`` while undiffused components (stress, magnetic field)
carry the factor 1.  With the factor array set to ones and the diffusion
term folded into the explicit right-hand side, the same engine is the plain
explicit RK2 reference scheme.

The scheme, for components u with factor E and explicit terms N:

    u*      = E (u + dt N(u, t))
    u(t+dt) = E u + (dt/2) (E N(u, t) + N(u*, t+dt))

which reduces to the exact heat multiplier when N = 0 and to classical Heun
when E = 1.  Stages pass through a projection hook so divergence-free
constraints are re-imposed after every stage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import (
    Grid,
    ScalarField,
    VectorField,
    dealias,
    leray_project,
    lp_norm,
)

__all__ = [
    "StepControls",
    "BlowupDetected",
    "CflViolation",
    "heat_factor",
    "cfl_limit",
    "check_cfl",
    "heun_step",
    "advect_scalar",
    "momentum_nonlinearity",
    "require_finite",
]

_SCHEMES = ("imex-rk2", "explicit-rk2")


@dataclass(frozen=True)
class StepControls:
    """Time-step parameters shared by all systems.

    ``scheme`` selects the integrating-factor split (default) or the fully
    explicit RK2 reference.  ``safety`` scales the advective CFL limit.
    ``nonlinear = False`` drops every explicit term except diffusion — a
    hook for exercising the exact heat multiplier and Duhamel formulas.
    ``velocity_cap`` is the sup-norm threshold treated as blowup.
    """

    dt: float
    scheme: str = "imex-rk2"
    safety: float = 0.5
    dealias_products: bool = True
    nonlinear: bool = True
    velocity_cap: float = 1.0e4

    def __post_init__(self) -> None:
        if not (self.dt > 0.0 and np.isfinite(self.dt)):
            raise ValueError(f"dt must be positive and finite; got {self.dt}")
        if self.scheme not in _SCHEMES:
            raise ValueError(f"scheme must be one of {_SCHEMES}; got {self.scheme!r}")
        if not (0.0 < self.safety <= 1.0):
            raise ValueError(f"CFL safety factor must lie in (0, 1]; got {self.safety}")
        if not (self.velocity_cap > 0.0):
            raise ValueError(f"velocity cap must be positive; got {self.velocity_cap}")


class BlowupDetected(RuntimeError):
    """Raised when a step produces non-finite values or breaches the cap.

    Carries the last finite state so the criterion monitor can keep every
    sample up to the failure.
    """

    def __init__(self, reason: str, t: float, step: int, last_state=None):
        super().__init__(f"blowup detected at t = {t:.6g} (step {step}): {reason}")
        self.reason = reason
        self.t = t
        self.step = step
        self.last_state = last_state


class CflViolation(RuntimeError):
    """Raised when dt exceeds the advective CFL limit at a step entry."""

    def __init__(self, dt: float, limit: float, t: float):
        super().__init__(
            f"dt = {dt:.6g} exceeds the CFL limit {limit:.6g} at t = {t:.6g}"
        )
        self.dt = dt
        self.limit = limit
        self.t = t


def heat_factor(grid: Grid, nu: float, dt: float) -> np.ndarray:
    """Exact diffusion multiplier exp(-nu |xi|^2 dt) on the FFT layout."""
    return np.exp(grid.k2 * (-nu * dt))


def cfl_limit(v: VectorField, safety: float) -> float:
    """Advective limit safety * dx / max(1, ||v||_inf)."""
    vmax = lp_norm(v, np.inf)
    return safety * v.grid.dx / max(1.0, vmax)


def check_cfl(v: VectorField, controls: StepControls, t: float) -> None:
    limit = cfl_limit(v, controls.safety)
    if controls.dt > limit:
        raise CflViolation(controls.dt, limit, t)


def heun_step(spectra, factors, explicit_terms, project, t: float, dt: float):
    """One integrating-factor Heun step over a tuple of spectral components.

    ``explicit_terms(spectra, time)`` returns the explicit right-hand sides
    as spectra; ``project(spectra)`` re-imposes constraints on a stage.
    """
    n0 = explicit_terms(spectra, t)
    star = project(
        tuple(f * (s + dt * n) for s, f, n in zip(spectra, factors, n0))
    )
    n1 = explicit_terms(star, t + dt)
    return project(
        tuple(
            f * s + (0.5 * dt) * (f * n + m)
            for s, f, n, m in zip(spectra, factors, n0, n1)
        )
    )


def advect_scalar(v: VectorField, f: ScalarField, dealias_products: bool = True) -> ScalarField:
    """Transport term v . grad f with the product computed pseudospectrally."""
    g = f.grid
    fx = 1j * g.kx * f.spectrum
    fy = 1j * g.ky * f.spectrum
    values = v.x.values * g.inverse(fx) + v.y.values * g.inverse(fy)
    out = ScalarField.from_values(g, values)
    return dealias(out) if dealias_products else out


def momentum_nonlinearity(
    v: VectorField, force: VectorField | None, dealias_products: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """Projected explicit momentum terms P(-v . grad v + force) as spectra.

    ``force`` is any extra solenoidal-or-not vector source (stress
    divergence, magnetic tension, external forcing); the projection
    absorbs its gradient part exactly as it does the pressure's.
    """
    adv_x = advect_scalar(v, v.x, dealias_products)
    adv_y = advect_scalar(v, v.y, dealias_products)
    g = v.grid
    if force is None:
        fx = -adv_x.spectrum
        fy = -adv_y.spectrum
    else:
        fx = -adv_x.spectrum + force.x.spectrum
        fy = -adv_y.spectrum + force.y.spectrum
    projected = leray_project(VectorField(
        ScalarField.from_spectrum(g, fx), ScalarField.from_spectrum(g, fy)
    ))
    return projected.x.spectrum, projected.y.spectrum


def require_finite(values: np.ndarray, what: str, t: float, step: int, last_state) -> None:
    if not np.isfinite(values).all():
        raise BlowupDetected(f"non-finite {what}", t, step, last_state)
