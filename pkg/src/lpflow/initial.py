"""Initial-data and forcing recipes.

Velocity recipes produce exactly divergence-free fields (Taylor-Green
analytically, random data through a stream function); stress recipes are
validated at construction against the conformation-tensor hypothesis
det(I + 2 tau) > 1.2 pointwise.  Random recipes draw from caller-supplied
generators so the runner can assign one independent, documented stream per
field.
"""

from __future__ import annotations

import numpy as np

from .grid import (
    Grid,
    ScalarField,
    SymTensorField,
    VectorField,
    dealias,
    gradient,
    lp_norm,
)

__all__ = [
    "taylor_green",
    "random_divergence_free",
    "stress_bump",
    "orszag_tang_magnetic",
    "single_mode_force",
    "taylor_green_hold_force",
]


def _fundamental(grid: Grid) -> float:
    return 2.0 * np.pi / grid.length


def taylor_green(grid: Grid, amplitude: float = 1.0) -> VectorField:
    """The classical cellular flow A (sin x cos y, -cos x sin y).

    On a torus of general size the phases carry the fundamental frequency,
    so the field always occupies the four lowest diagonal modes.
    """
    k = _fundamental(grid)
    x, y = k * grid.x, k * grid.y
    return VectorField(
        ScalarField.from_values(grid, amplitude * np.sin(x) * np.cos(y)),
        ScalarField.from_values(grid, -amplitude * np.cos(x) * np.sin(y)),
        divergence_free=True,
    )


def random_divergence_free(
    grid: Grid,
    rng: np.random.Generator,
    slope: float = 2.0,
    amplitude: float = 1.0,
    cutoff: int | None = None,
) -> VectorField:
    """Random solenoidal field via a stream function with power-law spectrum.

    The stream function gets |xi|^-(slope+1) weights so the velocity
    spectrum falls off like |xi|^-slope; ``cutoff`` limits the integer
    frequency band (default: half the dealias band, keeping products of the
    data fully resolved).  The field is rescaled to the requested sup norm.
    """
    if cutoff is None:
        cutoff = max(2, grid.dealias_cutoff // 2)
    noise = ScalarField.from_values(grid, rng.standard_normal((grid.n, grid.n)))
    radial = np.hypot(grid.freq_x, grid.freq_y)
    with np.errstate(divide="ignore"):
        weight = np.where(
            (radial > 0) & (radial <= cutoff), grid.kmag ** -(slope + 1.0), 0.0
        )
    psi = ScalarField.from_spectrum(grid, noise.spectrum * weight)
    grad = gradient(psi)
    v = VectorField(
        ScalarField.from_spectrum(grid, -grad.y.spectrum),
        ScalarField.from_spectrum(grid, grad.x.spectrum),
        divergence_free=True,
    )
    scale = lp_norm(v, np.inf)
    if scale == 0.0:
        raise ValueError("stream-function draw collapsed to zero")
    factor = amplitude / scale
    # rescale in spectral space so the band limit stays exactly sharp
    return VectorField(
        ScalarField.from_spectrum(grid, factor * v.x.spectrum),
        ScalarField.from_spectrum(grid, factor * v.y.spectrum),
        divergence_free=True,
    )


def stress_bump(
    grid: Grid,
    epsilon: float = 0.15,
    delta: float = 0.02,
    rng: np.random.Generator | None = None,
) -> SymTensorField:
    """Positive bump times identity plus a small symmetric perturbation.

    tau0 = epsilon * (1 + cos x cos y / 2) * I + delta * P with P either a
    fixed band-limited symmetric pattern or, when ``rng`` is given, random
    dealiased components of unit sup norm.  Raises unless the conformation
    hypothesis det(I + 2 tau0) > 1.2 holds at every grid point.
    """
    k = _fundamental(grid)
    x, y = k * grid.x, k * grid.y
    bump = epsilon * (1.0 + 0.5 * np.cos(x) * np.cos(y))
    if rng is None:
        p_xx = np.cos(x) + 0.0 * y
        p_xy = 0.5 * np.sin(x + y)
        p_yy = -np.cos(y) + 0.0 * x
    else:
        comps = []
        for _ in range(3):
            f = dealias(ScalarField.from_values(grid, rng.standard_normal((grid.n, grid.n))))
            comps.append(f.values / np.max(np.abs(f.values)))
        p_xx, p_xy, p_yy = comps
    tau = SymTensorField(
        ScalarField.from_values(grid, bump + delta * p_xx),
        ScalarField.from_values(grid, delta * p_xy),
        ScalarField.from_values(grid, bump + delta * p_yy),
    )
    det = (1.0 + 2.0 * tau.xx.values) * (1.0 + 2.0 * tau.yy.values) - (
        2.0 * tau.xy.values
    ) ** 2
    worst = float(np.min(det))
    if worst <= 1.2:
        raise ValueError(
            f"stress recipe violates det(I + 2 tau) > 1.2 (min {worst:.4g}); "
            "reduce delta or increase epsilon"
        )
    return tau


def orszag_tang_magnetic(grid: Grid, amplitude: float = 1.0) -> VectorField:
    """The Orszag-Tang magnetic profile beta (-sin y, sin 2x), solenoidal."""
    k = _fundamental(grid)
    x, y = k * grid.x, k * grid.y
    return VectorField(
        ScalarField.from_values(grid, -amplitude * np.sin(y) + 0.0 * x),
        ScalarField.from_values(grid, amplitude * np.sin(2.0 * x) + 0.0 * y),
        divergence_free=True,
    )


def single_mode_force(grid: Grid, amplitude: float = 1.0) -> VectorField:
    """Constant-in-time solenoidal single-mode force amplitude (sin y, 0)."""
    k = _fundamental(grid)
    return VectorField(
        ScalarField.from_values(grid, amplitude * np.sin(k * grid.y) + 0.0 * grid.x),
        ScalarField.zeros(grid),
        divergence_free=True,
    )


def taylor_green_hold_force(grid: Grid, nu: float, amplitude: float = 1.0) -> VectorField:
    """Force -nu lap v_TG = 2 nu (2 pi / L)^2 v_TG that holds the cell steady."""
    k = _fundamental(grid)
    base = taylor_green(grid, amplitude)
    factor = 2.0 * nu * k * k
    return VectorField(
        ScalarField.from_values(grid, factor * base.x.values),
        ScalarField.from_values(grid, factor * base.y.values),
        divergence_free=True,
    )
