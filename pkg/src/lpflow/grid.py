"""Periodic grid, field containers, and spectral operators.

Everything lives on a uniform n x n grid over [0, L)^2 with FFT-based
derivatives.  Spectral coefficients use the normalization

    f_hat(k) = (1/n^2) * sum_j f(x_j) exp(-i k . x_j)

so that ``cos(x)`` on L = 2*pi has coefficients of modulus 1/2 at k = (+-1, 0)
and Parseval reads ``mean(|f|^2) == sum(|f_hat|^2)``.  Physical wavenumbers
carry the 2*pi/L scale (``xi = (2*pi/L) * k_int``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "ScalarField",
    "VectorField",
    "SymTensorField",
    "Tensor2Field",
    "make_grid",
    "to_spectral",
    "to_real",
    "gradient",
    "divergence",
    "tensor_divergence",
    "velocity_gradient",
    "laplacian",
    "invert_laplacian",
    "leray_project",
    "dealias",
    "lp_norm",
    "l2_inner",
]

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [0, length)^2.

    Parameters
    ----------
    n : int
        Points per direction; must be a power of two >= 16.
    length : float
        Torus edge length L.

    Notes
    -----
    Derived arrays are attached in ``__post_init__``:

    - ``x``, ``y`` : sample coordinates, shapes (n, 1) and (1, n).
    - ``kx``, ``ky`` : radian wavenumbers (2*pi/L scaled), same shapes.
    - ``k2``, ``kmag`` : |xi|^2 and |xi| on the full (n, n) layout.
    - ``dealias_mask`` : boolean 2/3-rule mask keeping integer modes with
      ``|k_int| <= n // 3`` in each direction.
    """

    n: int
    length: float = _TWO_PI

    def __post_init__(self):
        n, L = self.n, self.length
        if not isinstance(n, int) or n < 16 or (n & (n - 1)) != 0:
            raise ValueError(f"grid size n={n} must be a power of two >= 16")
        if not np.isfinite(L) or L <= 0:
            raise ValueError(f"domain length must be positive, got {L}")
        h = L / n
        freq = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)  # integer modes
        scale = _TWO_PI / L
        object.__setattr__(self, "dx", h)
        object.__setattr__(self, "cell_area", h * h)
        object.__setattr__(self, "x", (h * np.arange(n)).reshape(n, 1))
        object.__setattr__(self, "y", (h * np.arange(n)).reshape(1, n))
        object.__setattr__(self, "freq_x", freq.reshape(n, 1))
        object.__setattr__(self, "freq_y", freq.reshape(1, n))
        object.__setattr__(self, "kx", scale * freq.reshape(n, 1).astype(float))
        object.__setattr__(self, "ky", scale * freq.reshape(1, n).astype(float))
        k2 = self.kx**2 + self.ky**2
        object.__setattr__(self, "k2", k2)
        object.__setattr__(self, "kmag", np.sqrt(k2))
        kcut = n // 3
        mask = (np.abs(freq.reshape(n, 1)) <= kcut) & (np.abs(freq.reshape(1, n)) <= kcut)
        object.__setattr__(self, "dealias_mask", mask)
        object.__setattr__(self, "dealias_cutoff", kcut)

    # FFT normalization lives here so every caller agrees on it.
    def forward(self, values: np.ndarray) -> np.ndarray:
        return np.fft.fft2(values) / (self.n * self.n)

    def inverse(self, spectrum: np.ndarray) -> np.ndarray:
        return (np.fft.ifft2(spectrum) * (self.n * self.n)).real


def make_grid(n: int, length: float = _TWO_PI) -> Grid:
    """Validate and build a :class:`Grid`."""
    return Grid(n=n, length=float(length))


def _check_same_grid(a, b) -> None:
    if a.grid is not b.grid and (a.grid.n != b.grid.n or a.grid.length != b.grid.length):
        raise ValueError("fields live on different grids")


class ScalarField:
    """Real scalar field with a lazily cached spectral representation.

    Construct with exactly one of ``values`` (real samples, row-major with x
    along axis 0) or ``spectrum`` (normalized coefficients in numpy FFT
    layout); the missing representation is computed on demand and cached.
    """

    __slots__ = ("grid", "_values", "_spectrum")

    def __init__(self, grid: Grid, values=None, spectrum=None):
        if (values is None) == (spectrum is None):
            raise ValueError("provide exactly one of values/spectrum")
        self.grid = grid
        self._values = values
        self._spectrum = spectrum

    @classmethod
    def from_values(cls, grid: Grid, values) -> "ScalarField":
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != (grid.n, grid.n):
            raise ValueError(f"expected shape {(grid.n, grid.n)}, got {arr.shape}")
        return cls(grid, values=arr)

    @classmethod
    def from_spectrum(cls, grid: Grid, spectrum) -> "ScalarField":
        arr = np.asarray(spectrum, dtype=np.complex128)
        if arr.shape != (grid.n, grid.n):
            raise ValueError(f"expected shape {(grid.n, grid.n)}, got {arr.shape}")
        return cls(grid, spectrum=arr)

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, values=np.zeros((grid.n, grid.n)))

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = self.grid.inverse(self._spectrum)
        return self._values

    @property
    def spectrum(self) -> np.ndarray:
        if self._spectrum is None:
            self._spectrum = self.grid.forward(self._values)
        return self._spectrum

    @property
    def representation(self) -> str:
        if self._values is not None and self._spectrum is not None:
            return "both"
        return "real" if self._values is not None else "spectral"

    def __add__(self, other: "ScalarField") -> "ScalarField":
        _check_same_grid(self, other)
        return ScalarField.from_values(self.grid, self.values + other.values)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        _check_same_grid(self, other)
        return ScalarField.from_values(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "ScalarField":
        return ScalarField.from_values(self.grid, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class VectorField:
    """Pair of scalar components (x, y); ``divergence_free`` marks projected fields."""

    x: ScalarField
    y: ScalarField
    divergence_free: bool = False

    @property
    def grid(self) -> Grid:
        return self.x.grid

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(ScalarField.zeros(grid), ScalarField.zeros(grid), divergence_free=True)

    def components(self):
        return (self.x, self.y)

    def magnitude_values(self) -> np.ndarray:
        return np.hypot(self.x.values, self.y.values)


@dataclass(frozen=True)
class SymTensorField:
    """Symmetric 2x2 tensor field stored as the (xx, xy, yy) components."""

    xx: ScalarField
    xy: ScalarField
    yy: ScalarField

    @property
    def grid(self) -> Grid:
        return self.xx.grid

    @classmethod
    def zeros(cls, grid: Grid) -> "SymTensorField":
        z = ScalarField.zeros(grid)
        return cls(z, z, z)

    def components(self):
        return (self.xx, self.xy, self.yy)

    def trace_values(self) -> np.ndarray:
        return self.xx.values + self.yy.values

    def operator_norm_values(self) -> np.ndarray:
        # symmetric 2x2: eigenvalues m +- r, operator norm |m| + r
        m = 0.5 * (self.xx.values + self.yy.values)
        r = np.hypot(0.5 * (self.xx.values - self.yy.values), self.xy.values)
        return np.abs(m) + r

    def frobenius_values(self) -> np.ndarray:
        return np.sqrt(self.xx.values**2 + 2.0 * self.xy.values**2 + self.yy.values**2)


@dataclass(frozen=True)
class Tensor2Field:
    """Full 2x2 tensor field; entry (i, j) holds d_j v_i (Jacobian layout)."""

    xx: ScalarField
    xy: ScalarField
    yx: ScalarField
    yy: ScalarField

    @property
    def grid(self) -> Grid:
        return self.xx.grid

    def components(self):
        return (self.xx, self.xy, self.yx, self.yy)

    def operator_norm_values(self) -> np.ndarray:
        # largest singular value of a 2x2: sigma^2 = (a + sqrt(a^2-4det^2))/2
        # with a the squared Frobenius norm
        a = sum(c.values**2 for c in self.components())
        det = self.xx.values * self.yy.values - self.xy.values * self.yx.values
        gap = np.sqrt(np.maximum(a * a - 4.0 * det * det, 0.0))
        return np.sqrt(0.5 * (a + gap))

    def frobenius_values(self) -> np.ndarray:
        return np.sqrt(sum(c.values**2 for c in self.components()))


def to_spectral(f: ScalarField) -> ScalarField:
    """Return ``f`` with the spectrum computed; rejects non-finite samples."""
    if f._spectrum is None:
        if not np.isfinite(f.values).all():
            raise ValueError("cannot transform a field with non-finite samples")
        f.spectrum  # computes and caches
    return f


def to_real(f: ScalarField) -> ScalarField:
    """Return ``f`` with real samples computed."""
    f.values
    return f


def _deriv_x(f: ScalarField) -> ScalarField:
    return ScalarField.from_spectrum(f.grid, 1j * f.grid.kx * f.spectrum)


def _deriv_y(f: ScalarField) -> ScalarField:
    return ScalarField.from_spectrum(f.grid, 1j * f.grid.ky * f.spectrum)


def gradient(f: ScalarField) -> VectorField:
    """Spectral gradient (multiplier i*xi)."""
    return VectorField(_deriv_x(f), _deriv_y(f))


def divergence(u: VectorField) -> ScalarField:
    g = u.grid
    spec = 1j * g.kx * u.x.spectrum + 1j * g.ky * u.y.spectrum
    return ScalarField.from_spectrum(g, spec)


def tensor_divergence(t: SymTensorField) -> VectorField:
    """Row-wise divergence (div T)_i = d_j T_ij of a symmetric tensor."""
    g = t.grid
    dx = ScalarField.from_spectrum(
        g, 1j * g.kx * t.xx.spectrum + 1j * g.ky * t.xy.spectrum
    )
    dy = ScalarField.from_spectrum(
        g, 1j * g.kx * t.xy.spectrum + 1j * g.ky * t.yy.spectrum
    )
    return VectorField(dx, dy)


def velocity_gradient(v: VectorField) -> Tensor2Field:
    """Jacobian of a vector field: entry (i, j) = d_j v_i."""
    return Tensor2Field(
        _deriv_x(v.x), _deriv_y(v.x), _deriv_x(v.y), _deriv_y(v.y)
    )


def laplacian(f: ScalarField) -> ScalarField:
    return ScalarField.from_spectrum(f.grid, -f.grid.k2 * f.spectrum)


def invert_laplacian(f: ScalarField) -> ScalarField:
    """Solve -lap(u) = f with zero mean; the k = 0 mode maps to zero."""
    g = f.grid
    with np.errstate(divide="ignore", invalid="ignore"):
        spec = np.where(g.k2 > 0, f.spectrum / g.k2, 0.0 + 0.0j)
    return ScalarField.from_spectrum(g, spec)


def leray_project(u: VectorField) -> VectorField:
    """Project onto divergence-free fields: u_hat - k (k . u_hat) / |k|^2.

    The k = 0 (mean) mode passes through untouched.
    """
    g = u.grid
    ux, uy = u.x.spectrum, u.y.spectrum
    with np.errstate(divide="ignore", invalid="ignore"):
        kdotu = np.where(g.k2 > 0, (g.kx * ux + g.ky * uy) / g.k2, 0.0 + 0.0j)
    px = ScalarField.from_spectrum(g, ux - g.kx * kdotu)
    py = ScalarField.from_spectrum(g, uy - g.ky * kdotu)
    return VectorField(px, py, divergence_free=True)


def dealias(field):
    """Zero every mode outside the 2/3-rule mask; retained modes unchanged."""
    if isinstance(field, ScalarField):
        g = field.grid
        return ScalarField.from_spectrum(g, field.spectrum * g.dealias_mask)
    if isinstance(field, VectorField):
        return VectorField(
            dealias(field.x), dealias(field.y), divergence_free=field.divergence_free
        )
    if isinstance(field, SymTensorField):
        return SymTensorField(dealias(field.xx), dealias(field.xy), dealias(field.yy))
    if isinstance(field, Tensor2Field):
        return Tensor2Field(*(dealias(c) for c in field.components()))
    raise TypeError(f"cannot dealias {type(field).__name__}")


_ALLOWED_P = (1.0, 2.0, 4.0, np.inf)


def _pointwise_magnitude(field, pointwise: str) -> np.ndarray:
    if isinstance(field, ScalarField):
        return np.abs(field.values)
    if isinstance(field, VectorField):
        return field.magnitude_values()
    if isinstance(field, (SymTensorField, Tensor2Field)):
        if pointwise == "operator":
            return field.operator_norm_values()
        if pointwise == "frobenius":
            return field.frobenius_values()
        raise ValueError(f"unknown pointwise tensor norm {pointwise!r}")
    raise TypeError(f"cannot take norms of {type(field).__name__}")


def lp_norm(field, p, pointwise: str = "operator") -> float:
    """L^p norm over the torus for p in {1, 2, 4, inf}.

    Tensor fields reduce pointwise to the operator norm (largest singular
    value) by default, or to the Frobenius norm with ``pointwise='frobenius'``;
    vector fields use the pointwise Euclidean magnitude.  Finite-p norms use
    the cell quadrature weight (L/n)^2.
    """
    p = float(p)
    if p not in _ALLOWED_P:
        raise ValueError(f"p must be one of 1, 2, 4, inf; got {p}")
    mag = _pointwise_magnitude(field, pointwise)
    if p == np.inf:
        return float(np.max(mag))
    return float((np.sum(mag**p) * field.grid.cell_area) ** (1.0 / p))


def l2_inner(f: ScalarField, g: ScalarField) -> float:
    """Quadrature inner product over the torus."""
    _check_same_grid(f, g)
    return float(np.sum(f.values * g.values) * f.grid.cell_area)
