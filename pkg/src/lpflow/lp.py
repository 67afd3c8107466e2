"""Littlewood-Paley decomposition and the norms built on it.

The dyadic partition follows the classical construction: a smooth radial
low-pass profile ``psi`` equal to 1 inside |xi| <= 3/4 and 0 outside
|xi| >= 4/3, and the annulus profile ``phi(xi) = psi(xi/2) - psi(xi)``
supported on 3/4 <= |xi| <= 8/3, so that

    psi(xi) + sum_{j >= 0} phi(xi / 2^j) = 1

holds by telescoping.  Frequencies are physical (xi = 2*pi/L * k_int) and
block q = 0 always covers the unit annulus; blocks are tabulated for
q_min = round(log2(2*pi/L)) up to the largest q whose annulus meets the
dealiased band.  Content below q_min lives in the stored low-pass piece.

On top of the blocks: the sup-over-blocks Besov norm (B^0_{inf,inf}),
Hoelder norms C^alpha for alpha in (0,1) or (1,2), a dyadic-square BMO
estimator, and numerical checks of the Bernstein, heat-decay, and
logarithmic-interpolation inequalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field
from typing import NamedTuple

import numpy as np

from .grid import (
    Grid,
    ScalarField,
    SymTensorField,
    VectorField,
    gradient,
    lp_norm,
)

__all__ = [
    "DyadicPartition",
    "BlockSet",
    "build_partition",
    "delta_q",
    "s_q",
    "decompose",
    "block_sup_norms",
    "besov_b0_inf_inf",
    "holder_norm",
    "bmo_norm",
    "lowpass_profile",
    "annulus_profile",
    "partition_unity_error",
    "BernsteinRatios",
    "check_bernstein",
    "bernstein_window",
    "check_heat_decay",
    "heat_decay_bounds",
    "LogInterpolationCheck",
    "check_log_interpolation",
    "TimeLogInterpolationCheck",
    "check_log_interpolation_time",
]

_LOW_EDGE = 0.75  # inner support radius of the annulus profile
_HIGH_EDGE = 8.0 / 3.0
_PSI_EDGE = 4.0 / 3.0


def _smoothstep(u: np.ndarray) -> np.ndarray:
    """C-infinity step: exactly 0 for u <= 0, exactly 1 for u >= 1."""
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape)
    out[u >= 1.0] = 1.0
    mid = (u > 0.0) & (u < 1.0)
    if np.any(mid):
        a = np.exp(-1.0 / u[mid])
        b = np.exp(-1.0 / (1.0 - u[mid]))
        out[mid] = a / (a + b)
    return out


def lowpass_profile(r) -> np.ndarray:
    """Radial low-pass psi: 1 on r <= 3/4, 0 on r >= 4/3, smooth between."""
    r = np.asarray(r, dtype=float)
    return 1.0 - _smoothstep((r - _LOW_EDGE) / (_PSI_EDGE - _LOW_EDGE))


def annulus_profile(r) -> np.ndarray:
    """Annulus bump phi(r) = psi(r/2) - psi(r), supported on (3/4, 8/3)."""
    r = np.asarray(r, dtype=float)
    return lowpass_profile(r / 2.0) - lowpass_profile(r)


@dataclass(frozen=True)
class DyadicPartition:
    """Tabulated dyadic frequency masks for one grid.

    ``phi_masks[q]`` is the multiplier phi(|xi| / 2^q) on the FFT layout for
    q in [q_min, q_max]; ``psi_mask`` is the low-pass psi(|xi| / 2^q_min).
    """

    grid: Grid
    q_min: int
    q_max: int
    phi_masks: dict = dataclass_field(repr=False)
    psi_mask: np.ndarray = dataclass_field(repr=False)

    @property
    def qs(self) -> range:
        return range(self.q_min, self.q_max + 1)

    @property
    def n_blocks(self) -> int:
        return self.q_max - self.q_min + 1


def build_partition(grid: Grid) -> DyadicPartition:
    """Tabulate the dyadic masks for ``grid``.

    q_min anchors the low-pass ball at the fundamental frequency
    (q_min = round(log2(2*pi/L)), i.e. 0 for L = 2*pi); q_max is found by
    enumeration as the largest q whose annulus mask is nonzero somewhere on
    the dealiased band.  Raises if fewer than three blocks fit.
    """
    q_min = round(math.log2(2.0 * np.pi / grid.length))
    in_band = grid.dealias_mask
    xi_max = float(np.max(grid.kmag[in_band]))
    masks: dict[int, np.ndarray] = {}
    q = q_min
    q_max = q_min - 1
    while _LOW_EDGE * 2.0**q <= xi_max:
        m = annulus_profile(grid.kmag / 2.0**q)
        if np.any(m[in_band] > 0.0):
            masks[q] = m
            q_max = q
        q += 1
    n_blocks = q_max - q_min + 1
    if n_blocks < 3 or set(masks) != set(range(q_min, q_max + 1)):
        raise ValueError(
            f"grid too coarse to host >= 3 dyadic blocks (got {max(n_blocks, 0)})"
        )
    psi = lowpass_profile(grid.kmag / 2.0**q_min)
    return DyadicPartition(grid=grid, q_min=q_min, q_max=q_max, phi_masks=masks, psi_mask=psi)


def partition_unity_error(part: DyadicPartition) -> float:
    """Max over all grid wavenumbers of |psi(xi) + sum_j phi(xi/2^j) - 1|.

    Evaluated at unit normalization from the profiles themselves (summing j
    past the stored range until the telescoping saturates), so it measures
    the functional identity on every representable wavenumber, Nyquist
    corners included.
    """
    xi = part.grid.kmag
    total = lowpass_profile(xi)
    j = 0
    while _LOW_EDGE * 2.0**j <= float(xi.max()):
        total = total + annulus_profile(xi / 2.0**j)
        j += 1
    return float(np.max(np.abs(total - 1.0)))


def _apply_mask(f, mask: np.ndarray):
    if isinstance(f, ScalarField):
        return ScalarField.from_spectrum(f.grid, f.spectrum * mask)
    if isinstance(f, VectorField):
        return VectorField(
            _apply_mask(f.x, mask), _apply_mask(f.y, mask), divergence_free=f.divergence_free
        )
    if isinstance(f, SymTensorField):
        return SymTensorField(
            _apply_mask(f.xx, mask), _apply_mask(f.xy, mask), _apply_mask(f.yy, mask)
        )
    raise TypeError(f"cannot filter {type(f).__name__}")


def _zeros_like(f):
    if isinstance(f, ScalarField):
        return ScalarField.zeros(f.grid)
    if isinstance(f, VectorField):
        return VectorField.zeros(f.grid)
    if isinstance(f, SymTensorField):
        return SymTensorField.zeros(f.grid)
    raise TypeError(f"cannot make zeros of {type(f).__name__}")


def delta_q(f, q: int, part: DyadicPartition):
    """Dyadic block q of f; the zero field outside [q_min, q_max] by convention."""
    if q < part.q_min or q > part.q_max:
        return _zeros_like(f)
    return _apply_mask(f, part.phi_masks[q])


def s_q(f, q: int, part: DyadicPartition):
    """Low-pass up to scale q: multiplier psi(|xi| / 2^q) (any integer q)."""
    mask = lowpass_profile(part.grid.kmag / 2.0**q)
    return _apply_mask(f, mask)


@dataclass(frozen=True)
class BlockSet:
    """One field split into its dyadic blocks plus the low-pass remainder."""

    partition: DyadicPartition
    blocks: dict
    lowpass: object

    def reconstruct(self):
        total = self.lowpass
        for q in self.partition.qs:
            total = _field_add(total, self.blocks[q])
        return total


def _field_add(a, b):
    if isinstance(a, ScalarField):
        return a + b
    if isinstance(a, VectorField):
        return VectorField(a.x + b.x, a.y + b.y)
    if isinstance(a, SymTensorField):
        return SymTensorField(a.xx + b.xx, a.xy + b.xy, a.yy + b.yy)
    raise TypeError(type(a).__name__)


def decompose(f, part: DyadicPartition) -> BlockSet:
    blocks = {q: delta_q(f, q, part) for q in part.qs}
    return BlockSet(partition=part, blocks=blocks, lowpass=s_q(f, part.q_min, part))


def block_sup_norms(f, part: DyadicPartition) -> dict:
    """Sup norm of every block: {q: ||Delta_q f||_inf}.

    Tensor blocks reduce pointwise through the operator norm, vectors through
    the Euclidean magnitude.
    """
    return {q: lp_norm(delta_q(f, q, part), np.inf) for q in part.qs}


def besov_b0_inf_inf(f, part: DyadicPartition) -> float:
    """sup_q ||Delta_q f||_inf over the representable blocks."""
    sups = block_sup_norms(f, part)
    return max(sups.values())


def _check_holder_exponent(alpha: float) -> None:
    if not (0.0 < alpha < 1.0 or 1.0 < alpha < 2.0):
        raise ValueError(f"Hoelder exponent must lie in (0,1) or (1,2); got {alpha}")


def holder_norm(f, alpha: float, part: DyadicPartition) -> float:
    """Dyadic Hoelder seminorm sup_q 2^(q*alpha) ||Delta_q f||_inf."""
    _check_holder_exponent(alpha)
    sups = block_sup_norms(f, part)
    return max(2.0 ** (q * alpha) * s for q, s in sups.items())


def _bmo_scalar(values: np.ndarray) -> float:
    n = values.shape[0]
    best = 0.0
    j = 0
    while (n >> j) >= 1:
        blocks = 1 << j
        side = n >> j
        a = values.reshape(blocks, side, blocks, side)
        means = a.mean(axis=(1, 3))
        osc = np.abs(a - means[:, None, :, None]).mean(axis=(1, 3))
        best = max(best, float(osc.max()))
        j += 1
    return best


def bmo_norm(f) -> float:
    """Dyadic BMO estimator: max mean oscillation over all aligned dyadic
    squares (side L/2^j, j = 0..log2 n), computed level by level in
    O(n^2 log n).  Vector/tensor fields take the max over components.
    """
    if isinstance(f, ScalarField):
        return _bmo_scalar(f.values)
    if isinstance(f, (VectorField, SymTensorField)):
        return max(_bmo_scalar(c.values) for c in f.components())
    raise TypeError(f"cannot take BMO of {type(f).__name__}")


class BernsteinRatios(NamedTuple):
    ratio: float
    inverse: float


def check_bernstein(f: ScalarField, q: int, part: DyadicPartition, p=np.inf, s: int = 1) -> BernsteinRatios:
    """Measured Bernstein ratio ||grad Delta_q f||_p / (2^q ||Delta_q f||_p).

    For annulus-supported blocks the ratio sits inside [3/4, 8/3] in the
    physical-frequency normalization.  Only first derivatives are supported.
    """
    if s != 1:
        raise ValueError("only derivative order s = 1 is supported")
    block = delta_q(f, q, part)
    base = lp_norm(block, p)
    if base == 0.0:
        raise ValueError(f"block q={q} of the supplied field is zero")
    grad_norm = lp_norm(gradient(block), p)
    ratio = grad_norm / (2.0**q * base)
    return BernsteinRatios(ratio=ratio, inverse=1.0 / ratio)


def bernstein_window(length: float) -> tuple[float, float]:
    """Admissible ratio window scaled by the fundamental frequency 2*pi/L."""
    scale = 2.0 * np.pi / length
    return (0.7 * scale, 2.7 * scale)


def check_heat_decay(f: ScalarField, q: int, t: float, part: DyadicPartition) -> float:
    """Measured ratio ||e^{t lap} Delta_q f||_inf / ||Delta_q f||_inf."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    block = delta_q(f, q, part)
    base = lp_norm(block, np.inf)
    if base == 0.0:
        raise ValueError(f"block q={q} of the supplied field is zero")
    decayed = ScalarField.from_spectrum(
        f.grid, block.spectrum * np.exp(-f.grid.k2 * t)
    )
    return lp_norm(decayed, np.inf) / base


def heat_decay_bounds(q: int, t: float) -> tuple[float, float]:
    """Annulus-derived bracketing (e^{-C 4^q t}, e^{-c 4^q t}) for the block
    heat-decay ratio, with c = (3/4)^2 and C = (8/3)^2 in physical frequency
    units."""
    fourq = 4.0**q
    lo = math.exp(-(_HIGH_EDGE**2) * fourq * t) if (_HIGH_EDGE**2) * fourq * t < 745 else 0.0
    hi = math.exp(-(_LOW_EDGE**2) * fourq * t) if (_LOW_EDGE**2) * fourq * t < 745 else 0.0
    return lo, hi


@dataclass(frozen=True)
class LogInterpolationCheck:
    """Components of the sup-norm logarithmic interpolation bound."""

    sup_norm: float
    l2_norm: float
    bmo: float
    holder: float
    denominator: float
    ratio: float


def check_log_interpolation(f, beta: float, part: DyadicPartition) -> LogInterpolationCheck:
    """Ratio ||f||_inf / (1 + ||f||_L2 + ||f||_BMO * ln(e + ||f||_C^beta)).

    Bounded ratios over a corpus are numerical evidence for the
    interpolation inequality; the single-mode family cos(2^k x) makes the
    denominator grow with k while the sup norm stays 1.
    """
    _check_holder_exponent(beta)
    sup = lp_norm(f, np.inf)
    l2 = lp_norm(f, 2, pointwise="frobenius") if isinstance(f, SymTensorField) else lp_norm(f, 2)
    bmo = bmo_norm(f)
    hol = holder_norm(f, beta, part)
    denom = 1.0 + l2 + bmo * math.log(math.e + hol)
    return LogInterpolationCheck(
        sup_norm=sup, l2_norm=l2, bmo=bmo, holder=hol, denominator=denom, ratio=sup / denom
    )


def _trapezoid(ts: np.ndarray, ys: np.ndarray) -> float:
    ts = np.asarray(ts, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if ts.shape[0] != ys.shape[0]:
        raise ValueError("time and value arrays differ in length")
    if ts.shape[0] < 2:
        return 0.0
    return float(np.sum(0.5 * np.diff(ts) * (ys[1:] + ys[:-1])))


@dataclass(frozen=True)
class TimeLogInterpolationCheck:
    """Components of the time-integrated logarithmic interpolation bound."""

    lhs: float
    l2_integral: float
    block_sup_integral: float
    holder_integral: float
    cutoff: float
    bracket: float
    ratio: float


def check_log_interpolation_time(
    times, fields, beta: float, part: DyadicPartition
) -> TimeLogInterpolationCheck:
    """Time-integrated interpolation check for a sampled history g(t).

    Evaluates, with trapezoidal quadrature over the samples,

        int ||grad g||_inf dt   vs
        1 + int ||g||_L2 dt
          + sup_q int ||Delta_q grad g||_inf dt * ln(e + int ||grad g||_C^beta dt)

    and returns the pieces, the block cutoff N = (1/beta) log2(e + holder
    integral), and the LHS/RHS ratio.
    """
    _check_holder_exponent(beta)
    times = np.asarray(times, dtype=float)
    if len(fields) != times.shape[0]:
        raise ValueError("history length mismatch")
    grad_inf, l2s, holders = [], [], []
    per_block = {q: [] for q in part.qs}
    for g in fields:
        grad = gradient(g)
        grad_inf.append(lp_norm(grad, np.inf))
        l2s.append(lp_norm(g, 2))
        holders.append(holder_norm(grad, beta, part))
        sups = block_sup_norms(grad, part)
        for q in part.qs:
            per_block[q].append(sups[q])
    lhs = _trapezoid(times, np.array(grad_inf))
    l2_int = _trapezoid(times, np.array(l2s))
    block_int = max(_trapezoid(times, np.array(per_block[q])) for q in part.qs)
    holder_int = _trapezoid(times, np.array(holders))
    cutoff = math.log2(math.e + holder_int) / beta
    bracket = 1.0 + l2_int + block_int * math.log(math.e + holder_int)
    return TimeLogInterpolationCheck(
        lhs=lhs,
        l2_integral=l2_int,
        block_sup_integral=block_int,
        holder_integral=holder_int,
        cutoff=cutoff,
        bracket=bracket,
        ratio=lhs / bracket,
    )
