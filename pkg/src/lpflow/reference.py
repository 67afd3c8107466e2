"""Brute-force reference implementations.

Slow, independent re-derivations of the spectral fast paths, used by the
``verify`` command and the test suite to cross-check results.  Nothing here
shares code with the production implementations: transforms are evaluated
from the defining sums, the Leray projector mode by mode, products by direct
convolution over integer frequencies, and BMO by scanning every dyadic square.
Intended for small grids (n = 16 keeps the O(n^4) pieces cheap).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "naive_dft2",
    "naive_idft2",
    "leray_project_modewise",
    "convolve_then_mask",
    "bmo_exhaustive",
    "symmetric_eig_range",
]


def naive_dft2(values: np.ndarray) -> np.ndarray:
    """Normalized 2D DFT straight from the defining double sum."""
    n = values.shape[0]
    w = np.exp(-2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n)
    return (w @ values @ w.T) / (n * n)


def naive_idft2(spectrum: np.ndarray) -> np.ndarray:
    n = spectrum.shape[0]
    w = np.exp(2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n)
    return (w @ spectrum @ w.T).real


def leray_project_modewise(ux_hat: np.ndarray, uy_hat: np.ndarray, length: float):
    """Divergence-free projection evaluated mode by mode in a Python loop."""
    n = ux_hat.shape[0]
    scale = 2.0 * np.pi / length
    freq = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    px = np.zeros_like(ux_hat)
    py = np.zeros_like(uy_hat)
    for i in range(n):
        for j in range(n):
            kx = scale * freq[i]
            ky = scale * freq[j]
            k2 = kx * kx + ky * ky
            if k2 == 0.0:
                px[i, j] = ux_hat[i, j]
                py[i, j] = uy_hat[i, j]
                continue
            kdotu = (kx * ux_hat[i, j] + ky * uy_hat[i, j]) / k2
            px[i, j] = ux_hat[i, j] - kx * kdotu
            py[i, j] = uy_hat[i, j] - ky * kdotu
    return px, py


def convolve_then_mask(f_hat: np.ndarray, g_hat: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Spectrum of f*g by true (non-periodic) convolution over integer modes,
    truncated to the retained mask.

    This is what the real-space product followed by dealiasing must equal when
    both inputs are supported on the retained band.
    """
    n = f_hat.shape[0]
    freq = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    index = {int(freq[i]): i for i in range(n)}
    out = np.zeros_like(f_hat)
    nz_f = list(zip(*np.nonzero(f_hat)))
    nz_g = list(zip(*np.nonzero(g_hat)))
    for (i1, j1) in nz_f:
        for (i2, j2) in nz_g:
            kx = int(freq[i1]) + int(freq[i2])
            ky = int(freq[j1]) + int(freq[j2])
            if kx not in index or ky not in index:
                continue  # escapes the representable band entirely
            out[index[kx], index[ky]] += f_hat[i1, j1] * g_hat[i2, j2]
    return out * mask


def bmo_exhaustive(values: np.ndarray) -> float:
    """Dyadic-square mean oscillation by scanning every aligned square."""
    n = values.shape[0]
    best = 0.0
    level = 0
    side = n
    while side >= 1:
        for i in range(0, n, side):
            for j in range(0, n, side):
                block = values[i : i + side, j : j + side]
                osc = float(np.mean(np.abs(block - np.mean(block))))
                if osc > best:
                    best = osc
        level += 1
        side = n >> level
    return best


def symmetric_eig_range(xx: np.ndarray, xy: np.ndarray, yy: np.ndarray):
    """Per-point eigenvalues of a symmetric 2x2 field via LAPACK.

    Returns (min_eig, max_abs_eig) arrays for cross-checking the closed-form
    operator-norm and conformation paths.
    """
    mats = np.empty(xx.shape + (2, 2))
    mats[..., 0, 0] = xx
    mats[..., 0, 1] = xy
    mats[..., 1, 0] = xy
    mats[..., 1, 1] = yy
    eig = np.linalg.eigvalsh(mats)
    return eig[..., 0], np.abs(eig).max(axis=-1)
