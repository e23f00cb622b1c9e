"""One-level undecimated (a trous) 2-D Daubechies-4 transform, periodic boundary.

Bands are ``LL, LH, HL, HH`` where the first letter is the filter applied
along rows (axis 0).  The analysis filters are the orthonormal db4 pair
scaled by ``1/sqrt(2)`` each, so ``|H|^2 + |G|^2 = 1`` per axis and the
adjoint inverts the forward transform exactly.
"""
from __future__ import annotations

import numpy as np

# orthonormal db4 decomposition low-pass (8 taps, sum sqrt(2))
DB4_LO = np.array([
    -0.010597401785069032, 0.0328830116668852, 0.030841381835560764,
    -0.18703481171909309, -0.027983769416859854, 0.6308807679298589,
    0.7148465705529157, 0.2303778133088965,
])
DB4_HI = DB4_LO[::-1] * np.array([(-1.0) ** (k + 1) for k in range(DB4_LO.size)])

BANDS = ("LL", "LH", "HL", "HH")


def _response(taps, size):
    """DFT of ``taps`` placed at the origin of a periodic signal of ``size``."""
    h = np.zeros(size)
    for k, t in enumerate(taps):
        h[k % size] += t
    return np.fft.fft(h)


class UndecimatedDb4:
    """Tight one-level frame; ``adjoint(forward(x)) == x``."""

    def __init__(self, rows: int, cols: int):
        if rows < 2 or cols < 2:
            raise ValueError("input must be at least 2 x 2")
        self.rows, self.cols = rows, cols
        s = 1 / np.sqrt(2)
        lo_r, hi_r = s * _response(DB4_LO, rows), s * _response(DB4_HI, rows)
        lo_c, hi_c = s * _response(DB4_LO, cols), s * _response(DB4_HI, cols)
        self.filters = np.array([
            np.outer(a, b) for a, b in ((lo_r, lo_c), (lo_r, hi_c), (hi_r, lo_c), (hi_r, hi_c))
        ])

    def forward(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.rows, self.cols):
            raise ValueError(f"expected shape {(self.rows, self.cols)}, got {x.shape}")
        X = np.fft.fft2(x)
        return np.real(np.fft.ifft2(self.filters * X[None], axes=(-2, -1)))

    def adjoint(self, coeffs) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (4, self.rows, self.cols):
            raise ValueError(f"expected shape {(4, self.rows, self.cols)}, got {coeffs.shape}")
        C = np.fft.fft2(coeffs, axes=(-2, -1))
        return np.real(np.fft.ifft2(np.sum(np.conj(self.filters) * C, axis=0)))


def wavelet_forward(w: UndecimatedDb4, x):
    return w.forward(x)


def wavelet_adjoint(w: UndecimatedDb4, coeffs):
    return w.adjoint(coeffs)
