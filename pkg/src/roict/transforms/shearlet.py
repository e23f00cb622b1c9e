"""Band-limited cone-adapted shearlet tight frame on a padded FFT grid.

Windows are built in the frequency domain from a Meyer-type radial
partition (separable smooth boxes, so bands follow the square cones) and a
Meyer partition in the shear variable ``2^s * w2 / w1`` (horizontal cone) or
``2^s * w1 / w2`` (vertical cone).  Scale ``j = 1..J`` carries shear level
``ceil(j / 2)`` and hence ``2 * 2^ceil(j/2) + 1`` shears per cone:

=====  ===========  ===============
scale  shear level  windows (2 cones)
=====  ===========  ===============
1      1            10
2      1            10
3      2            18
4      2            18
=====  ===========  ===============

plus one low-pass window.  Cone seams overlap slightly; all windows are
symmetrized (``W(w) = W(-w)`` on the DFT grid, so real inputs give real
coefficients) and then divided by ``sqrt(sum_i W_i^2)``, which makes the
discrete system an exact Parseval frame on the padded grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def meyer_nu(x):
    """Meyer auxiliary polynomial, 0 below 0, 1 above 1, ``nu(x) + nu(1-x) = 1``."""
    x = np.clip(x, 0.0, 1.0)
    return x**4 * (35 - 84 * x + 70 * x**2 - 20 * x**3)


def smooth_box(t, a):
    """1 on ``|t| <= a``, Meyer roll-off to 0 at ``|t| = 2a``."""
    r = np.abs(t) / a
    return np.cos(0.5 * np.pi * meyer_nu(r - 1.0))


def shear_bump(t):
    """Bump with ``sum_l shear_bump(t - l)^2 = 1`` and support ``|t| < 1``."""
    return np.cos(0.5 * np.pi * meyer_nu(np.abs(t)))


def _next_pow2(m: int) -> int:
    return 1 << int(np.ceil(np.log2(max(m, 1))))


def _symmetrize(w):
    """Average a window with its reflection ``k -> -k`` (mod grid)."""
    flipped = np.roll(w[::-1, ::-1], shift=(1, 1), axis=(0, 1))
    return 0.5 * (w + flipped)


@dataclass
class ShearletSystem:
    rows: int
    cols: int
    padded_rows: int
    padded_cols: int
    num_scales: int
    windows: np.ndarray = field(repr=False)  # (n_windows, padded_rows, padded_cols)
    index: list = field(repr=False)  # (cone, scale, shear); low-pass is (0, 0, 0)

    @property
    def num_windows(self) -> int:
        return self.windows.shape[0]

    def shears_per_scale(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for _, j, _ in self.index[1:]:
            out[j] = out.get(j, 0) + 1
        return out

    def pad(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.rows, self.cols):
            raise ValueError(f"expected shape {(self.rows, self.cols)}, got {x.shape}")
        out = np.zeros((self.padded_rows, self.padded_cols))
        out[: self.rows, : self.cols] = x
        return out

    def forward(self, x) -> np.ndarray:
        return sh_forward(self, x)

    def adjoint(self, c) -> np.ndarray:
        return sh_adjoint(self, c)


def build_shearlet_system(rows: int, cols: int, num_scales: int = 3) -> ShearletSystem:
    """Frequency-domain windows for a ``rows x cols`` input, zero-padded to a dyadic square."""
    if num_scales < 1:
        raise ValueError("need at least one scale")
    if rows < 8 or cols < 8:
        raise ValueError("input must be at least 8 x 8")
    size = _next_pow2(max(rows, cols))
    # coarsest band starts at 2^-J of Nyquist; it must still span a few bins
    if size * 2.0 ** (-num_scales) < 2:
        raise ValueError(f"{num_scales} scales need a grid larger than {size}")
    w1 = np.fft.fftfreq(size) * 2.0  # normalized so Nyquist is 1
    w1, w2 = np.meshgrid(w1, w1, indexing="ij")

    def box(a):
        return smooth_box(w1, a) * smooth_box(w2, a)

    windows = [box(2.0 ** -num_scales)]
    index = [(0, 0, 0)]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_h = np.where(w1 != 0, w2 / w1, np.inf)
        ratio_v = np.where(w2 != 0, w1 / w2, np.inf)
    for j in range(1, num_scales + 1):
        inner = box(2.0 ** (j - 1 - num_scales))
        outer = box(2.0 ** (j - num_scales))
        radial = np.sqrt(np.clip(outer**2 - inner**2, 0.0, None))
        level = int(np.ceil(j / 2))
        for cone, ratio in ((1, ratio_h), (2, ratio_v)):
            t = (2.0**level) * ratio
            for shear in range(-(2**level), 2**level + 1):
                dirw = np.where(np.isfinite(t), shear_bump(t - shear), 0.0)
                windows.append(radial * dirw)
                index.append((cone, j, shear))
    windows = np.array([_symmetrize(w) for w in windows])
    energy = np.sum(windows**2, axis=0)
    if np.any(energy <= 0):
        raise RuntimeError("windows do not cover the frequency plane")
    windows /= np.sqrt(energy)
    return ShearletSystem(rows, cols, size, size, num_scales, windows, index)


def sh_forward(sys: ShearletSystem, x) -> np.ndarray:
    """Coefficients ``(n_windows, padded_rows, padded_cols)`` of a ``rows x cols`` array."""
    X = np.fft.fft2(sys.pad(x))
    return np.real(np.fft.ifft2(sys.windows * X[None], axes=(-2, -1)))


def sh_adjoint(sys: ShearletSystem, coeffs) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != sys.windows.shape:
        raise ValueError(f"expected coefficients of shape {sys.windows.shape}, got {coeffs.shape}")
    C = np.fft.fft2(coeffs, axes=(-2, -1))
    out = np.real(np.fft.ifft2(np.sum(sys.windows * C, axis=0)))
    return out[: sys.rows, : sys.cols]
