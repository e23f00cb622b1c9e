"""Modified Shepp-Logan phantom rasterized at pixel centers.

Coordinates are normalized to [-1, 1]^2 with y pointing up.  Pixel ``(i, j)``
has its center at ``x = -1 + (2j + 1)/n`` and ``y = 1 - (2i + 1)/n``, so row
``i`` grows downward as in an image viewer.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Ellipse:
    intensity: float
    semi_axes: tuple[float, float]
    center: tuple[float, float]
    rotation: float  # degrees, counter-clockwise

    def __post_init__(self):
        if min(self.semi_axes) <= 0:
            raise ValueError("semi-axes must be positive")
        if not -180.0 <= self.rotation <= 180.0:
            raise ValueError("rotation must lie in [-180, 180] degrees")

    def contains(self, x, y):
        """Boolean mask of the points ``(x, y)`` inside the closed ellipse."""
        phi = np.deg2rad(self.rotation)
        c, s = np.cos(phi), np.sin(phi)
        dx = np.asarray(x, dtype=float) - self.center[0]
        dy = np.asarray(y, dtype=float) - self.center[1]
        u = dx * c + dy * s
        v = -dx * s + dy * c
        a, b = self.semi_axes
        return (u / a) ** 2 + (v / b) ** 2 <= 1.0


# Toft's "modified" Shepp-Logan table, as shipped by MATLAB's phantom().
MODIFIED_SHEPP_LOGAN = (
    Ellipse(1.0, (0.69, 0.92), (0.0, 0.0), 0.0),
    Ellipse(-0.8, (0.6624, 0.8740), (0.0, -0.0184), 0.0),
    Ellipse(-0.2, (0.1100, 0.3100), (0.22, 0.0), -18.0),
    Ellipse(-0.2, (0.1600, 0.4100), (-0.22, 0.0), 18.0),
    Ellipse(0.1, (0.2100, 0.2500), (0.0, 0.35), 0.0),
    Ellipse(0.1, (0.0460, 0.0460), (0.0, 0.1), 0.0),
    Ellipse(0.1, (0.0460, 0.0460), (0.0, -0.1), 0.0),
    Ellipse(0.1, (0.0460, 0.0230), (-0.08, -0.605), 0.0),
    Ellipse(0.1, (0.0230, 0.0230), (0.0, -0.606), 0.0),
    Ellipse(0.1, (0.0230, 0.0460), (0.06, -0.605), 0.0),
)


@dataclass
class Image:
    """Square attenuation map; ``values[i, j]`` is row ``i``, column ``j``."""

    values: np.ndarray
    pixel_size: float = 1.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ValueError(f"image must be square, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("image values must be finite")

    @property
    def n(self) -> int:
        return self.values.shape[0]


def pixel_centers(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Normalized ``(x, y)`` pixel-center grids of shape ``(n, n)``."""
    idx = np.arange(n)
    x = -1.0 + (2 * idx + 1) / n
    y = 1.0 - (2 * idx + 1) / n
    return np.meshgrid(x, y)


def generate_phantom(n: int, ellipses=MODIFIED_SHEPP_LOGAN, pixel_size: float = 1.0) -> Image:
    """Rasterize the phantom on an ``n x n`` grid.

    Each pixel is the sum of the intensities of the ellipses containing its
    center, clipped to ``[0, 1]``.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"phantom size must be an integer >= 2, got {n!r}")
    x, y = pixel_centers(int(n))
    values = np.zeros((int(n), int(n)))
    for e in ellipses:
        values[e.contains(x, y)] += e.intensity
    return Image(np.clip(values, 0.0, 1.0), pixel_size)
