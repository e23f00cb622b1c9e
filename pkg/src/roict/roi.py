"""Region-of-interest disk, its projection-domain mask and truncation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import FanBeamGeometry, point_line_distance


@dataclass(frozen=True)
class RoiDisk:
    """Disk in isocenter coordinates (mm)."""

    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ROI radius must be positive")

    @classmethod
    def from_pixels(cls, center_px, radius_px, pixel_size):
        """Build from pixel units (offsets from the isocenter, y up)."""
        cx, cy = center_px
        return cls((cx * pixel_size, cy * pixel_size), radius_px * pixel_size)


def offset_center(g: FanBeamGeometry) -> tuple[float, float]:
    """Fixed off-center ROI location (+5%, -5% of the FOV width, in mm).

    The isocenter ``(0, 0)`` is the general default; this location is used
    by the reproducible reconstruction runs.
    """
    return (0.05 * g.fov_width, -0.05 * g.fov_width)


def build_mask(g: FanBeamGeometry, roi: RoiDisk) -> np.ndarray:
    """Boolean ``K x P`` array, true where the central ray passes strictly inside the disk."""
    return point_line_distance(g, roi.center) < roi.radius


def truncate(y, mask) -> np.ndarray:
    """Zero the sinogram samples whose rays miss the ROI."""
    y = np.asarray(y, dtype=float)
    mask = np.asarray(mask)
    if y.shape != mask.shape:
        raise ValueError(f"sinogram shape {y.shape} does not match mask {mask.shape}")
    return np.where(mask, y, 0.0)


def roi_pixels(n: int, pixel_size: float, roi: RoiDisk) -> np.ndarray:
    """Boolean ``n x n`` image of the pixels whose centers lie strictly inside the disk."""
    c = (np.arange(n) + 0.5 - n / 2) * pixel_size
    x, y = np.meshgrid(c, -c)
    return np.hypot(x - roi.center[0], y - roi.center[1]) < roi.radius
