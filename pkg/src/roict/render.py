"""Exact 8-bit grayscale renderings with optional ROI overlays."""
from __future__ import annotations

import numpy as np
from PIL import Image as PILImage

WHITE = 255
DASH = 4  # on/off run length of dashed overlays, in samples


def to_uint8(values, window=None) -> np.ndarray:
    """Linear map of ``window = (lo, hi)`` (default min/max) onto 0..255.

    A constant array maps to mid-gray.
    """
    a = np.asarray(values, dtype=float)
    if a.ndim != 2:
        raise ValueError("expected a 2-D array")
    if not np.all(np.isfinite(a)):
        raise ValueError("cannot render non-finite values")
    lo, hi = (float(a.min()), float(a.max())) if window is None else map(float, window)
    if hi <= lo:
        return np.full(a.shape, 128, dtype=np.uint8)
    t = np.clip((a - lo) / (hi - lo), 0.0, 1.0)
    return np.rint(255 * t).astype(np.uint8)


def circle_overlay(n: int, center_px, radius_px: float) -> np.ndarray:
    """Dashed circle on an ``n x n`` grid; ``center_px`` is ``(col, row)`` in pixel coordinates."""
    cx, cy = center_px
    i, j = np.mgrid[0:n, 0:n]
    dist = np.hypot(j - cx, i - cy)
    ring = np.abs(dist - radius_px) < 0.5
    # dash by arc length so the pattern looks the same at any radius
    arc = np.mod(np.arctan2(i - cy, j - cx), 2 * np.pi) * max(radius_px, 1.0)
    return ring & (np.floor(arc / DASH).astype(int) % 2 == 0)


def roi_circle_pixels(n: int, pixel_size: float, center_mm, radius_mm: float) -> np.ndarray:
    """:func:`circle_overlay` for an ROI given in millimetres about the isocenter."""
    col = center_mm[0] / pixel_size + n / 2 - 0.5
    row = n / 2 - 0.5 - center_mm[1] / pixel_size
    return circle_overlay(n, (col, row), radius_mm / pixel_size)


def mask_boundary(mask) -> np.ndarray:
    """Masked cells with an unmasked neighbour along the detector axis."""
    m = np.asarray(mask, dtype=bool)
    left = np.zeros_like(m)
    right = np.zeros_like(m)
    left[:, 1:] = m[:, 1:] & ~m[:, :-1]
    right[:, :-1] = m[:, :-1] & ~m[:, 1:]
    return left | right


def sinogram_overlay(mask) -> np.ndarray:
    """Dashed version of :func:`mask_boundary` (every other run of views)."""
    b = mask_boundary(mask)
    views = np.arange(b.shape[0])
    return b & ((views // DASH) % 2 == 0)[:, None]


def render(values, path, overlay=None, window=None) -> np.ndarray:
    """Write an 8-bit PNG of ``values``; ``overlay`` pixels are drawn white.  Returns the pixels."""
    px = to_uint8(values, window)
    if overlay is not None:
        overlay = np.asarray(overlay, dtype=bool)
        if overlay.shape != px.shape:
            raise ValueError("overlay shape does not match the array")
        px[overlay] = WHITE
    PILImage.fromarray(px).save(path)
    return px
