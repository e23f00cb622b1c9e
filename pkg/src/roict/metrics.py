"""Figures of merit evaluated on the ROI pixels only."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _roi_values(recon, truth, roi):
    recon = np.asarray(recon, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if recon.shape != truth.shape:
        raise ValueError(f"shape mismatch {recon.shape} vs {truth.shape}")
    roi = np.asarray(roi, dtype=bool)
    if roi.shape != truth.shape:
        raise ValueError("ROI mask must match the image shape")
    if not roi.any():
        raise ValueError("ROI contains no pixels")
    return recon[roi], truth[roi]


def psnr_roi(recon, truth, roi, mpv: float = 1.0) -> float:
    """``10 log10(mpv^2 / mse)`` over ``roi``; ``inf`` when the ROI is reproduced exactly."""
    if not mpv > 0:
        raise ValueError("mpv must be positive")
    r, t = _roi_values(recon, truth, roi)
    mse = float(np.mean((r - t) ** 2))
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(mpv**2 / mse))


def rel_err_roi(recon, truth, roi) -> float:
    """``|recon - truth| / |truth|`` in the 2-norm over ``roi``."""
    r, t = _roi_values(recon, truth, roi)
    tn = float(np.linalg.norm(t))
    if tn == 0.0:
        raise ValueError("ground truth vanishes on the ROI")
    return float(np.linalg.norm(r - t)) / tn


@dataclass(frozen=True)
class MeritReport:
    psnr_db: float
    rel_err: float
    roi_pixel_count: int
    mpv: float

    def __post_init__(self):
        if self.rel_err < 0:
            raise ValueError("rel_err must be nonnegative")
        if self.roi_pixel_count < 1:
            raise ValueError("ROI must contain at least one pixel")


def evaluate(recon, truth, roi, mpv: float | None = None) -> MeritReport:
    """Both metrics at once; ``mpv`` defaults to the maximum of ``truth``."""
    truth = np.asarray(truth, dtype=float)
    mpv = float(truth.max()) if mpv is None else float(mpv)
    return MeritReport(psnr_roi(recon, truth, roi, mpv), rel_err_roi(recon, truth, roi),
                       int(np.count_nonzero(roi)), mpv)
