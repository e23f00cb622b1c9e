"""Matplotlib report figures: reconstruction panels and convergence curves."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402


def _extent(n, h):
    half = n * h / 2
    return (-half, half, -half, half)


def reconstruction_figure(truth, recon, pixel_size, roi=None, path=None, title=None):
    """Ground truth, reconstruction and absolute error side by side (axes in mm)."""
    truth = np.asarray(truth, dtype=float)
    recon = np.asarray(recon, dtype=float)
    n = truth.shape[0]
    ext = _extent(n, pixel_size)
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.8), constrained_layout=True)
    panels = (("ground truth", truth, (0, 1)), ("reconstruction", recon, (0, 1)),
              ("|error|", np.abs(recon - truth), None))
    for ax, (name, img, clim) in zip(axes, panels):
        im = ax.imshow(img, cmap="gray", extent=ext, clim=clim)
        ax.set_title(name)
        ax.set_xlabel("x [mm]")
        if roi is not None:
            ax.add_patch(Circle(roi.center, roi.radius, fill=False, ls="--", ec="w", lw=1))
        fig.colorbar(im, ax=ax, shrink=0.8)
    axes[0].set_ylabel("y [mm]")
    if title:
        fig.suptitle(title)
    if path is not None:
        fig.savefig(path, dpi=100)
        plt.close(fig)
    return fig


def sinogram_figure(y, mask=None, path=None, title=None):
    """Sinogram (views down, cells across) with the mask outline when given."""
    y = np.asarray(y, dtype=float)
    fig, ax = plt.subplots(figsize=(5, 6), constrained_layout=True)
    ax.imshow(y, cmap="gray", aspect="auto")
    if mask is not None:
        ax.contour(np.asarray(mask, dtype=float), levels=[0.5], colors="w", linestyles="--", linewidths=1)
    ax.set_xlabel("detector cell")
    ax.set_ylabel("view")
    if title:
        ax.set_title(title)
    if path is not None:
        fig.savefig(path, dpi=100)
        plt.close(fig)
    return fig


def convergence_figure(records, path=None, title=None):
    """Objective value and, when logged, ROI relative error against the iteration count."""
    it = np.array([r["iter"] for r in records])
    psi = np.array([r["psi"] for r in records])
    err = [r.get("roi_rel_err") for r in records]
    has_err = len(err) > 0 and all(e is not None for e in err)
    fig, axes = plt.subplots(1, 2 if has_err else 1, figsize=(9 if has_err else 4.5, 3.5),
                             constrained_layout=True, squeeze=False)
    axes = axes[0]
    axes[0].plot(it, psi)
    if psi.size and np.all(psi > 0):
        axes[0].set_yscale("log")
    axes[0].set_xlabel("iteration")
    axes[0].set_ylabel("objective")
    if has_err:
        axes[1].plot(it, err)
        axes[1].set_xlabel("iteration")
        axes[1].set_ylabel("ROI relative error")
    if title:
        fig.suptitle(title)
    if path is not None:
        fig.savefig(path, dpi=100)
        plt.close(fig)
    return fig
