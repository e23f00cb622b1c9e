"""Smoothed isotropic total variation with forward differences."""
from __future__ import annotations

import numpy as np


def _diffs(f):
    # zero difference past the last row/column (replicate boundary)
    dx = np.zeros_like(f)
    dy = np.zeros_like(f)
    dx[:, :-1] = f[:, 1:] - f[:, :-1]
    dy[:-1, :] = f[1:, :] - f[:-1, :]
    return dx, dy


def _check(delta):
    if not delta > 0:
        raise ValueError("TV smoothing parameter must be positive")


def tv_value(f, delta: float) -> float:
    """``sum sqrt(Dx f^2 + Dy f^2 + delta^2)``."""
    _check(delta)
    dx, dy = _diffs(np.asarray(f, dtype=float))
    return float(np.sum(np.sqrt(dx**2 + dy**2 + delta**2)))


def tv_grad(f, delta: float) -> np.ndarray:
    """Gradient of :func:`tv_value`: minus the divergence of the normalized difference field."""
    _check(delta)
    dx, dy = _diffs(np.asarray(f, dtype=float))
    mag = np.sqrt(dx**2 + dy**2 + delta**2)
    px, py = dx / mag, dy / mag
    g = np.zeros_like(px)
    # adjoint of the forward differences above
    g[:, :-1] -= px[:, :-1]
    g[:, 1:] += px[:, :-1]
    g[:-1, :] -= py[:-1, :]
    g[1:, :] += py[:-1, :]
    return g


def tv_value_and_grad(f, delta: float):
    return tv_value(f, delta), tv_grad(f, delta)
