"""Flat-detector fan-beam acquisition geometry.

The isocenter is the origin of a millimetre coordinate frame with y up.  At
view angle ``theta`` the source sits at ``sad * (cos theta, sin theta)`` and
the detector line is perpendicular to the source-isocenter axis, ``sdd`` away
from the source on the far side of the isocenter.  Detector coordinate ``u``
runs along ``(-sin theta, cos theta)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Ray:
    source: tuple[float, float]
    detector_point: tuple[float, float]

    def __post_init__(self):
        if np.allclose(self.source, self.detector_point, rtol=0, atol=0):
            raise ValueError("ray endpoints coincide")


@dataclass(frozen=True)
class FanBeamGeometry:
    num_views: int
    num_cells: int
    cell_pitch: float
    sdd: float
    sad: float
    detector_offset: float = 0.0
    view_angles: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.num_views < 1 or self.num_cells < 1:
            raise ValueError("need at least one view and one detector cell")
        if not 0 < self.sad < self.sdd:
            raise ValueError("require 0 < sad < sdd")
        if self.cell_pitch <= 0:
            raise ValueError("cell pitch must be positive")
        if self.view_angles is None:
            angles = 2 * np.pi * np.arange(self.num_views) / self.num_views
        else:
            angles = np.asarray(self.view_angles, dtype=float)
        if angles.shape != (self.num_views,):
            raise ValueError("need one view angle per view")
        if np.any(np.diff(angles) <= 0) or angles[0] < 0 or angles[-1] >= 2 * np.pi:
            raise ValueError("view angles must be strictly increasing in [0, 2pi)")
        angles.setflags(write=False)
        object.__setattr__(self, "view_angles", angles)

    # short aliases matching the usual K x P sinogram notation
    @property
    def K(self) -> int:
        return self.num_views

    @property
    def P(self) -> int:
        return self.num_cells

    @property
    def magnification(self) -> float:
        return self.sdd / self.sad

    @property
    def fov_width(self) -> float:
        """Detector width demagnified to the isocenter, in mm."""
        return self.num_cells * self.cell_pitch / self.magnification

    def cell_centers(self) -> np.ndarray:
        """Signed detector coordinate ``u_p`` of every cell center, mm."""
        p = np.arange(self.num_cells)
        return (p - (self.num_cells - 1) / 2 - self.detector_offset) * self.cell_pitch

    def cell_boundaries(self) -> np.ndarray:
        """The ``P + 1`` cell edges along the detector, mm."""
        b = np.arange(self.num_cells + 1)
        return (b - self.num_cells / 2 - self.detector_offset) * self.cell_pitch

    def source_positions(self) -> np.ndarray:
        """Array ``(K, 2)`` of source locations."""
        t = self.view_angles
        return self.sad * np.stack([np.cos(t), np.sin(t)], axis=1)

    def detector_points(self, u) -> np.ndarray:
        """Detector points ``(K, len(u), 2)`` at detector coordinates ``u``."""
        t = self.view_angles[:, None]
        u = np.asarray(u, dtype=float)[None, :]
        off = self.sad - self.sdd
        x = off * np.cos(t) - u * np.sin(t)
        y = off * np.sin(t) + u * np.cos(t)
        return np.stack([x, y], axis=-1)

    def ray(self, k: int, p: int) -> Ray:
        if not (0 <= k < self.num_views and 0 <= p < self.num_cells):
            raise ValueError(f"ray index ({k}, {p}) out of range")
        src = self.source_positions()[k]
        det = self.detector_points(self.cell_centers()[p : p + 1])[k, 0]
        return Ray(tuple(src), tuple(det))

    def to_dict(self) -> dict:
        return {
            "views": self.num_views,
            "cells": self.num_cells,
            "pitch_mm": self.cell_pitch,
            "sdd_mm": self.sdd,
            "sad_mm": self.sad,
            "offset_cells": self.detector_offset,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FanBeamGeometry":
        return cls(
            num_views=int(d["views"]),
            num_cells=int(d["cells"]),
            cell_pitch=float(d["pitch_mm"]),
            sdd=float(d["sdd_mm"]),
            sad=float(d["sad_mm"]),
            detector_offset=float(d.get("offset_cells", 0.0)),
        )

    @classmethod
    def from_json(cls, path) -> "FanBeamGeometry":
        return cls.from_dict(json.loads(Path(path).read_text()))


def paper_geometry() -> FanBeamGeometry:
    """The desk micro-CT setup: 182 views over 2pi, 130 cells of 0.8 mm."""
    return FanBeamGeometry(
        num_views=182,
        num_cells=130,
        cell_pitch=0.8,
        sdd=291.20,
        sad=115.84,
        detector_offset=1.5,
    )


def fov_pixel_size(g: FanBeamGeometry, n: int) -> float:
    """Pixel size (mm) that makes an ``n``-pixel image span the isocenter FOV."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return g.fov_width / n


def ray_lines(g: FanBeamGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Sources ``(K, 2)`` and unit directions ``(K, P, 2)`` of all central rays."""
    src = g.source_positions()
    det = g.detector_points(g.cell_centers())
    d = det - src[:, None, :]
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    return src, d


def point_line_distance(g: FanBeamGeometry, point) -> np.ndarray:
    """Perpendicular distance ``(K, P)`` from ``point`` to every central ray."""
    src, d = ray_lines(g)
    r = np.asarray(point, dtype=float)[None, None, :] - src[:, None, :]
    return np.abs(r[..., 0] * d[..., 1] - r[..., 1] * d[..., 0])
