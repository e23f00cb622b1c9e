"""Distance-driven fan-beam system matrix.

For every view, the pixel boundaries of each image row (or column) and the
detector cell boundaries are projected from the source onto a common axis
through the isocenter.  The overlap of a pixel footprint with a cell
footprint, divided by the cell footprint, is the resampling weight; it is
then scaled by the length of the central ray of the cell inside one pixel
strip so that ``W @ f`` approximates a line integral in mm.

Indexing follows the sinogram row index ``k * P + p`` and a column-stacked
image, i.e. pixel ``(i, j)`` of an ``n x n`` image is column ``j * n + i``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import FanBeamGeometry, fov_pixel_size

log = logging.getLogger(__name__)


def _check_increasing(x, name):
    if x.ndim < 1 or x.shape[-1] < 2 or np.any(np.diff(x, axis=-1) <= 0):
        raise ValueError(f"{name} must be strictly increasing")


def segment_overlaps(src_bounds, dst_bounds):
    """Pairwise overlap lengths of two interval partitions, batched over rows.

    Parameters
    ----------
    src_bounds : array, shape (R, A)
        Strictly increasing source boundaries per row.
    dst_bounds : array, shape (R, B) or (B,)
        Strictly increasing destination boundaries (shared if 1-D).

    Returns
    -------
    row, m, n, length : ndarrays
        One entry per non-empty overlap between source interval ``m`` and
        destination interval ``n`` of row ``row``.
    """
    src = np.atleast_2d(np.asarray(src_bounds, dtype=float))
    dst = np.asarray(dst_bounds, dtype=float)
    if dst.ndim == 1:
        dst = np.broadcast_to(dst, (src.shape[0], dst.size))
    na, nb = src.shape[1], dst.shape[1]
    pts = np.concatenate([src, dst], axis=1)
    is_src = np.concatenate([np.ones(na, dtype=np.int64), np.zeros(nb, dtype=np.int64)])
    order = np.argsort(pts, axis=1, kind="stable")
    sorted_pts = np.take_along_axis(pts, order, axis=1)
    flags = is_src[order]
    # interval index of the segment that starts at each merged point
    m = np.cumsum(flags, axis=1)[:, :-1] - 1
    n = np.cumsum(1 - flags, axis=1)[:, :-1] - 1
    length = np.diff(sorted_pts, axis=1)
    keep = (m >= 0) & (m < na - 1) & (n >= 0) & (n < nb - 1) & (length > 0)
    row = np.broadcast_to(np.arange(src.shape[0])[:, None], keep.shape)
    return row[keep], m[keep], n[keep], length[keep]


def dd_kernel(source_bounds, source_values, dest_bounds):
    """Distance-driven resampling of a piecewise-constant signal.

    ``b[n] = sum_m c[m] * overlap(m, n) / (v[n+1] - v[n])``.
    """
    xi = np.asarray(source_bounds, dtype=float)
    c = np.asarray(source_values, dtype=float)
    ups = np.asarray(dest_bounds, dtype=float)
    if xi.ndim != 1 or ups.ndim != 1:
        raise ValueError("boundaries must be 1-D")
    _check_increasing(xi, "source bounds")
    _check_increasing(ups, "destination bounds")
    if c.shape != (xi.size - 1,):
        raise ValueError("need one source value per source interval")
    _, m, n, length = segment_overlaps(xi, ups)
    w = length / np.diff(ups)[n]
    return np.bincount(n, weights=w * c[m], minlength=ups.size - 1)


def _ascending(bounds):
    """Flip rows that run downward; return bounds and a per-row flip flag."""
    flip = bounds[:, -1] < bounds[:, 0]
    out = np.where(flip[:, None], bounds[:, ::-1], bounds)
    return out, flip


def _view_entries(g, n, h, k):
    """Triplets (cell, pixel, weight) contributed by view ``k``."""
    theta = g.view_angles[k]
    sx, sy = g.sad * np.cos(theta), g.sad * np.sin(theta)
    det = g.detector_points(g.cell_boundaries())[k]
    det_c = g.detector_points(g.cell_centers())[k]
    ray = det_c - np.array([sx, sy])
    ray_len = np.hypot(ray[:, 0], ray[:, 1])

    coords = (np.arange(n + 1) - n / 2) * h  # pixel edges along x (or y)
    strips = (n / 2 - np.arange(n) - 0.5) * h  # row centers y_i, top row first
    if abs(np.sin(theta)) >= abs(np.cos(theta)):
        # rows: project onto y = 0
        cell_axis = sx + (det[:, 0] - sx) * (-sy) / (det[:, 1] - sy)
        scale = (-sy) / (strips - sy)
        pix_axis = sx + (coords[None, :] - sx) * scale[:, None]
        cos_phi = np.abs(ray[:, 1]) / ray_len
        # strip r = row i; pixel index along the row is column j
        to_col = lambda strip, m: m * n + strip  # noqa: E731
    else:
        # columns: project onto x = 0; column j centers are x = -strips[::-1]
        centers = -strips
        cell_axis = sy + (det[:, 1] - sy) * (-sx) / (det[:, 0] - sx)
        scale = (-sx) / (centers - sx)
        ycoords = -coords  # y edges from the top of the image downward
        pix_axis = sy + (ycoords[None, :] - sy) * scale[:, None]
        cos_phi = np.abs(ray[:, 0]) / ray_len
        # strip r = column j; pixel index along the column is row i
        to_col = lambda strip, m: strip * n + m  # noqa: E731

    cells, cflip = _ascending(cell_axis[None, :])
    pix, pflip = _ascending(pix_axis)
    strip, m, c, length = segment_overlaps(pix, cells[0])
    m = np.where(pflip[strip], n - 1 - m, m)
    if cflip[0]:
        c = g.num_cells - 1 - c
    cell_width = np.abs(np.diff(cell_axis))
    w = length / cell_width[c] * (h / cos_phi[c])
    return k * g.num_cells + c, to_col(strip, m), w


@dataclass
class SystemMatrix:
    """Sparse ``KP x N^2`` forward operator with cached transpose."""

    matrix: sp.csr_matrix
    geometry: FanBeamGeometry
    n: int
    pixel_size: float

    def __post_init__(self):
        self._t = self.matrix.T.tocsr()

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def T(self) -> sp.csr_matrix:
        return self._t

    def forward(self, f):
        return forward(self, f)

    def adjoint(self, y):
        return adjoint(self, y)


def assemble(g: FanBeamGeometry, n: int, pixel_size: float | None = None) -> SystemMatrix:
    """Assemble the distance-driven matrix for an ``n x n`` image.

    ``pixel_size`` defaults to the isocenter field of view divided by ``n``.
    """
    if int(n) != n or n < 2:
        raise ValueError("image size must be an integer >= 2")
    n = int(n)
    h = fov_pixel_size(g, n) if pixel_size is None else float(pixel_size)
    if h <= 0:
        raise ValueError("pixel size must be positive")
    if g.sad <= np.sqrt(2) * n * h / 2:
        raise ValueError("source trajectory intersects the image support")
    rows, cols, vals = [], [], []
    for k in range(g.num_views):
        r, c, w = _view_entries(g, n, h, k)
        rows.append(r)
        cols.append(c)
        vals.append(w)
    W = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(g.num_views * g.num_cells, n * n),
    ).tocsr()
    W.sum_duplicates()
    W.eliminate_zeros()
    log.debug("assembled W %s with %d nonzeros", W.shape, W.nnz)
    return SystemMatrix(W, g, n, h)


def image_to_vector(f) -> np.ndarray:
    """Column-stack an ``n x n`` image."""
    return np.asarray(f, dtype=float).ravel(order="F")


def vector_to_image(x, n: int) -> np.ndarray:
    return np.asarray(x).reshape((n, n), order="F")


def forward(W: SystemMatrix, f) -> np.ndarray:
    """Project an image (``n x n`` array or column-stacked vector) to a ``K x P`` sinogram."""
    f = np.asarray(f, dtype=float)
    if f.shape == (W.n, W.n):
        f = image_to_vector(f)
    if f.shape != (W.n * W.n,):
        raise ValueError(f"image shape {f.shape} does not match n={W.n}")
    return (W.matrix @ f).reshape(W.geometry.num_views, W.geometry.num_cells)


def adjoint(W: SystemMatrix, y) -> np.ndarray:
    """Backproject a sinogram (``K x P`` or length ``KP``) to an ``n x n`` image."""
    y = np.asarray(y, dtype=float)
    K, P = W.geometry.num_views, W.geometry.num_cells
    if y.shape not in ((K, P), (K * P,)):
        raise ValueError(f"sinogram shape {y.shape} does not match ({K}, {P})")
    return vector_to_image(W.T @ y.ravel(), W.n)
