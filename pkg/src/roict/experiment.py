"""Grid experiments: simulate, truncate, reconstruct and score every parameter cell."""
from __future__ import annotations

import csv
import itertools
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import io
from .geometry import FanBeamGeometry, fov_pixel_size, paper_geometry
from .metrics import MeritReport, evaluate
from .objective import make_objective
from .phantom import generate_phantom
from .projector import assemble, forward
from .roi import RoiDisk, build_mask, offset_center, roi_pixels, truncate
from .sgp import SgpParams, early_stopped_solve, sgp_solve
from .transforms import make_frame

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("gamma_frac", "formulation", "regularizer", "lambda", "rho",
                   "psnr_db", "rel_err", "iters", "seconds")
FORMULATIONS = ("implicit", "explicit")
REGULARIZERS = ("shearlet", "wavelet", "none")


@dataclass
class ExperimentConfig:
    """One sweep over ``gammas x formulations x regularizers x lambdas x rhos``.

    ``roi_center`` is ``None`` (isocenter), ``"offset"`` (see
    :func:`roict.roi.offset_center`) or an ``(x, y)`` pair in mm.  ``gammas``
    are ROI radii as fractions of ``n`` pixels.  The ``none`` regularizer
    drops the sinogram term, so its lambda grid collapses to zero.
    """

    geometry: FanBeamGeometry = field(default_factory=paper_geometry)
    n: int = 128
    roi_center: object = None
    gammas: tuple = (0.5, 0.3, 0.15)
    formulations: tuple = ("implicit",)
    regularizers: tuple = ("shearlet",)
    lambdas: tuple = tuple(5 * 10.0**l for l in range(-4, 2))
    rhos: tuple = (1e-2, 1e-1, 1.0)
    delta: float = 1e-2
    sgp: SgpParams = field(default_factory=SgpParams)
    early_stopping: bool = False
    exact_frame: bool = False
    output_dir: str = "roict-out"
    seed: int = 0
    record_timing: bool = True
    figures: bool = True
    workers: int = 1

    def __post_init__(self):
        for name in ("gammas", "formulations", "regularizers", "lambdas", "rhos"):
            value = tuple(getattr(self, name))
            if not value:
                raise ValueError(f"{name} grid is empty")
            setattr(self, name, value)
        if any(not g > 0 for g in self.gammas):
            raise ValueError("ROI radii must be positive")
        if any(l < 0 for l in self.lambdas) or any(r < 0 for r in self.rhos):
            raise ValueError("regularization weights must be nonnegative")
        if bad := set(self.formulations) - set(FORMULATIONS):
            raise ValueError(f"unknown formulation(s) {sorted(bad)}")
        if bad := set(self.regularizers) - set(REGULARIZERS):
            raise ValueError(f"unknown regularizer(s) {sorted(bad)}")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not self.delta > 0:
            raise ValueError("TV smoothing parameter must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    @classmethod
    def from_dict(cls, cfg: dict) -> "ExperimentConfig":
        cfg = dict(cfg)
        known = {f.name for f in fields(cls)}
        if unknown := set(cfg) - known:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        geo = cfg.get("geometry")
        if geo is None or geo == "paper":
            cfg["geometry"] = paper_geometry()
        elif isinstance(geo, dict):
            cfg["geometry"] = FanBeamGeometry.from_dict(geo)
        if isinstance(cfg.get("sgp"), dict):
            cfg["sgp"] = SgpParams(**cfg["sgp"])
        if isinstance(cfg.get("roi_center"), list):
            cfg["roi_center"] = tuple(cfg["roi_center"])
        return cls(**cfg)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["geometry"] = self.geometry.to_dict()
        d["sgp"] = asdict(self.sgp)
        for k in ("gammas", "formulations", "regularizers", "lambdas", "rhos"):
            d[k] = list(d[k])
        return d

    def center_mm(self) -> tuple[float, float]:
        if self.roi_center is None:
            return (0.0, 0.0)
        if self.roi_center == "offset":
            return offset_center(self.geometry)
        x, y = self.roi_center
        return (float(x), float(y))

    def cells(self):
        """Parameter cells in a fixed order."""
        out = []
        for gam, form, reg in itertools.product(self.gammas, self.formulations, self.regularizers):
            lams = (0.0,) if reg == "none" else self.lambdas
            for lam, rho in itertools.product(lams, self.rhos):
                out.append((gam, form, reg, float(lam), float(rho)))
        return out


@dataclass
class CellResult:
    gamma_frac: float
    formulation: str
    regularizer: str
    lam: float
    rho: float
    report: MeritReport
    iterations: int
    seconds: float
    reason: str
    f_hat: np.ndarray = field(repr=False)
    log: list = field(repr=False, default_factory=list)

    def row(self, record_timing=True):
        return [repr(self.gamma_frac), self.formulation, self.regularizer, repr(self.lam), repr(self.rho),
                repr(self.report.psnr_db), repr(self.report.rel_err), self.iterations,
                f"{self.seconds:.3f}" if record_timing else ""]


class Context:
    """Read-only data shared by all cells: operator, phantom and clean sinogram."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        g = cfg.geometry
        self.pixel_size = fov_pixel_size(g, cfg.n)
        self.truth = generate_phantom(cfg.n, pixel_size=self.pixel_size).values
        self.W = assemble(g, cfg.n, self.pixel_size)
        self.y = forward(self.W, self.truth)
        self._frames = {}

    def frame(self, kind):
        if kind not in self._frames:
            g = self.cfg.geometry
            self._frames[kind] = make_frame(kind, g.num_views, g.num_cells)
        return self._frames[kind]

    def roi(self, gamma_frac) -> RoiDisk:
        return RoiDisk(self.cfg.center_mm(), gamma_frac * self.cfg.n * self.pixel_size)

    def solve(self, cell) -> CellResult:
        gam, form, reg, lam, rho = cell
        cfg = self.cfg
        roi = self.roi(gam)
        mask = build_mask(cfg.geometry, roi)
        y0 = truncate(self.y, mask)
        rpix = roi_pixels(cfg.n, self.pixel_size, roi)
        truth_roi = self.truth[rpix]
        norm = float(np.linalg.norm(truth_roi))

        def monitor(f):
            return float(np.linalg.norm(f[rpix] - truth_roi)) / norm if norm else float("nan")

        obj = make_objective(form, self.W, mask, y0, lam=lam, rho=rho, delta=cfg.delta,
                             frame=self.frame(reg), exact_frame=cfg.exact_frame)
        t0 = time.perf_counter()
        if cfg.early_stopping:
            res = early_stopped_solve(obj, cfg.sgp, monitor=monitor)
        else:
            res = sgp_solve(obj, cfg.sgp, monitor=monitor)
        seconds = time.perf_counter() - t0
        report = evaluate(res.f_hat, self.truth, rpix)
        log.info("gamma=%g %s %s lam=%g rho=%g: %.2f dB, rel %.4f, %d iters",
                 gam, form, reg, lam, rho, report.psnr_db, report.rel_err, res.iterations)
        return CellResult(gam, form, reg, lam, rho, report, res.iterations, seconds, res.reason,
                          res.f_hat, res.log)


_WORKER_CTX = None


def _worker_init(cfg):
    global _WORKER_CTX
    _WORKER_CTX = Context(cfg)


def _worker_solve(cell):
    return _WORKER_CTX.solve(cell)


def cell_stem(cell) -> str:
    gam, form, reg, lam, rho = cell
    return f"g{gam:g}_{form}_{reg}_lam{lam:g}_rho{rho:g}"


def write_summary(results, path, record_timing=True):
    """CSV sorted by decreasing PSNR; ties keep grid order."""
    order = sorted(range(len(results)), key=lambda i: -results[i].report.psnr_db)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for i in order:
            w.writerow(results[i].row(record_timing))


def _write_cell(ctx, res: CellResult, outdir: Path, figures: bool):
    from .plotting import convergence_figure, reconstruction_figure
    from .render import render, roi_circle_pixels

    cell = (res.gamma_frac, res.formulation, res.regularizer, res.lam, res.rho)
    stem = outdir / cell_stem(cell)
    roi = ctx.roi(res.gamma_frac)
    io.write_grid(f"{stem}.f64", res.f_hat)
    overlay = roi_circle_pixels(ctx.cfg.n, ctx.pixel_size, roi.center, roi.radius)
    render(res.f_hat, f"{stem}.png", overlay=overlay, window=(0.0, 1.0))
    from .sgp import write_iteration_log
    write_iteration_log(res.log, f"{stem}_log.csv")
    if figures:
        reconstruction_figure(ctx.truth, res.f_hat, ctx.pixel_size, roi, path=f"{stem}_report.png",
                              title=f"{cell_stem(cell)}: {res.report.psnr_db:.2f} dB")
        convergence_figure(res.log, path=f"{stem}_convergence.png")


def run_experiment(cfg: ExperimentConfig, write=True):
    """Run every cell of ``cfg``; returns the list of :class:`CellResult` in grid order.

    With ``write`` the output directory receives per-cell reconstructions,
    renderings, iteration logs, report figures and ``summary.csv``.
    """
    cells = cfg.cells()
    outdir = Path(cfg.output_dir)
    if write:
        outdir.mkdir(parents=True, exist_ok=True)
        if not os.access(outdir, os.W_OK):
            raise PermissionError(f"output directory {outdir} is not writable")
    ctx = Context(cfg)
    if cfg.workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(cfg.workers, initializer=_worker_init, initargs=(cfg,)) as pool:
            results = list(pool.map(_worker_solve, cells))
    else:
        results = [ctx.solve(c) for c in cells]
    if write:
        for res in results:
            _write_cell(ctx, res, outdir, cfg.figures)
        write_summary(results, outdir / "summary.csv", cfg.record_timing)
        from .render import render as _render, sinogram_overlay
        _render(ctx.truth, outdir / "phantom.png", window=(0.0, 1.0))
        for gam in cfg.gammas:
            mask = build_mask(cfg.geometry, ctx.roi(gam))
            _render(truncate(ctx.y, mask), outdir / f"sinogram_g{gam:g}.png", overlay=sinogram_overlay(mask))
    return results


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    kw = {k: v for k, v in kw.items() if v is not None}
    return replace(cfg, **kw)
