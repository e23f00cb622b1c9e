"""Command-line interface: ``roict <subcommand> ...``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from . import io
from .geometry import FanBeamGeometry, fov_pixel_size, paper_geometry
from .metrics import evaluate
from .phantom import generate_phantom
from .projector import assemble, forward
from .roi import RoiDisk, build_mask, offset_center, roi_pixels, truncate

log = logging.getLogger("roict")


def _pair(text):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected X,Y but got {text!r}") from exc
    return x, y


def _add_geometry(p):
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--geometry", metavar="FILE.json", help="geometry JSON (views, cells, pitch_mm, ...)")
    grp.add_argument("--paper-geometry", action="store_true", help="built-in 182-view, 130-cell setup (default)")
    p.add_argument("--n", type=int, help="image side in pixels (default 128)")


def _add_roi(p):
    c = p.add_mutually_exclusive_group()
    c.add_argument("--roi-center-px", type=_pair, metavar="X,Y", help="ROI center offset from the isocenter, pixels")
    c.add_argument("--roi-center-mm", type=_pair, metavar="X,Y", help="ROI center in mm")
    c.add_argument("--roi-offset-center", action="store_true", help="use the fixed (+5%%, -5%% FOV) center")
    r = p.add_mutually_exclusive_group()
    r.add_argument("--roi-radius-px", type=float, metavar="R", help="ROI radius in pixels")
    r.add_argument("--roi-radius-mm", type=float, metavar="R", help="ROI radius in mm")
    r.add_argument("--gamma", type=float, metavar="FRAC", help="ROI radius as a fraction of n pixels")


def _add_config(p):
    p.add_argument("--config", metavar="FILE.json", help="JSON config; command-line flags take precedence")


def _load_config(args) -> dict:
    return io.load_json(args.config) if getattr(args, "config", None) else {}


def _geometry(args, cfg) -> FanBeamGeometry:
    if args.geometry:
        return FanBeamGeometry.from_json(args.geometry)
    if args.paper_geometry:
        return paper_geometry()
    geo = cfg.get("geometry")
    if isinstance(geo, dict):
        return FanBeamGeometry.from_dict(geo)
    return paper_geometry()


def _n(args, cfg) -> int:
    return args.n if args.n is not None else int(cfg.get("n", 128))


def _roi(args, cfg, g, n) -> RoiDisk:
    h = fov_pixel_size(g, n)
    if args.roi_center_px is not None:
        center = (args.roi_center_px[0] * h, args.roi_center_px[1] * h)
    elif args.roi_center_mm is not None:
        center = args.roi_center_mm
    elif args.roi_offset_center or cfg.get("roi_center") == "offset":
        center = offset_center(g)
    elif isinstance(cfg.get("roi_center"), list):
        center = tuple(cfg["roi_center"])
    else:
        center = (0.0, 0.0)
    if args.roi_radius_px is not None:
        radius = args.roi_radius_px * h
    elif args.roi_radius_mm is not None:
        radius = args.roi_radius_mm
    elif args.gamma is not None:
        radius = args.gamma * n * h
    elif "gamma" in cfg:
        radius = float(cfg["gamma"]) * n * h
    else:
        raise SystemExit("an ROI radius is required (--roi-radius-px, --roi-radius-mm or --gamma)")
    return RoiDisk(tuple(map(float, center)), float(radius))


def _truth(path, n):
    if path:
        f = io.read_grid(path)
        if f.shape[0] != f.shape[1]:
            raise SystemExit(f"{path}: image must be square")
        return f
    return generate_phantom(n).values


# --- subcommands ------------------------------------------------------------

def cmd_phantom(args):
    n = args.n if args.n is not None else 128
    img = generate_phantom(n).values
    if args.out:
        io.write_grid(args.out, img)
    if args.png:
        from .render import render
        render(img, args.png, window=(0.0, 1.0))
    if not (args.out or args.png):
        raise SystemExit("nothing to do: give --out and/or --png")


def cmd_project(args):
    cfg = _load_config(args)
    g = _geometry(args, cfg)
    f = _truth(args.image, _n(args, cfg))
    n = f.shape[0]
    W = assemble(g, n)
    y = forward(W, f)
    if args.out:
        io.write_grid(args.out, y)
    if args.matrix:
        io.write_matrix(args.matrix, W.matrix)
    if args.png:
        from .render import render
        render(y, args.png)
    log.info("projected %dx%d image: %d views x %d cells, nnz(W)=%d", n, n, g.K, g.P, W.matrix.nnz)


def cmd_mask(args):
    cfg = _load_config(args)
    g = _geometry(args, cfg)
    n = _n(args, cfg)
    roi = _roi(args, cfg, g, n)
    mask = build_mask(g, roi)
    if args.out:
        io.write_grid(args.out, mask.astype(float))
    if args.png:
        from .render import render, sinogram_overlay
        if args.sinogram:
            y = truncate(io.read_grid(args.sinogram), mask)
            render(y, args.png, overlay=sinogram_overlay(mask))
        else:
            render(mask.astype(float), args.png)
    print(f"{int(mask.sum())} of {mask.size} rays meet the ROI")


def cmd_reconstruct(args):
    from .objective import make_objective
    from .sgp import SgpParams, early_stopped_solve, sgp_solve
    from .transforms import make_frame

    cfg = _load_config(args)
    g = _geometry(args, cfg)
    n = _n(args, cfg)
    h = fov_pixel_size(g, n)
    roi = _roi(args, cfg, g, n)
    truth = _truth(args.truth, n) if (args.truth or not args.sinogram) else None
    if truth is not None and truth.shape[0] != n:
        raise SystemExit(f"ground truth is {truth.shape[0]} pixels wide but n={n}")
    W = assemble(g, n, h)
    y = io.read_grid(args.sinogram) if args.sinogram else forward(W, truth)
    mask = build_mask(g, roi)
    y0 = truncate(y, mask)

    def pick(flag, key, default):
        v = getattr(args, flag)
        return v if v is not None else cfg.get(key, default)

    formulation = pick("formulation", "formulation", "implicit")
    regularizer = pick("regularizer", "regularizer", "shearlet")
    lam = float(pick("lam", "lambda", 5e-4))
    rho = float(pick("rho", "rho", 1e-2))
    delta = float(pick("delta", "delta", 1e-2))
    if regularizer == "none":
        lam = 0.0
    sgp_cfg = dict(cfg.get("sgp", {}))
    if args.max_iter is not None:
        sgp_cfg["max_iter"] = args.max_iter
    if args.stop_tol is not None:
        sgp_cfg["stop_tol"] = args.stop_tol
    params = SgpParams(**sgp_cfg)
    obj = make_objective(formulation, W, mask, y0, lam=lam, rho=rho, delta=delta,
                         frame=make_frame(regularizer, g.K, g.P), upper=args.upper,
                         exact_frame=args.exact_frame)
    monitor = None
    rpix = roi_pixels(n, h, roi)
    if truth is not None and np.any(truth[rpix]):
        tn = float(np.linalg.norm(truth[rpix]))

        def monitor(f):
            return float(np.linalg.norm(f[rpix] - truth[rpix])) / tn

    if args.early_stop:
        res = early_stopped_solve(obj, params if args.max_iter is not None else None, monitor=monitor)
    else:
        res = sgp_solve(obj, params, monitor=monitor)
    io.write_grid(args.out, res.f_hat)
    if res.y_hat is not None and args.sinogram_out:
        io.write_grid(args.sinogram_out, res.y_hat)
    if args.log:
        res.write_log(args.log)
    if args.png:
        from .render import render, roi_circle_pixels
        render(res.f_hat, args.png, overlay=roi_circle_pixels(n, h, roi.center, roi.radius), window=(0.0, 1.0))
    if args.figure:
        from .plotting import convergence_figure, reconstruction_figure
        if truth is not None:
            reconstruction_figure(truth, res.f_hat, h, roi, path=args.figure)
        convergence_figure(res.log, path=args.figure.replace(".png", "") + "_convergence.png")
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["formulation", "regularizer", "lambda", "rho", "psnr_db", "rel_err", "iters", "reason"])
    if truth is not None and monitor is not None:
        rep = evaluate(res.f_hat, truth, rpix)
        w.writerow([formulation, regularizer, lam, rho, f"{rep.psnr_db:.4f}", f"{rep.rel_err:.6f}",
                    res.iterations, res.reason])
    else:
        w.writerow([formulation, regularizer, lam, rho, "", "", res.iterations, res.reason])


def cmd_metrics(args):
    cfg = _load_config(args)
    recon = io.read_grid(args.recon)
    truth = io.read_grid(args.truth)
    if recon.shape != truth.shape or recon.shape[0] != recon.shape[1]:
        raise SystemExit("reconstruction and ground truth must be square and of equal size")
    g = _geometry(args, cfg)
    n = recon.shape[0]
    roi = _roi(args, cfg, g, n)
    rpix = roi_pixels(n, fov_pixel_size(g, n), roi)
    rep = evaluate(recon, truth, rpix, args.mpv)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["psnr_db", "rel_err", "roi_pixels", "mpv", "iters", "params"])
    w.writerow([f"{rep.psnr_db:.4f}", f"{rep.rel_err:.6f}", rep.roi_pixel_count, rep.mpv,
                "" if args.iters is None else args.iters, args.params or ""])


def cmd_sweep(args):
    from .experiment import ExperimentConfig, run_experiment, with_overrides

    cfg = ExperimentConfig.from_dict(_load_config(args))
    over = {
        "n": args.n,
        "output_dir": args.out,
        "gammas": args.gammas,
        "formulations": args.formulations,
        "regularizers": args.regularizers,
        "lambdas": args.lambdas,
        "rhos": args.rhos,
        "delta": args.delta,
        "workers": args.workers,
        "seed": args.seed,
    }
    if args.geometry:
        over["geometry"] = FanBeamGeometry.from_json(args.geometry)
    elif args.paper_geometry:
        over["geometry"] = paper_geometry()
    if args.roi_offset_center:
        over["roi_center"] = "offset"
    elif args.roi_center_mm is not None:
        over["roi_center"] = args.roi_center_mm
    if args.no_timing:
        over["record_timing"] = False
    if args.no_figures:
        over["figures"] = False
    if args.early_stop:
        over["early_stopping"] = True
    if args.max_iter is not None:
        from dataclasses import replace
        over["sgp"] = replace(cfg.sgp, max_iter=args.max_iter)
    cfg = with_overrides(cfg, **over)
    run_experiment(cfg)
    with open(f"{cfg.output_dir}/summary.csv") as fh:
        sys.stdout.write(fh.read())
    with open(f"{cfg.output_dir}/config.json", "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="roict", description="Region-of-interest fan-beam CT reconstruction.")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="write the modified Shepp-Logan phantom")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--out", help="raw f64 output")
    p.add_argument("--png", help="8-bit rendering, [0, 1] mapped to [0, 255]")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("project", help="forward-project an image")
    _add_geometry(p)
    _add_config(p)
    p.add_argument("--image", help="raw f64 image (default: phantom of size --n)")
    p.add_argument("--out", help="raw f64 sinogram (views x cells)")
    p.add_argument("--matrix", help="dump the system matrix as sparse triplets")
    p.add_argument("--png")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("mask", help="projection-domain ROI mask")
    _add_geometry(p)
    _add_config(p)
    _add_roi(p)
    p.add_argument("--out", help="raw f64 mask (1 = ray meets the ROI)")
    p.add_argument("--png")
    p.add_argument("--sinogram", help="render this sinogram truncated, with the mask boundary")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("reconstruct", help="reconstruct from truncated projections")
    _add_geometry(p)
    _add_config(p)
    _add_roi(p)
    p.add_argument("--truth", help="raw f64 ground truth (default: phantom)")
    p.add_argument("--sinogram", help="raw f64 full sinogram (default: simulate from the truth)")
    p.add_argument("--formulation", choices=("implicit", "explicit"))
    p.add_argument("--regularizer", choices=("shearlet", "wavelet", "none"))
    p.add_argument("--lam", type=float, help="sinogram-domain regularization weight")
    p.add_argument("--rho", type=float, help="TV weight")
    p.add_argument("--delta", type=float, help="TV smoothing")
    p.add_argument("--upper", type=float, help="upper pixel bound")
    p.add_argument("--exact-frame", action="store_true", help="apply the frame explicitly")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--stop-tol", type=float)
    p.add_argument("--early-stop", action="store_true", help="unregularized run for a fixed budget")
    p.add_argument("--poisson-noise", action="store_true", help="reserved; not implemented")
    p.add_argument("--out", required=True, help="raw f64 reconstruction")
    p.add_argument("--sinogram-out", help="estimated full sinogram (explicit formulation)")
    p.add_argument("--log", help="iteration log CSV")
    p.add_argument("--png")
    p.add_argument("--figure", help="matplotlib report figure")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("metrics", help="ROI PSNR and relative error")
    _add_geometry(p)
    _add_config(p)
    _add_roi(p)
    p.add_argument("--recon", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--mpv", type=float, help="peak value (default: max of the truth)")
    p.add_argument("--iters", type=int, help="iteration count to echo in the output row")
    p.add_argument("--params", help="parameter label to echo in the output row")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("sweep", help="run a parameter grid")
    _add_geometry(p)
    _add_config(p)
    c = p.add_mutually_exclusive_group()
    c.add_argument("--roi-center-mm", type=_pair, metavar="X,Y")
    c.add_argument("--roi-offset-center", action="store_true")
    p.add_argument("--gammas", type=float, nargs="+")
    p.add_argument("--formulations", nargs="+", choices=("implicit", "explicit"))
    p.add_argument("--regularizers", nargs="+", choices=("shearlet", "wavelet", "none"))
    p.add_argument("--lambdas", type=float, nargs="+")
    p.add_argument("--rhos", type=float, nargs="+")
    p.add_argument("--delta", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--early-stop", action="store_true")
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--no-timing", action="store_true", help="leave the seconds column empty")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "poisson_noise", False):
        raise SystemExit("--poisson-noise is reserved and not implemented")
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(f"roict: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
