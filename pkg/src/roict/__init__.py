"""Region-of-interest fan-beam CT reconstruction with sinogram-domain frame and TV regularization."""
from .geometry import FanBeamGeometry, fov_pixel_size, paper_geometry
from .metrics import MeritReport, psnr_roi, rel_err_roi
from .objective import ExplicitObjective, ImplicitObjective, make_objective
from .phantom import MODIFIED_SHEPP_LOGAN, Ellipse, Image, generate_phantom
from .projector import SystemMatrix, adjoint, assemble, forward
from .roi import RoiDisk, build_mask, offset_center, roi_pixels, truncate
from .sgp import SgpParams, SolveResult, early_stopped_solve, sgp_solve

__version__ = "0.1.0"

__all__ = [
    "Ellipse", "ExplicitObjective", "FanBeamGeometry", "Image", "ImplicitObjective",
    "MODIFIED_SHEPP_LOGAN", "MeritReport", "RoiDisk", "SgpParams", "SolveResult", "SystemMatrix",
    "adjoint", "assemble", "build_mask", "early_stopped_solve", "forward", "fov_pixel_size",
    "generate_phantom", "make_objective", "offset_center", "paper_geometry", "psnr_roi",
    "rel_err_roi", "roi_pixels", "sgp_solve", "truncate",
]
