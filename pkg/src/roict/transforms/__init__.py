"""Sinogram-domain frames and the image-domain TV functional."""
from .shearlet import ShearletSystem, build_shearlet_system, sh_adjoint, sh_forward
from .tv import tv_grad, tv_value
from .wavelet import UndecimatedDb4, wavelet_adjoint, wavelet_forward


def make_frame(kind: str, rows: int, cols: int, num_scales: int = 3):
    """Frame object with ``forward``/``adjoint`` for ``kind`` in {shearlet, wavelet, none}."""
    if kind == "shearlet":
        return build_shearlet_system(rows, cols, num_scales)
    if kind == "wavelet":
        return UndecimatedDb4(rows, cols)
    if kind == "none":
        return None
    raise ValueError(f"unknown regularizer {kind!r}")


__all__ = [
    "ShearletSystem",
    "UndecimatedDb4",
    "build_shearlet_system",
    "make_frame",
    "sh_adjoint",
    "sh_forward",
    "tv_grad",
    "tv_value",
    "wavelet_adjoint",
    "wavelet_forward",
]
