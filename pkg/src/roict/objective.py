"""Implicit and explicit ROI objectives with analytic gradients.

Implicit, over the image ``f``::

    1/2 |M W f - y0|^2 + lam |Phi((I - M) W f + y0)|^2 + rho TV_delta(f)

Explicit, over ``(f, y)``::

    1/2 |M W f - y0|^2 + 1/2 |(I - M)(W f - y)|^2
        + lam |Phi((I - M) y + y0)|^2 + rho TV_delta(f)

``Phi`` is a Parseval frame acting on ``K x P`` sinograms, so
``|Phi z| = |z|`` and ``Phi^T Phi = I``.  By default the frame is elided
(``exact_frame=False``); with ``exact_frame=True`` it is applied literally.

Both objectives operate on flat vectors so the solver can treat them
uniformly: the image block is column-stacked and, for the explicit
formulation, followed by the row-major sinogram block.
"""
from __future__ import annotations

import numpy as np

from .projector import SystemMatrix, image_to_vector, vector_to_image
from .transforms.tv import tv_grad, tv_value


class _Base:
    has_sinogram = False

    def __init__(self, W: SystemMatrix, mask, y0, lam=0.0, rho=0.0, delta=1e-2,
                 frame=None, upper=None, exact_frame=False):
        K, P = W.geometry.num_views, W.geometry.num_cells
        mask = np.asarray(mask, dtype=bool)
        y0 = np.asarray(y0, dtype=float)
        if mask.shape != (K, P) or y0.shape != (K, P):
            raise ValueError(f"mask and data must have shape {(K, P)}")
        if lam < 0 or rho < 0:
            raise ValueError("regularization weights must be nonnegative")
        if not delta > 0:
            raise ValueError("TV smoothing parameter must be positive")
        if upper is not None and not upper > 0:
            raise ValueError("upper bound must be positive")
        self.W = W
        self.n = W.n
        self.mask = mask
        self.m = mask.astype(float).ravel()
        self.out = 1.0 - self.m
        self.y0 = y0.ravel()
        self.lam, self.rho, self.delta = float(lam), float(rho), float(delta)
        self.frame = frame
        self.upper = upper
        self.exact_frame = exact_frame
        self.shape = (K, P)

    # --- frame helpers -------------------------------------------------
    def frame_sq_norm(self, z):
        if self.frame is None or not self.exact_frame:
            return float(z @ z)
        c = self.frame.forward(z.reshape(self.shape))
        return float(np.sum(c * c))

    def frame_gram(self, z):
        """``Phi^T Phi z``."""
        if self.frame is None or not self.exact_frame:
            return z
        return self.frame.adjoint(self.frame.forward(z.reshape(self.shape))).ravel()

    # --- layout ----------------------------------------------------------
    @property
    def size(self) -> int:
        return self.n * self.n

    def image(self, x) -> np.ndarray:
        return vector_to_image(x[: self.size], self.n)

    def _tv(self, f_img):
        return self.rho * tv_value(f_img, self.delta) if self.rho else 0.0

    def _tv_grad(self, f_img):
        if not self.rho:
            return np.zeros(self.size)
        return self.rho * image_to_vector(tv_grad(f_img, self.delta))

    def bounds(self):
        """Lower and upper bound vectors for the solver."""
        lo = np.zeros(self.size)
        hi = np.full(self.size, np.inf if self.upper is None else self.upper)
        return lo, hi

    def scaled_components(self):
        """Mask of components whose scaling follows the iterate."""
        return np.ones(self.size, dtype=bool)

    def project_image(self, x):
        return self.W.matrix @ x[: self.size]

    # --- public API --------------------------------------------------------
    def value(self, x) -> float:
        return self._value(x, self.project_image(x))

    def grad(self, x) -> np.ndarray:
        return self._grad(x, self.project_image(x))

    def value_and_grad(self, x):
        wf = self.project_image(x)
        return self._value(x, wf), self._grad(x, wf), wf

    def grad_from(self, x, wx) -> np.ndarray:
        """Gradient at ``x`` given the precomputed projection ``wx = W f``."""
        return self._grad(x, wx)

    def line(self, x, d, wx):
        """Return ``phi(t) -> (value, W(x + t d))`` reusing ``W x`` and ``W d``."""
        wd = self.project_image(d)

        def phi(t):
            wt = wx + t * wd
            return self._value(x + t * d, wt), wt

        return phi


class ImplicitObjective(_Base):
    def _value(self, x, wf):
        f = x[: self.size]
        r = self.m * wf - self.y0
        z = self.out * wf + self.y0
        return 0.5 * float(r @ r) + self.lam * self.frame_sq_norm(z) + self._tv(vector_to_image(f, self.n))

    def _grad(self, x, wf):
        f = x[: self.size]
        r = self.m * wf - self.y0
        back = self.m * r
        if self.lam:
            z = self.out * wf + self.y0
            back = back + 2 * self.lam * self.out * self.frame_gram(z)
        return self.W.T @ back + self._tv_grad(vector_to_image(f, self.n))

    def initial_point(self, f0=None):
        return np.zeros(self.size) if f0 is None else image_to_vector(f0).copy()


class ExplicitObjective(_Base):
    has_sinogram = True

    @property
    def size_total(self) -> int:
        return self.size + self.y0.size

    def sinogram(self, x) -> np.ndarray:
        return x[self.size :].reshape(self.shape)

    def bounds(self):
        lo, hi = super().bounds()
        k = self.y0.size
        return np.concatenate([lo, np.zeros(k)]), np.concatenate([hi, np.full(k, np.inf)])

    def scaled_components(self):
        return np.concatenate([np.ones(self.size, dtype=bool), np.zeros(self.y0.size, dtype=bool)])

    def _value(self, x, wf):
        f, y = x[: self.size], x[self.size :]
        r1 = self.m * wf - self.y0
        r2 = self.out * (wf - y)
        z = self.out * y + self.y0
        return (0.5 * float(r1 @ r1) + 0.5 * float(r2 @ r2)
                + self.lam * self.frame_sq_norm(z) + self._tv(vector_to_image(f, self.n)))

    def _grad(self, x, wf):
        f, y = x[: self.size], x[self.size :]
        r1 = self.m * wf - self.y0
        r2 = self.out * (wf - y)
        g_f = self.W.T @ (self.m * r1 + self.out * r2) + self._tv_grad(vector_to_image(f, self.n))
        g_y = -self.out * r2
        if self.lam:
            z = self.out * y + self.y0
            g_y = g_y + 2 * self.lam * self.out * self.frame_gram(z)
        return np.concatenate([g_f, g_y])

    def initial_point(self, f0=None, y_init=None):
        f = np.zeros(self.size) if f0 is None else image_to_vector(f0)
        y = self.y0 if y_init is None else np.asarray(y_init, dtype=float).ravel()
        if np.any(y < 0):
            raise ValueError("initial sinogram must be nonnegative")
        return np.concatenate([f, y])


def make_objective(formulation: str, *args, **kwargs):
    if formulation == "implicit":
        return ImplicitObjective(*args, **kwargs)
    if formulation == "explicit":
        return ExplicitObjective(*args, **kwargs)
    raise ValueError(f"unknown formulation {formulation!r}")


def _image_vec(obj, f):
    f = np.asarray(f, dtype=float)
    if f.shape == (obj.n, obj.n):
        return image_to_vector(f)
    if f.shape != (obj.size,):
        raise ValueError(f"image shape {f.shape} does not match n={obj.n}")
    return f


def eval_implicit(obj: ImplicitObjective, f) -> float:
    return obj.value(_image_vec(obj, f))


def grad_implicit(obj: ImplicitObjective, f) -> np.ndarray:
    return vector_to_image(obj.grad(_image_vec(obj, f)), obj.n)


def _joint(obj, f, y):
    y = np.asarray(y, dtype=float)
    if y.shape not in (obj.shape, (obj.y0.size,)):
        raise ValueError(f"sinogram shape {y.shape} does not match {obj.shape}")
    return np.concatenate([_image_vec(obj, f), y.ravel()])


def eval_explicit(obj: ExplicitObjective, f, y) -> float:
    return obj.value(_joint(obj, f, y))


def grad_explicit(obj: ExplicitObjective, f, y):
    """Gradient blocks ``(g_f as n x n image, g_y as K x P sinogram)``."""
    g = obj.grad(_joint(obj, f, y))
    return vector_to_image(g[: obj.size], obj.n), g[obj.size :].reshape(obj.shape)
