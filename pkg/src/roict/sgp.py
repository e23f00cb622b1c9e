"""Scaled gradient projection with alternating Barzilai-Borwein steps.

Each iteration computes ``z = P(x - alpha D grad)``, takes ``d = z - x`` and
backtracks along ``d`` with a nonmonotone Armijo rule against the largest
objective value of the last ``memory`` iterates.  ``D`` is diagonal: the
iterate clamped to ``[1/sigma, sigma]`` on scaled components (the image) and
one elsewhere (the sinogram block of the explicit problem).  Box projection
is a componentwise clamp, which is also the ``D^{-1}``-norm projection
because ``D`` is diagonal.
"""
from __future__ import annotations

import csv
import logging
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SgpParams:
    beta: float = 1e-4
    gamma: float = 0.4
    memory: int = 10
    alpha_min: float = 1e-10
    alpha_max: float = 1e5
    alpha0: float = 1.3
    sigma: float = 1e6
    max_iter: int = 1000
    stop_tol: float = 1e-7
    bb_switch_threshold: float = 0.15
    bb_memory: int = 3
    max_backtracks: int = 50

    def __post_init__(self):
        if not 0 < self.alpha_min < self.alpha_max:
            raise ValueError("require 0 < alpha_min < alpha_max")
        if not (0 < self.beta < 1 and 0 < self.gamma < 1):
            raise ValueError("beta and gamma must lie in (0, 1)")
        if self.memory < 1 or self.bb_memory < 1:
            raise ValueError("memories must be positive integers")
        if not self.sigma > 1:
            raise ValueError("scaling threshold sigma must exceed 1")
        if not 0 < self.bb_switch_threshold < 1:
            raise ValueError("BB switch threshold must lie in (0, 1)")
        if self.max_iter < 0 or self.stop_tol < 0:
            raise ValueError("max_iter and stop_tol must be nonnegative")


@dataclass
class SolveResult:
    x: np.ndarray
    f_hat: np.ndarray
    y_hat: np.ndarray | None
    iterations: int
    reason: str
    psi0: float
    log: list = field(default_factory=list)

    def write_log(self, path):
        write_iteration_log(self.log, path)


LOG_COLUMNS = ("iter", "psi", "step_alpha", "lambda_ls", "backtracks", "grad_norm", "roi_rel_err")


def write_iteration_log(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LOG_COLUMNS)
        for r in records:
            w.writerow([r["iter"], repr(r["psi"]), repr(r["alpha"]), repr(r["lambda"]), r["backtracks"],
                        repr(r["grad_norm"]), "" if r.get("roi_rel_err") is None else repr(r["roi_rel_err"])])


def project_box(x, lower=0.0, upper=None):
    """Clamp ``x`` into ``[lower, upper]`` componentwise."""
    x = np.asarray(x, dtype=float)
    if upper is not None and np.any(np.asarray(lower) > np.asarray(upper)):
        raise ValueError("lower bound exceeds upper bound")
    return np.clip(x, lower, np.inf if upper is None else upper)


def update_scaling(x, sigma, scaled=None):
    """Diagonal scaling ``min(sigma, max(1/sigma, x_i))``; ones where ``scaled`` is false."""
    d = np.clip(np.asarray(x, dtype=float), 1.0 / sigma, sigma)
    if scaled is not None:
        d = np.where(scaled, d, 1.0)
    return d


def bb_steplengths(s, z, d, alpha_min, alpha_max, return_validity=False):
    """Scaled BB1 and BB2 steps for differences ``s`` (iterates) and ``z`` (gradients).

    Nonpositive or non-finite curvature falls back to ``alpha_max`` for BB1
    and ``alpha_min`` for BB2.  With ``return_validity`` a third value tells
    whether BB2 came from a genuine curvature estimate.
    """
    s = np.ravel(s)
    z = np.ravel(z)
    d = np.ravel(d)
    sd = s / d
    den1 = float(sd @ z)
    num1 = float(sd @ sd)
    if den1 > 0 and np.isfinite(den1) and np.isfinite(num1):
        bb1 = num1 / den1
    else:
        bb1 = alpha_max
    dz = d * z
    num2 = float(s @ dz)
    den2 = float(dz @ dz)
    valid2 = bool(num2 > 0 and den2 > 0 and np.isfinite(num2) and np.isfinite(den2))
    bb2 = num2 / den2 if valid2 else alpha_min
    out = float(np.clip(bb1, alpha_min, alpha_max)), float(np.clip(bb2, alpha_min, alpha_max))
    return (*out, valid2) if return_validity else out


class StepSelector:
    """Adaptive alternation between BB1 and a recent minimum of BB2 values.

    BB2 fallbacks are not remembered: a single ``alpha_min`` in the memory
    would be selected again and again and freeze the iteration.
    """

    def __init__(self, threshold=0.15, memory=3, shrink=0.9, grow=1.1):
        self.threshold = threshold
        self.bb2_history = deque(maxlen=memory)
        self.shrink, self.grow = shrink, grow

    def __call__(self, bb1, bb2, remember=True):
        if remember:
            self.bb2_history.append(bb2)
        if bb2 / bb1 <= self.threshold:
            alpha = min(self.bb2_history) if self.bb2_history else bb1
            self.threshold *= self.shrink
        else:
            alpha = bb1
            self.threshold *= self.grow
        self.threshold = float(np.clip(self.threshold, 1e-6, 1 - 1e-6))
        return alpha


def select_steplength(selector: StepSelector, bb1, bb2):
    return selector(bb1, bb2)


def sgp_solve(obj, params: SgpParams = SgpParams(), f0=None, y_init=None, monitor=None) -> SolveResult:
    """Minimize ``obj`` over its feasible box.

    ``monitor(image) -> float`` is called on every accepted iterate and its
    value stored as ``roi_rel_err`` in the log.
    """
    if obj.has_sinogram:
        x = obj.initial_point(f0, y_init)
    else:
        x = obj.initial_point(f0)
    lo, hi = obj.bounds()
    if np.any(x < lo) or np.any(x > hi):
        raise ValueError("starting point is not feasible")
    scaled = obj.scaled_components()
    val, g, wx = obj.value_and_grad(x)
    if not np.isfinite(val):
        raise ValueError("objective is not finite at the starting point")
    psi0 = val
    history = deque([val], maxlen=params.memory)
    selector = StepSelector(params.bb_switch_threshold, params.bb_memory)
    alpha = float(np.clip(params.alpha0, params.alpha_min, params.alpha_max))
    dscale = update_scaling(x, params.sigma, scaled)
    records = []
    reason = "max_iter"
    k = 0
    while k < params.max_iter:
        z = np.clip(x - alpha * dscale * g, lo, hi)
        d = z - x
        dnorm = float(np.linalg.norm(d))
        xnorm = max(1.0, float(np.linalg.norm(x)))
        if dnorm == 0.0:
            reason = "stationary"
            break
        if dnorm <= params.stop_tol * xnorm:
            reason = "tol"
            break
        gd = float(g @ d)
        if not gd < 0:
            # rounding can only do this once d is negligible
            log.warning("non-descent direction at iteration %d (g.d = %g)", k, gd)
            reason = "stationary"
            break
        psi_max = max(history)
        phi = obj.line(x, d, wx)
        lam = 1.0
        nback = 0
        while True:
            new_val, new_wx = phi(lam)
            if new_val <= psi_max + params.beta * lam * gd:
                break
            nback += 1
            lam *= params.gamma
            # a step lost in rounding would be accepted vacuously
            if nback > params.max_backtracks or lam * dnorm <= np.finfo(float).eps * xnorm:
                raise RuntimeError(
                    f"line search failed after {nback} reductions at iteration {k}; "
                    "the gradient is probably inconsistent with the objective")
        x_new = np.clip(x + lam * d, lo, hi)
        g_new = obj.grad_from(x_new, new_wx)
        k += 1
        rec = {
            "iter": k,
            "psi": new_val,
            "psi_max": psi_max,
            "alpha": alpha,
            "lambda": lam,
            "backtracks": nback,
            "grad_norm": float(np.linalg.norm(g)),
            "d_norm": dnorm,
            "gtd": gd,
            "scale_min": float(dscale.min()),
            "scale_max": float(dscale.max()),
            "infeasibility": float(max(np.max(lo - x_new), np.max(x_new - hi), 0.0)),
        }
        if monitor is not None:
            rec["roi_rel_err"] = float(monitor(obj.image(x_new)))
        records.append(rec)

        s_vec, z_vec = x_new - x, g_new - g
        x, g, wx, val = x_new, g_new, new_wx, new_val
        history.append(val)
        dscale = update_scaling(x, params.sigma, scaled)
        bb1, bb2, ok = bb_steplengths(s_vec, z_vec, dscale, params.alpha_min, params.alpha_max,
                                      return_validity=True)
        alpha = selector(bb1, bb2, remember=ok)

    y_hat = obj.sinogram(x).copy() if obj.has_sinogram else None
    log.info("SGP stopped after %d iterations (%s), psi=%.6g", k, reason, val)
    return SolveResult(x, obj.image(x).copy(), y_hat, k, reason, psi0, records)


def early_stopped_solve(obj, params: SgpParams | None = None, **kwargs) -> SolveResult:
    """Unregularized SGP run for a fixed budget (default 7000 iterations)."""
    if obj.lam != 0 or obj.rho != 0:
        raise ValueError("early stopping runs on the unregularized objective (lam = rho = 0)")
    params = SgpParams(max_iter=7000, stop_tol=0.0) if params is None else replace(params, stop_tol=0.0)
    return sgp_solve(obj, params, **kwargs)
