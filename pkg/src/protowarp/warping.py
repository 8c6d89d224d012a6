"""
Bilateral signal warping of two heartbeats.

We look for an amplitude ratio r(t) and a time shift s(t) (in samples) such
that r(t) f(t) ~ g(t + s(t)), by minimizing on the sample grid

    L = sum (r f - g(t + s))^2
      + w_r sum (r')^2 + w_s sum (s')^2
      + w_o sum [(s_min - s)_+^2 + (s - s_max)_+^2]

with forward differences for the derivatives and g read at fractional
positions by linear interpolation, clamped at the edges.
"""

from dataclasses import dataclass
from typing import List, NamedTuple, Tuple

import numpy as np
from scipy import optimize

from .exceptions import (
    LengthMismatch,
    NonFiniteInput,
    NonPositiveRatio,
    StepUnderflow,
)
from .settings import WarpConfig

MIN_STEP = 1e-30


@dataclass(frozen=True, eq=False)
class WarpResult:
    r: np.ndarray
    s: np.ndarray
    loss: float
    converged: bool
    iters: int
    history: Tuple[float, ...] = ()

    def __post_init__(self):
        for name in ("r", "s"):
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)


class LossTerms(NamedTuple):
    misfit: float
    r_smooth: float
    s_smooth: float
    bound_penalty: float

    def total(self, cfg: WarpConfig) -> float:
        return (
            self.misfit
            + cfg.w_r * self.r_smooth
            + cfg.w_s * self.s_smooth
            + cfg.w_o * self.bound_penalty
        )


def interpolate(g: np.ndarray, positions: np.ndarray):
    """
    Values of `g` at fractional `positions` (clamped to the grid) and the slope
    of the interpolant there, zero where clamping is active.
    """
    last = g.size - 1
    clamped = np.clip(positions, 0.0, last)
    left = np.clip(np.floor(clamped).astype(int), 0, last - 1)
    frac = clamped - left
    values = g[left] * (1.0 - frac) + g[left + 1] * frac
    slope = np.where(
        (positions >= 0) & (positions <= last), g[left + 1] - g[left], 0.0
    )
    return values, slope


def _smoothness_gradient(x: np.ndarray) -> np.ndarray:
    d = np.diff(x)
    grad = np.zeros_like(x)
    grad[1:] += 2 * d
    grad[:-1] -= 2 * d
    return grad


def _check_pair(f, g) -> Tuple[np.ndarray, np.ndarray]:
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape or f.ndim != 1:
        raise LengthMismatch(
            "Beats must be 1-d and equally long, got {} and {}".format(
                f.shape, g.shape
            )
        )
    if f.size < 2:
        raise LengthMismatch("Beats need at least 2 samples")
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
        raise NonFiniteInput("Beats contain non-finite samples")
    return f, g


def loss_terms(f, g, r, s, cfg: WarpConfig = WarpConfig()) -> LossTerms:
    f, g = _check_pair(f, g)
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    if r.shape != f.shape or s.shape != f.shape:
        raise LengthMismatch(
            "r and s must match the beat length {}".format(f.size)
        )

    t = np.arange(f.size, dtype=float)
    warped, _ = interpolate(g, t + s)
    return LossTerms(
        misfit=float(np.sum((r * f - warped) ** 2)),
        r_smooth=float(np.sum(np.diff(r) ** 2)),
        s_smooth=float(np.sum(np.diff(s) ** 2)),
        bound_penalty=float(
            np.sum(
                np.maximum(cfg.s_min - s, 0.0) ** 2
                + np.maximum(s - cfg.s_max, 0.0) ** 2
            )
        ),
    )


def loss_and_gradient(f, g, r, s, cfg: WarpConfig):
    """Scalar loss and its analytic gradient with respect to (r, s)."""
    t = np.arange(f.size, dtype=float)
    warped, slope = interpolate(g, t + s)
    residual = r * f - warped
    below = np.maximum(cfg.s_min - s, 0.0)
    above = np.maximum(s - cfg.s_max, 0.0)

    loss = (
        np.sum(residual**2)
        + cfg.w_r * np.sum(np.diff(r) ** 2)
        + cfg.w_s * np.sum(np.diff(s) ** 2)
        + cfg.w_o * np.sum(below**2 + above**2)
    )

    grad_r = 2 * residual * f + cfg.w_r * _smoothness_gradient(r)
    grad_s = (
        -2 * residual * slope
        + cfg.w_s * _smoothness_gradient(s)
        + cfg.w_o * (2 * above - 2 * below)
    )
    return float(loss), grad_r, grad_s


def constant_start(f, g, cfg: WarpConfig = WarpConfig()) -> Tuple[float, int]:
    """
    The constant ratio and whole-sample shift with the least misfit, over
    every shift inside the bounds. The ratio at each shift is the least
    squares one, floored at `r_floor`. Constant functions carry no smoothness
    or bound penalty, so this is the global minimum of the loss among them.
    """
    f, g = _check_pair(f, g)
    shifts = np.arange(
        int(np.ceil(max(cfg.s_min, -(f.size - 1)))),
        int(np.floor(min(cfg.s_max, f.size - 1))) + 1,
    )
    t = np.arange(f.size)
    warped = g[np.clip(t[None, :] + shifts[:, None], 0, f.size - 1)]

    energy = float(f @ f)
    if energy == 0:
        return 1.0, 0
    ratios = np.maximum(warped @ f / energy, cfg.r_floor)
    misfit = np.sum((ratios[:, None] * f - warped) ** 2, axis=1)
    # Ties go to the smallest shift.
    best = np.lexsort((np.abs(shifts), misfit))[0]
    return float(ratios[best]), int(shifts[best])


def warp(f, g, cfg: WarpConfig = WarpConfig()) -> WarpResult:
    """
    Align beat `f` onto beat `g`. Descent starts from r = 1, s = 0, or from
    the best constant ratio and shift when that has a lower loss and
    `cfg.global_start` is set.
    """
    f, g = _check_pair(f, g)
    r = np.ones_like(f)
    s = np.zeros_like(f)

    loss, grad_r, grad_s = loss_and_gradient(f, g, r, s, cfg)
    if loss == 0 or not (np.any(grad_r) or np.any(grad_s)):
        return WarpResult(
            r=r, s=s, loss=loss, converged=True, iters=0, history=(loss,)
        )

    if cfg.global_start:
        ratio, shift = constant_start(f, g, cfg)
        r_start = np.full_like(f, ratio)
        s_start = np.full_like(f, float(shift))
        start = loss_and_gradient(f, g, r_start, s_start, cfg)
        if start[0] < loss:
            r, s = r_start, s_start
            loss, grad_r, grad_s = start
            if loss == 0:
                return WarpResult(
                    r=r,
                    s=s,
                    loss=loss,
                    converged=True,
                    iters=0,
                    history=(loss,),
                )

    if cfg.method == "descent":
        return _descent(f, g, r, s, loss, grad_r, grad_s, cfg)
    return _lbfgs(f, g, r, s, loss, cfg)


def _descent(f, g, r, s, loss, grad_r, grad_s, cfg: WarpConfig) -> WarpResult:
    """
    Gradient descent with backtracking: halve the step when the loss would
    increase (or is not finite), grow it after every accepted step.
    """
    step = cfg.step_size
    history = [loss]  # type: List[float]
    accepted = 0
    converged = False

    for _ in range(cfg.max_iters):
        r_new = np.maximum(r - step * grad_r, cfg.r_floor)
        s_new = s - step * grad_s
        new_loss, new_grad_r, new_grad_s = loss_and_gradient(
            f, g, r_new, s_new, cfg
        )

        if not np.isfinite(new_loss) or new_loss > loss:
            step /= 2
            if step < MIN_STEP:
                if not np.isfinite(new_loss):
                    raise StepUnderflow(
                        "Step underflowed while the loss was not finite"
                    )
                converged = True
                break
            continue

        decrease = (loss - new_loss) / max(loss, np.finfo(float).tiny)
        r, s, loss = r_new, s_new, new_loss
        grad_r, grad_s = new_grad_r, new_grad_s
        history.append(loss)
        accepted += 1
        step *= cfg.step_growth

        if decrease < cfg.rel_tol:
            converged = True
            break

    return WarpResult(
        r=r,
        s=s,
        loss=loss,
        converged=converged,
        iters=accepted,
        history=tuple(history),
    )


def _lbfgs(f, g, r, s, loss, cfg: WarpConfig) -> WarpResult:
    """
    Limited-memory BFGS on the same loss and gradient. The shift is optimised
    in units of `shift_scale` samples so both halves of the problem have
    comparable curvature; r is kept above `r_floor` by a bound.
    """
    n = f.size
    scale = cfg.shift_scale

    def split(z):
        return z[:n], z[n:] * scale

    def objective(z):
        r_, s_ = split(z)
        value, grad_r, grad_s = loss_and_gradient(f, g, r_, s_, cfg)
        return value, np.concatenate([grad_r, grad_s * scale])

    history = [loss]  # type: List[float]

    def record(z):
        history.append(objective(z)[0])

    z0 = np.concatenate([r, s / scale])
    result = optimize.minimize(
        objective,
        z0,
        jac=True,
        method="L-BFGS-B",
        bounds=[(cfg.r_floor, None)] * n + [(None, None)] * n,
        callback=record,
        options={
            "maxiter": cfg.max_iters,
            "ftol": cfg.rel_tol,
            "gtol": 1e-12,
            "maxcor": 20,
        },
    )

    r_opt, s_opt = split(result.x)
    final, _, _ = loss_and_gradient(f, g, r_opt, s_opt, cfg)
    if not np.isfinite(final):
        raise StepUnderflow("L-BFGS-B ended on a non-finite loss")
    if final > loss:
        # Never hand back a point worse than the start.
        r_opt, s_opt, final = r, s, loss

    return WarpResult(
        r=r_opt,
        s=s_opt,
        loss=final,
        converged=bool(result.success) and result.nit < cfg.max_iters,
        iters=int(result.nit),
        history=tuple(history),
    )


def merge_pair(f, g, result: WarpResult) -> np.ndarray:
    """
    Meet halfway: 1/2 (sqrt(r) f(t - s/2) + g(t + s/2) / sqrt(r)).
    """
    f, g = _check_pair(f, g)
    r = np.asarray(result.r, dtype=float)
    s = np.asarray(result.s, dtype=float)
    if r.shape != f.shape or s.shape != f.shape:
        raise LengthMismatch("Warp result does not match the beat length")
    if np.any(r <= 0):
        raise NonPositiveRatio("Amplitude ratio r must be strictly positive")

    t = np.arange(f.size, dtype=float)
    f_back, _ = interpolate(f, t - s / 2)
    g_forward, _ = interpolate(g, t + s / 2)
    root = np.sqrt(r)
    return 0.5 * (root * f_back + g_forward / root)
