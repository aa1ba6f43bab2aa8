"""Proximal linearized solver for the DC objective f = g - h.

Outer loop: at iterate alpha_k, the concave side is linearized through
omega_k = grad_h(alpha_k) and the next iterate solves the strongly convex
subproblem

    min_a  loss(a) + (lam/2)||B a||^2 + lam1 ||a||_1
           - omega_k^T (a - alpha_k) + (1/(2 gamma_k)) ||a - alpha_k||^2

The outer loop stops when max(||a_{k+1} - a_k||, |f_k - f_{k+1}|) falls
below epsilon_outer, or at max_outer.

Inner loop: accelerated proximal gradient (momentum restart on objective
increase) with the fixed step 1/L_phi from :func:`smooth_lipschitz_bound`,
warm-started at alpha_k.  Convergence is certified by the proximal
fixed-point residual ||a - S_{t*lam1}(a - t grad_phi(a))||_inf, evaluated
at the point actually returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InputError, NumericalError
from .objective import (
    DcObjective,
    ProxParams,
    f_value,
    grad_h,
    sigmoid,
    soft_threshold,
    softplus,
)

CONVERGED = "converged"
MAX_ITERATIONS = "max_iterations"

RATE_OK = "ok"
RATE_INSUFFICIENT = "insufficient_data"
RATE_DEGENERATE = "degenerate"


@dataclass
class SolverConfig:
    """Tolerances and iteration caps for the outer and inner loops.

    ``gamma`` is the proximal weight: a positive constant or a callable
    mapping the outer iteration index k to a positive value.
    """

    gamma: float | Callable[[int], float] = 1.0
    epsilon_outer: float = 1e-4
    max_outer: int = 500
    epsilon_inner: float = 1e-8
    max_inner: int = 5000
    alpha0: np.ndarray | None = None
    # Iterate-norm cap: the objective is unbounded below for strongly
    # indefinite Grams, and runaway iterates signal exactly that.
    divergence_norm: float = 1e12

    def __post_init__(self) -> None:
        if not callable(self.gamma):
            _check_gamma(float(self.gamma))
        for name in ("epsilon_outer", "epsilon_inner", "divergence_norm"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise InputError(f"{name} must be positive, got {val}")
        for name in ("max_outer", "max_inner"):
            val = getattr(self, name)
            if not (isinstance(val, int) and val >= 1):
                raise InputError(f"{name} must be a positive integer, got {val}")
        if self.alpha0 is not None:
            a0 = np.asarray(self.alpha0, dtype=np.float64)
            if a0.ndim != 1 or not np.all(np.isfinite(a0)):
                raise InputError("alpha0 must be a finite 1-D vector")
            self.alpha0 = a0

    def gamma_at(self, k: int) -> float:
        g = float(self.gamma(k)) if callable(self.gamma) else float(self.gamma)
        _check_gamma(g)
        return g


def _check_gamma(g: float) -> None:
    if not (np.isfinite(g) and g > 0):
        raise InputError(f"gamma must be positive and finite, got {g}")


@dataclass(frozen=True)
class InnerResult:
    """Outcome of one subproblem solve."""

    alpha: np.ndarray
    iterations: int
    residual: float
    converged: bool


@dataclass
class SolveTrace:
    """Per-outer-iteration diagnostics of a pla_fit run.

    ``f_values`` and ``iterates`` carry the initial point, so they are one
    longer than the per-step lists.
    """

    f_values: list[float] = field(default_factory=list)
    step_norms: list[float] = field(default_factory=list)
    stationarity_residuals: list[float] = field(default_factory=list)
    inner_iterations: list[int] = field(default_factory=list)
    inner_converged: list[bool] = field(default_factory=list)
    iterates: list[np.ndarray] = field(default_factory=list)
    status: str = MAX_ITERATIONS

    @property
    def num_iterations(self) -> int:
        return len(self.step_norms)

    def to_records(self) -> list[dict]:
        """One structured row per outer iteration, for export/plotting."""
        return [
            {
                "iteration": k + 1,
                "objective": self.f_values[k + 1],
                "step_norm": self.step_norms[k],
                "stationarity_residual": self.stationarity_residuals[k],
                "inner_iterations": self.inner_iterations[k],
                "inner_converged": self.inner_converged[k],
            }
            for k in range(self.num_iterations)
        ]


def smooth_lipschitz_bound(obj: DcObjective, gamma: float) -> float:
    """Upper bound on the Lipschitz constant of the subproblem's smooth part.

    Sum of the three smooth pieces' curvature bounds: the logistic loss
    contributes ||K||_2^2 / (4n), the quadratic lam * ||K+||_2, and the
    proximal term 1/gamma.  ||K||_2 is max(|mu_1|, |mu_n|) and
    ||K+||_2 = max(mu_1, 0) + tau, both exact from the stored spectrum.
    """
    _check_gamma(gamma)
    eig = obj.decomp.eigenvalues
    spec_norm = max(abs(float(eig[0])), abs(float(eig[-1])))
    kplus_norm = max(float(eig[0]), 0.0) + obj.decomp.tau
    return spec_norm**2 / (4.0 * obj.n) + obj.lam * kplus_norm + 1.0 / gamma


def _phi_value_grad(
    obj: DcObjective,
    alpha: np.ndarray,
    omega: np.ndarray,
    anchor: np.ndarray,
    gamma: float,
) -> tuple[float, np.ndarray]:
    """Value and gradient of the subproblem's smooth part phi at alpha."""
    gram = obj.decomp.gram
    # Overflow here is diagnosed by the caller via non-finite values.
    with np.errstate(over="ignore", invalid="ignore"):
        scores = gram @ alpha
        margins = obj.y_signed * scores
        loss = float(np.mean(softplus(-margins)))
        kp_a = obj.decomp.kplus @ alpha
        diff = alpha - anchor
        value = (
            loss
            + 0.5 * obj.lam * float(alpha @ kp_a)
            - float(omega @ diff)
            + 0.5 / gamma * float(diff @ diff)
        )
        s = sigmoid(-margins)
        grad = (
            -(gram @ (obj.y_signed * s)) / obj.n
            + obj.lam * kp_a
            - omega
            + diff / gamma
        )
    return value, grad


def inner_solve(
    obj: DcObjective,
    omega: np.ndarray,
    alpha_k: np.ndarray,
    gamma: float,
    cfg: SolverConfig,
) -> InnerResult:
    """Solve one linearized subproblem to the fixed-point tolerance.

    Accelerated proximal gradient from the warm start alpha_k.  When the
    momentum step raises the subproblem objective, momentum is discarded
    and a plain proximal-gradient step (guaranteed descent at step 1/L)
    is taken instead.  Returns the first iterate whose residual passes
    ``cfg.epsilon_inner``, or the last iterate with ``converged=False``
    after ``cfg.max_inner`` steps.
    """
    _check_gamma(gamma)
    anchor = np.asarray(alpha_k, dtype=np.float64)
    omega = np.asarray(omega, dtype=np.float64)
    step = 1.0 / smooth_lipschitz_bound(obj, gamma)
    prox = ProxParams(threshold=step * obj.lam1)

    x = anchor.copy()
    phi_x, grad_x = _phi_value_grad(obj, x, omega, anchor, gamma)
    total_x = phi_x + obj.lam1 * float(np.abs(x).sum())
    residual = float(np.max(np.abs(x - prox.apply(x - step * grad_x)))) if x.size else 0.0
    if residual <= cfg.epsilon_inner:
        return InnerResult(alpha=x, iterations=0, residual=residual, converged=True)

    y = x
    theta = 1.0
    for it in range(1, cfg.max_inner + 1):
        _, grad_y = _phi_value_grad(obj, y, omega, anchor, gamma)
        cand = prox.apply(y - step * grad_y)
        phi_c, grad_c = _phi_value_grad(obj, cand, omega, anchor, gamma)
        total_c = phi_c + obj.lam1 * float(np.abs(cand).sum())
        if not np.isfinite(total_c):
            raise NumericalError("inner solve produced a non-finite objective")
        if total_c > total_x:
            # Momentum overshot; fall back to a plain step from x.
            cand = prox.apply(x - step * grad_x)
            phi_c, grad_c = _phi_value_grad(obj, cand, omega, anchor, gamma)
            total_c = phi_c + obj.lam1 * float(np.abs(cand).sum())
            theta = 1.0
        residual = float(np.max(np.abs(cand - prox.apply(cand - step * grad_c))))
        if residual <= cfg.epsilon_inner:
            return InnerResult(alpha=cand, iterations=it, residual=residual, converged=True)
        theta_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
        y = cand + ((theta - 1.0) / theta_next) * (cand - x)
        x, grad_x, total_x, theta = cand, grad_c, total_c, theta_next

    return InnerResult(alpha=x, iterations=cfg.max_inner, residual=residual, converged=False)


def stationarity_residual(obj: DcObjective, alpha: np.ndarray, gamma: float = 1.0) -> float:
    """Proximal fixed-point residual of the full DC objective at alpha.

    Zero exactly at critical points (grad_h(a) in the subdifferential of g).
    Uses the step t = 1/L_phi so the scale matches the inner certificate.
    """
    a = np.asarray(alpha, dtype=np.float64)
    step = 1.0 / smooth_lipschitz_bound(obj, gamma)
    gram = obj.decomp.gram
    s = sigmoid(-obj.y_signed * (gram @ a))
    grad = (
        -(gram @ (obj.y_signed * s)) / obj.n
        + obj.lam * (obj.decomp.kplus @ a)
        - obj.lam * (obj.decomp.kminus @ a)
    )
    moved = soft_threshold(a - step * grad, step * obj.lam1)
    return float(np.max(np.abs(a - moved))) if a.size else 0.0


def pla_fit(obj: DcObjective, cfg: SolverConfig) -> tuple[np.ndarray, SolveTrace]:
    """Run the outer proximal linearized iteration to a critical point.

    Returns the final iterate and the full trace.  Hitting ``max_outer``
    yields status ``max_iterations`` rather than an exception; inner-solve
    iteration caps are recorded per step in ``trace.inner_converged``.
    Runaway iterates (the objective is unbounded below when the Gram is
    strongly indefinite) raise NumericalError.
    """
    if cfg.alpha0 is not None:
        if cfg.alpha0.shape != (obj.n,):
            raise InputError(
                f"alpha0 must have shape ({obj.n},), got {cfg.alpha0.shape}"
            )
        alpha = cfg.alpha0.astype(np.float64).copy()
    else:
        alpha = np.zeros(obj.n, dtype=np.float64)

    trace = SolveTrace()
    f_cur = f_value(obj, alpha)
    trace.f_values.append(f_cur)
    trace.iterates.append(alpha.copy())

    for k in range(cfg.max_outer):
        gamma_k = cfg.gamma_at(k)
        omega = grad_h(obj, alpha)
        inner = inner_solve(obj, omega, alpha, gamma_k, cfg)
        alpha_new = inner.alpha
        norm_new = float(np.linalg.norm(alpha_new))
        if norm_new > cfg.divergence_norm:
            raise NumericalError(
                f"iterates are diverging (norm {norm_new:.3e} at outer step "
                f"{k}); the objective is likely unbounded below for these "
                "weights"
            )
        f_new = f_value(obj, alpha_new)
        if not np.isfinite(f_new):
            raise NumericalError(f"objective became non-finite at outer step {k}")

        step = float(np.linalg.norm(alpha_new - alpha))
        trace.f_values.append(f_new)
        trace.iterates.append(alpha_new.copy())
        trace.step_norms.append(step)
        trace.stationarity_residuals.append(
            stationarity_residual(obj, alpha_new, gamma=gamma_k)
        )
        trace.inner_iterations.append(inner.iterations)
        trace.inner_converged.append(inner.converged)

        exact_repeat = bool(np.array_equal(alpha_new, alpha))
        delta_f = abs(f_cur - f_new)
        alpha, f_cur = alpha_new, f_new
        # Exact repetition is a critical point; otherwise the combined rule.
        if exact_repeat or max(step, delta_f) < cfg.epsilon_outer:
            trace.status = CONVERGED
            break
    else:
        trace.status = MAX_ITERATIONS

    return alpha, trace


@dataclass(frozen=True)
class RateEstimate:
    """Qualitative linear-rate fit over the tail of a converged run."""

    m_hat: float | None
    r_squared: float | None
    n_points: int
    status: str


def rate_monitor(
    trace: SolveTrace, alpha_star: np.ndarray, tail_fraction: float = 0.5
) -> RateEstimate:
    """Estimate the per-step contraction ratio from trace iterates.

    Fits log ||alpha_k - alpha_star|| linearly in k over the trailing
    ``tail_fraction`` of the run and reports m_hat = exp(slope).  Zero
    distances are excluded; fewer than 4 usable points or a flat tail is
    flagged instead of fitted.
    """
    if not (0 < tail_fraction <= 1):
        raise InputError(f"tail_fraction must lie in (0, 1], got {tail_fraction}")
    star = np.asarray(alpha_star, dtype=np.float64)
    dists = np.array([np.linalg.norm(it - star) for it in trace.iterates])
    total = len(dists)
    tail_len = max(int(math.ceil(tail_fraction * total)), 1)
    idx = np.arange(total)[-tail_len:]
    tail = dists[-tail_len:]

    keep = tail > 0
    if tail_len and not np.any(keep):
        return RateEstimate(None, None, 0, RATE_DEGENERATE)
    idx, tail = idx[keep], tail[keep]
    if len(tail) < 4:
        return RateEstimate(None, None, len(tail), RATE_INSUFFICIENT)

    logd = np.log(tail)
    slope, intercept = np.polyfit(idx, logd, 1)
    fitted = slope * idx + intercept
    ss_tot = float(np.sum((logd - logd.mean()) ** 2))
    if ss_tot == 0.0:
        return RateEstimate(None, None, len(tail), RATE_DEGENERATE)
    ss_res = float(np.sum((logd - fitted) ** 2))
    r_squared = 1.0 - ss_res / ss_tot
    return RateEstimate(float(np.exp(slope)), r_squared, len(tail), RATE_OK)
