"""Multi-kernel SVM training: gradient descent on simplex-constrained kernel
weights, alternated with standard SVM solves at fixed weights.

Each outer iteration solves the SVM dual for the current combined kernel,
differentiates the optimal value with respect to the weights, and walks along
the simplex-feasible reduced-gradient direction with an Armijo backtracking
line search.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import LabelVector
from .errors import ValidationError
from .kernels import GramMatrix, combine
from .svm import SvmSolution, decision_values, predict_labels, solve_dual

WEIGHT_SNAP = 1e-8
ARMIJO_C1 = 1e-4
ARMIJO_BACKTRACK = 0.5
MIN_STEP = 1e-15


@dataclass(frozen=True)
class MklTrainResult:
    """Learned kernel weights with the SVM solution at those weights."""

    d: np.ndarray
    svm: SvmSolution
    objective_trace: tuple[float, ...] = field(repr=False, default=())
    weight_trace: tuple[tuple[float, ...], ...] = field(repr=False, default=())
    outer_iterations: int = 0
    stop_reason: str = ""


def objective(d, grams: list[GramMatrix], y, C: float, tol: float = 1e-3,
              alpha0: np.ndarray | None = None):
    """Evaluate the weight objective J(d): the SVM dual optimum under the
    combined kernel. Returns (J, solution)."""
    sol = solve_dual(combine(grams, d), y, C, tol=tol, alpha0=alpha0)
    return sol.objective, sol


def gradient(d, sol: SvmSolution, grams: list[GramMatrix], y) -> np.ndarray:
    """dJ/dd_m = -1/2 sum_ij a_i a_j y_i y_j K_m(i, j) at the optimal alpha."""
    yv = np.asarray(getattr(y, "labels", y), dtype=np.float64)
    ay = sol.alpha * yv
    return np.array([-0.5 * (ay @ g.values @ ay) for g in grams])


def _descent_direction(d: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Reduced-gradient direction relative to the largest-weight coordinate
    (ties to the lowest index); coordinates at zero may only increase."""
    mu = int(np.argmax(d))
    D = np.zeros_like(d)
    for m in range(d.shape[0]):
        if m == mu:
            continue
        red = g[m] - g[mu]
        if d[m] <= 0 and red > 0:
            continue                  # would push below zero
        D[m] = -red
    D[mu] = -np.sum(D)
    return D


def train(grams: list[GramMatrix], y, C: float = 1.0,
          outer_tol: float = 1e-4, max_outer: int = 200,
          svm_tol: float = 1e-3, gap_tol: float = 1e-2) -> MklTrainResult:
    """Learn simplex weights over the given kernels jointly with the SVM.

    Stops when the weight update is below ``outer_tol``, the normalized
    duality gap falls below ``gap_tol``, or ``max_outer`` iterations elapse.
    The recorded objective trace is non-increasing over accepted steps.
    """
    M = len(grams)
    if M < 1:
        raise ValidationError("at least one kernel is required")
    if isinstance(y, LabelVector):
        y.require_both_classes()

    d = np.full(M, 1.0 / M)
    J, sol = objective(d, grams, y, C, tol=svm_tol)
    trace = [J]
    weights = [tuple(d.tolist())]
    stop_reason = "max_outer"
    outer = 0

    for outer in range(1, max_outer + 1):
        g = gradient(d, sol, grams, y)

        # Normalized duality gap: max_m (-g_m) - sum_m d_m (-g_m).
        quad = -g
        gap = float(quad.max() - d @ quad)
        if gap <= gap_tol * max(abs(J), 1e-12):
            stop_reason = "duality_gap"
            break

        D = _descent_direction(d, g)
        if not np.any(np.abs(D) > 0):
            stop_reason = "stationary"
            break

        neg = D < 0
        gamma_max = float(np.min(d[neg] / -D[neg]))
        if gamma_max <= 0:
            stop_reason = "stationary"
            break
        slope = float(g @ D)          # < 0 for a descent direction

        gamma = gamma_max
        accepted = None
        while gamma > MIN_STEP:
            cand = d + gamma * D
            cand[cand < 0] = 0.0      # kill roundoff at the clipped coordinate
            cand /= cand.sum()
            J_new, sol_new = objective(cand, grams, y, C, tol=svm_tol,
                                       alpha0=sol.alpha)
            if J_new <= J + ARMIJO_C1 * gamma * slope:
                accepted = (cand, J_new, sol_new, gamma)
                break
            gamma *= ARMIJO_BACKTRACK
        if accepted is None:
            stop_reason = "line_search"
            break

        cand, J_new, sol_new, gamma = accepted
        delta = float(np.max(np.abs(cand - d)))
        d, J, sol = cand, J_new, sol_new
        # Snap negligible weights to zero and renormalize.
        if (d < WEIGHT_SNAP).any():
            d = np.where(d < WEIGHT_SNAP, 0.0, d)
            d /= d.sum()
        trace.append(J)
        weights.append(tuple(d.tolist()))
        if delta < outer_tol:
            stop_reason = "weight_tolerance"
            break

    return MklTrainResult(d=d, svm=sol, objective_trace=tuple(trace),
                          weight_trace=tuple(weights),
                          outer_iterations=outer, stop_reason=stop_reason)


def predict(result: MklTrainResult, cross_blocks: list[np.ndarray], y_train):
    """Combine per-kernel rectangular blocks with the learned weights and
    evaluate decisions. Returns (labels, decision values)."""
    if len(cross_blocks) != result.d.shape[0]:
        raise ValidationError("one kernel block per learned weight required")
    shapes = {b.shape for b in cross_blocks}
    if len(shapes) != 1:
        raise ValidationError("kernel blocks must share one shape")
    K = np.zeros(next(iter(shapes)))
    for w, b in zip(result.d, cross_blocks):
        K += w * b
    f = decision_values(result.svm.alpha, result.svm.bias, y_train, K)
    return predict_labels(f), f
