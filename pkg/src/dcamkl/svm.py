"""Soft-margin SVM dual solver (sequential minimal optimization).

Solves, for a fixed kernel matrix K and labels y in {+1, -1},

    max_a  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij
    s.t.   sum_i a_i y_i = 0,  0 <= a_i <= C

with first-order maximal-violating-pair working-set selection and analytic
two-variable updates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import LabelVector
from .errors import NonConvergenceError, ValidationError
from .kernels import GramMatrix

SUPPORT_EPS = 1e-8
MAX_PAIR_UPDATES = 10 ** 6


@dataclass(frozen=True)
class SvmSolution:
    """Dual solution: coefficients in [0, C], bias, objective value, and the
    indices with alpha above the support threshold."""

    alpha: np.ndarray
    bias: float
    objective: float
    support: np.ndarray
    C: float
    kkt_violation: float
    iterations: int
    objective_trace: tuple[float, ...] = field(repr=False, default=())


def _dual_objective(alpha: np.ndarray, grad_w: np.ndarray) -> float:
    # W(a) = 1/2 a.Q.a - sum(a) and grad_w = Q a - 1; the dual value is -W.
    return float(0.5 * (alpha.sum() - alpha @ grad_w))


def solve_dual(K: GramMatrix | np.ndarray, y: LabelVector | np.ndarray, C: float,
               tol: float = 1e-3, alpha0: np.ndarray | None = None,
               track_objective: bool = False) -> SvmSolution:
    """Maximize the dual at fixed kernel. Terminates when the maximal KKT
    violation drops below ``tol``; raises after 10^6 pair updates.

    ``alpha0`` warm-starts the solver (clipped into the box; the equality
    constraint must already hold, as it does when re-solving after a kernel
    weight change).
    """
    Kv = K.values if isinstance(K, GramMatrix) else np.asarray(K, dtype=np.float64)
    yv = np.asarray(getattr(y, "labels", y), dtype=np.float64)
    n = yv.shape[0]
    if Kv.shape != (n, n):
        raise ValidationError("kernel matrix shape does not match labels")
    asym = float(np.abs(Kv - Kv.T).max()) if n else 0.0
    if asym > 1e-10:
        raise ValidationError(f"kernel matrix is not symmetric (max gap {asym:.3g})")
    if not C > 0:
        raise ValidationError("C must be positive")
    if not ((yv == 1) | (yv == -1)).all():
        raise ValidationError("labels must be +1 or -1")

    Q = Kv * np.outer(yv, yv)
    if alpha0 is not None:
        alpha = np.clip(np.asarray(alpha0, dtype=np.float64).copy(), 0.0, C)
        # Pair updates preserve the equality constraint, so the start must
        # already satisfy it.
        if abs(float(alpha @ yv)) > 1e-8:
            raise ValidationError("warm-start alpha violates the equality constraint")
        grad_w = Q @ alpha - 1.0      # gradient of W(a) = 1/2 a.Q.a - sum(a)
    else:
        alpha = np.zeros(n)
        grad_w = -np.ones(n)

    trace = []
    if track_objective:
        trace.append(_dual_objective(alpha, grad_w))

    pos = yv > 0
    it = 0
    violation = 0.0
    while True:
        # I_up: alpha may move along +y; I_low: along -y.
        up = np.where(pos, alpha < C, alpha > 0.0)
        low = np.where(pos, alpha > 0.0, alpha < C)
        score = -yv * grad_w
        if not up.any() or not low.any():
            violation = 0.0
            break
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        j = int(np.flatnonzero(low)[np.argmin(score[low])])
        violation = float(score[i] - score[j])
        if violation < tol:
            break
        if it >= MAX_PAIR_UPDATES:
            raise NonConvergenceError(
                f"SMO hit {MAX_PAIR_UPDATES} pair updates (violation {violation:.3g})",
                residual=violation, iterations=it)
        it += 1

        quad = Kv[i, i] + Kv[j, j] - 2.0 * Kv[i, j]
        if quad <= 0:
            quad = 1e-12
        t = violation / quad          # optimal step along (y_i e_i - y_j e_j)
        old_i, old_j = alpha[i], alpha[j]
        ai = old_i + yv[i] * t
        if yv[i] != yv[j]:
            # a_i - a_j is conserved.
            diff = old_i - old_j
            lo_b, hi_b = max(0.0, diff), min(C, C + diff)
            ai = min(max(ai, lo_b), hi_b)
            aj = ai - diff
        else:
            # a_i + a_j is conserved.
            total = old_i + old_j
            lo_b, hi_b = max(0.0, total - C), min(C, total)
            ai = min(max(ai, lo_b), hi_b)
            aj = total - ai
        d_i, d_j = ai - old_i, aj - old_j
        alpha[i], alpha[j] = ai, aj
        grad_w += Q[:, i] * d_i + Q[:, j] * d_j
        if track_objective:
            trace.append(_dual_objective(alpha, grad_w))

    # Bias: average of -y_i * grad_w_i over free support vectors, else the
    # midpoint of the KKT-feasible interval.
    score = -yv * grad_w
    free = (alpha > SUPPORT_EPS) & (alpha < C - SUPPORT_EPS)
    if free.any():
        bias = float(np.mean(score[free]))
    else:
        up = np.where(pos, alpha < C, alpha > 0.0)
        low = np.where(pos, alpha > 0.0, alpha < C)
        hi = float(score[up].max()) if up.any() else 0.0
        lo = float(score[low].min()) if low.any() else 0.0
        bias = (hi + lo) / 2.0

    return SvmSolution(
        alpha=alpha,
        bias=bias,
        objective=_dual_objective(alpha, grad_w),
        support=np.flatnonzero(alpha > SUPPORT_EPS),
        C=C,
        kkt_violation=violation,
        iterations=it,
        objective_trace=tuple(trace),
    )


def decision_values(alpha: np.ndarray, bias: float, y_train,
                    K_cross: np.ndarray) -> np.ndarray:
    """Decision function f(x_t) = sum_i alpha_i y_i k(x_t, x_i) + bias for a
    rectangular kernel block (rows = evaluation points)."""
    alpha = np.asarray(alpha, dtype=np.float64)
    yv = np.asarray(getattr(y_train, "labels", y_train), dtype=np.float64)
    K_cross = np.asarray(K_cross, dtype=np.float64)
    if K_cross.ndim != 2 or K_cross.shape[1] != alpha.shape[0] or alpha.shape != yv.shape:
        raise ValidationError("decision value shapes do not align")
    return K_cross @ (alpha * yv) + bias


def predict_labels(decisions: np.ndarray) -> np.ndarray:
    """Sign rule with ties mapped to +1."""
    return np.where(np.asarray(decisions) >= 0, 1, -1).astype(np.int64)
