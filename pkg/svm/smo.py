# svm/smo.py
"""
SMO solver for the one-class SVM dual with a precomputed kernel:

    min_a  1/2 a^T Q a
    s.t.   0 <= a_i <= C,   sum_i a_i = 1,     C = 1 / (nu * l)

Every step moves mass t from a_j to a_i (so sum a stays 1), with the pair
chosen as the maximal KKT violation:

    i = argmin { g_i : a_i < C },   j = argmax { g_j : a_j > 0 },   g = Q a

Stops once g_j - g_i <= tol.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from kernels.common import DimensionMismatch, InfeasibleNu, SolverDidNotConverge, setup_logger

logger = setup_logger("smo")

TAU = 1e-12  # curvature floor for (numerically) non-PSD pairs


@dataclass
class SolverResult:
    alphas: np.ndarray
    objective: float
    gradient: np.ndarray
    iterations: int
    kkt_gap: float
    history: list = field(default_factory=list)


def box_bound(nu: float, l: int) -> float:
    if not 0 < nu <= 1:
        raise InfeasibleNu(f"nu must lie in (0, 1], got {nu}")
    if nu * l < 1 - 1e-12:
        raise InfeasibleNu(f"nu * l = {nu * l:.6g} < 1: box and simplex constraints are infeasible")
    return 1.0 / (nu * l)


def initial_alphas(nu: float, l: int) -> np.ndarray:
    """First floor(nu*l) coordinates at the bound, remainder on the next one."""
    C = box_bound(nu, l)
    a = np.zeros(l)
    n = min(int(np.floor(nu * l + 1e-12)), l)
    a[:n] = C
    if n < l:
        a[n] = max(0.0, 1.0 - n * C)
    return a


def kkt_gap(grad: np.ndarray, alphas: np.ndarray, C: float) -> tuple[float, int, int]:
    up = np.flatnonzero(alphas < C)
    low = np.flatnonzero(alphas > 0)
    if up.size == 0 or low.size == 0:
        return 0.0, -1, -1
    i = up[np.argmin(grad[up])]
    j = low[np.argmax(grad[low])]
    return float(grad[j] - grad[i]), int(i), int(j)


def solve(Q, nu: float, tol: float = 1e-6, max_iter: int | None = None,
          track_objective: bool = False) -> SolverResult:
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise DimensionMismatch(f"Gram must be square, got shape {Q.shape}")
    l = Q.shape[0]
    C = box_bound(nu, l)
    max_iter = max_iter if max_iter is not None else 100_000 * l

    alpha = initial_alphas(nu, l)
    grad = Q @ alpha
    history = [0.5 * float(alpha @ grad)] if track_objective else []

    n_iter = 0
    gap, i, j = kkt_gap(grad, alpha, C)
    while gap > tol:
        if n_iter >= max_iter:
            obj = 0.5 * float(alpha @ grad)
            raise SolverDidNotConverge(
                f"SMO stopped after {n_iter} iterations with KKT gap {gap:.3e} > {tol:.1e}",
                alphas=alpha.copy(), objective=obj, kkt_gap=gap,
            )
        quad_coef = Q[i, i] + Q[j, j] - 2.0 * Q[i, j]
        if quad_coef <= 0:
            quad_coef = TAU
        t = min(gap / quad_coef, C - alpha[i], alpha[j])
        if t >= alpha[j]:
            t = alpha[j]
            alpha[j] = 0.0
        else:
            alpha[j] -= t
        alpha[i] = min(C, alpha[i] + t)
        grad += t * (Q[:, i] - Q[:, j])
        n_iter += 1
        if track_objective:
            history.append(0.5 * float(alpha @ grad))
        gap, i, j = kkt_gap(grad, alpha, C)

    # refresh to drop accumulated drift in the incremental gradient
    grad = Q @ alpha
    obj = 0.5 * float(alpha @ grad)
    logger.debug(f"SMO converged: l={l} iterations={n_iter} objective={obj:.10g} gap={gap:.2e}")
    return SolverResult(alphas=alpha, objective=obj, gradient=grad, iterations=n_iter,
                        kkt_gap=gap, history=history)
