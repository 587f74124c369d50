# stats/classical_tests.py
"""
Parametric baselines: two-sample F-test (equal variances) and pooled-variance
two-sample t-test (equal means), plus the multivariate union rule: one test per
coordinate at level alpha, Different as soon as any coordinate rejects.

The *_pvalues helpers and union_reject take stacked samples of shape (..., n, d)
and test every coordinate of every leading index in one pass; the benchmark
uses them to run thousands of trials without a Python loop.
"""
from __future__ import annotations

from enum import Enum
from typing import NamedTuple

import numpy as np

from kernels.common import (
    Decision,
    DegenerateVariance,
    DimensionMismatch,
    InsufficientData,
    NonFiniteInput,
    SetTestError,
)
from kernels.set_kernel import SampleSet
from stats.special import f_critical, f_two_sided_p, t_critical, t_two_sided_p

UNION_RULE_NOTE = ("multivariate F/T baselines: per-coordinate tests at level alpha, "
                   "Different if any coordinate rejects (no multiplicity correction)")


class TestKind(str, Enum):
    __test__ = False  # not a pytest class

    F_TEST = "FTest"
    T_TEST = "TTest"


class UnivariateTestResult(NamedTuple):
    statistic: float
    degrees_of_freedom: tuple[float, float]  # (|a| - 1, |b| - 1)
    p_value: float
    reject: bool


class UnionTestResult(NamedTuple):
    decision: Decision
    p_values: np.ndarray
    rejected: np.ndarray  # coordinates that rejected


def _check_alpha(alpha: float):
    if not 0 < alpha < 1:
        raise SetTestError(f"alpha must lie in (0, 1), got {alpha}")


def _sample(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float).ravel()
    if arr.size < 2:
        raise InsufficientData(f"{name} needs at least 2 observations, got {arr.size}")
    if not np.isfinite(arr).all():
        raise NonFiniteInput(f"{name} contains NaN or Inf")
    return arr


def _stacked(a, b) -> tuple[np.ndarray, np.ndarray]:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.ndim < 2 or b.ndim < 2:
        raise DimensionMismatch("stacked samples need shape (..., n, d)")
    if a.shape[-1] != b.shape[-1]:
        raise DimensionMismatch(f"incompatible sample stacks {a.shape} and {b.shape}")
    try:
        np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    except ValueError:
        raise DimensionMismatch(f"leading shapes of {a.shape} and {b.shape} do not broadcast") from None
    if a.shape[-2] < 2 or b.shape[-2] < 2:
        raise InsufficientData("each sample needs at least 2 observations")
    return a, b


# ---------- vectorized p-values ----------
def f_test_pvalues(a, b) -> np.ndarray:
    a, b = _stacked(a, b)
    va, vb = a.var(axis=-2, ddof=1), b.var(axis=-2, ddof=1)
    if (va == 0).any() or (vb == 0).any():
        raise DegenerateVariance("F-test: a sample has zero variance")
    return np.asarray(f_two_sided_p(va / vb, a.shape[-2] - 1, b.shape[-2] - 1))


def _pooled_t(a: np.ndarray, b: np.ndarray):
    na, nb = a.shape[-2], b.shape[-2]
    va, vb = a.var(axis=-2, ddof=1), b.var(axis=-2, ddof=1)
    pooled = ((na - 1) * va + (nb - 1) * vb) / (na + nb - 2)
    if (pooled == 0).any():
        raise DegenerateVariance("t-test: pooled variance is zero")
    t = (a.mean(axis=-2) - b.mean(axis=-2)) / np.sqrt(pooled * (1.0 / na + 1.0 / nb))
    return t, na + nb - 2


def t_test_pvalues(a, b) -> np.ndarray:
    a, b = _stacked(a, b)
    t, df = _pooled_t(a, b)
    return np.asarray(t_two_sided_p(t, df))


def union_reject(a, b, base: TestKind, alpha: float) -> np.ndarray:
    """
    Union rule over stacks (..., n, d): True where any coordinate rejects.

    Compares statistics against critical values computed once per call
    (p < alpha iff the statistic falls in the critical region), which keeps
    large batches away from the per-cell continued fraction.
    """
    _check_alpha(alpha)
    a, b = _stacked(a, b)
    na, nb = a.shape[-2], b.shape[-2]
    if TestKind(base) == TestKind.F_TEST:
        va, vb = a.var(axis=-2, ddof=1), b.var(axis=-2, ddof=1)
        if (va == 0).any() or (vb == 0).any():
            raise DegenerateVariance("F-test: a sample has zero variance")
        lo, hi = f_critical(na - 1, nb - 1, alpha)
        ratio = va / vb
        reject = (ratio < lo) | (ratio > hi)
    else:
        t, df = _pooled_t(a, b)
        reject = np.abs(t) > t_critical(df, alpha)
    return reject.any(axis=-1)


# ---------- single tests ----------
def f_test_equal_variance(a, b, alpha: float = 0.05) -> UnivariateTestResult:
    _check_alpha(alpha)
    a, b = _sample(a, "a"), _sample(b, "b")
    va, vb = a.var(ddof=1), b.var(ddof=1)
    if va == 0 or vb == 0:
        raise DegenerateVariance("F-test: a sample has zero variance")
    stat = float(va / vb)
    p = float(f_two_sided_p(stat, a.size - 1, b.size - 1))
    return UnivariateTestResult(stat, (float(a.size - 1), float(b.size - 1)), p, p < alpha)


def t_test_equal_mean(a, b, alpha: float = 0.05) -> UnivariateTestResult:
    _check_alpha(alpha)
    a, b = _sample(a, "a"), _sample(b, "b")
    t, df = _pooled_t(a[:, None], b[:, None])
    stat = float(t[0])
    p = float(t_two_sided_p(stat, df))
    # pooled df is the sum of the pair
    return UnivariateTestResult(stat, (float(a.size - 1), float(b.size - 1)), p, p < alpha)


def union_multivariate_test(A: SampleSet, B: SampleSet, base: TestKind, alpha: float = 0.05) -> UnionTestResult:
    if A.dim != B.dim:
        raise DimensionMismatch(f"sets have dimensions {A.dim} and {B.dim}")
    _check_alpha(alpha)
    pvalues = f_test_pvalues if TestKind(base) == TestKind.F_TEST else t_test_pvalues
    p = pvalues(A.points, B.points)
    rejected = np.flatnonzero(p < alpha)
    decision = Decision.DIFFERENT if rejected.size else Decision.SAME
    return UnionTestResult(decision, p, rejected)
