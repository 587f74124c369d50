# kernels/base_kernel.py
"""
Pointwise Gaussian kernel, median-heuristic bandwidth and Gram matrices.

    k(x, y) = exp(-||x - y||^2 / (2 sigma^2))

The kernel parameter is sigma (same units as the input coordinates).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from kernels.common import (
    DegenerateBandwidth,
    DimensionMismatch,
    InsufficientData,
    NonFiniteInput,
    SetTestError,
)

GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class BaseKernelSpec:
    sigma: float
    kind: str = GAUSSIAN

    def __post_init__(self):
        if self.kind != GAUSSIAN:
            raise SetTestError(f"unsupported base kernel '{self.kind}' (only '{GAUSSIAN}')")
        s = float(self.sigma)
        if not math.isfinite(s) or s <= 0:
            raise SetTestError(f"sigma must be positive and finite, got {self.sigma!r}")
        object.__setattr__(self, "sigma", s)

    @property
    def gamma(self) -> float:
        return 1.0 / (2.0 * self.sigma * self.sigma)


# ---------- helpers ----------
def as_points(points, name: str = "points") -> np.ndarray:
    """Coerce to a finite (n, d) float array; a flat list is n points in 1-D."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be a list of vectors, got array of shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise NonFiniteInput(f"{name} contains NaN or Inf")
    return arr


def _as_vector(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v[None]
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatch(f"{name} must be a non-empty vector, got shape {v.shape}")
    if not np.isfinite(v).all():
        raise NonFiniteInput(f"{name} contains NaN or Inf")
    return v


def _kernel_from_sq(sq: np.ndarray, spec: BaseKernelSpec) -> np.ndarray:
    return np.exp(-sq / (2.0 * spec.sigma * spec.sigma))


# ---------- operations ----------
def gaussian_kernel(x, y, spec: BaseKernelSpec) -> float:
    xv, yv = _as_vector(x, "x"), _as_vector(y, "y")
    if xv.shape != yv.shape:
        raise DimensionMismatch(f"x has dimension {xv.size}, y has dimension {yv.size}")
    # same code path as gram_matrix so single entries agree bit for bit
    return float(gram_matrix(xv[None, :], yv[None, :], spec)[0, 0])


def gram_matrix(a, b, spec: BaseKernelSpec) -> np.ndarray:
    A, B = as_points(a, "a"), as_points(b, "b")
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"a has dimension {A.shape[1]}, b has dimension {B.shape[1]}")
    # cdist sums (a_k - b_k)^2 per pair, so swapping arguments is bit-exact
    return _kernel_from_sq(cdist(A, B, "sqeuclidean"), spec)


def median_heuristic(points) -> float:
    """Median of all pairwise Euclidean distances (i < j)."""
    P = as_points(points)
    if P.shape[0] < 2:
        raise InsufficientData(f"median heuristic needs at least 2 points, got {P.shape[0]}")
    med = float(np.median(pdist(P, "euclidean")))
    if med <= 0.0:
        raise DegenerateBandwidth("median pairwise distance is 0 (points are identical)")
    return med


def median_heuristic_spec(points) -> BaseKernelSpec:
    return BaseKernelSpec(sigma=median_heuristic(points))
