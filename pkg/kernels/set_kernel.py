# kernels/set_kernel.py
"""
RKHS on sets. A set X = {x_1..x_n} is mapped to the mean of its feature maps
(never materialized); everything below is computed from double sums of the
base kernel:

    K(X, Y)        = 1/(n m) sum_i sum_j k(x_i, y_j)
    ||X||^2        = K(X, X)
    d^2(X, Y)      = K(X, X) - 2 K(X, Y) + K(Y, Y)   (== empirical MMD, V-statistic)

Sets have multiset semantics: duplicates are allowed and order is irrelevant.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from kernels.base_kernel import BaseKernelSpec, as_points, gram_matrix
from kernels.common import DimensionMismatch, EmptySet, setup_logger

logger = setup_logger("set_kernel")

NEGATIVE_DISTANCE_TOL = 1e-12
PSD_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SampleSet:
    points: np.ndarray
    label: str | None = None
    # source row ids (for partitions, traces and disjointness checks)
    index: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        arr = np.asarray(self.points, dtype=float)
        if arr.size == 0:
            raise EmptySet(f"set {self.label!r} has no points")
        arr = as_points(arr, "points").copy()
        arr.flags.writeable = False
        object.__setattr__(self, "points", arr)
        if self.index is not None:
            idx = np.asarray(self.index, dtype=np.int64).copy()
            if idx.shape != (arr.shape[0],):
                raise DimensionMismatch(f"index has shape {idx.shape}, expected ({arr.shape[0]},)")
            idx.flags.writeable = False
            object.__setattr__(self, "index", idx)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n

    def row_ids(self) -> np.ndarray:
        return self.index if self.index is not None else np.arange(self.n)

    def subset(self, rows, label: str | None = None) -> "SampleSet":
        rows = np.asarray(rows, dtype=np.int64)
        return SampleSet(self.points[rows], label=label, index=self.row_ids()[rows])


@dataclass(frozen=True, eq=False)
class SetGram:
    values: np.ndarray
    kernel: BaseKernelSpec
    source_ids: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.values).min())

    def is_psd(self, tol: float = PSD_TOL) -> bool:
        return self.min_eigenvalue() >= -tol

    def to_text(self, path) -> Path:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(p, self.values, fmt="%.17g", delimiter=" ")
        return p

    @classmethod
    def from_text(cls, path, kernel: BaseKernelSpec, source_ids=None) -> "SetGram":
        vals = np.loadtxt(Path(path), dtype=float, ndmin=2)
        if vals.shape[0] != vals.shape[1]:
            raise DimensionMismatch(f"{path}: Gram file is {vals.shape[0]}x{vals.shape[1]}, expected square")
        ids = list(source_ids) if source_ids is not None else list(range(vals.shape[0]))
        return cls(values=vals, kernel=kernel, source_ids=ids)


class SetDistance(NamedTuple):
    value: float  # clamped at 0
    raw: float    # before clamping


# ---------- helpers ----------
def _check_pair(X: SampleSet, Y: SampleSet):
    if X.dim != Y.dim:
        raise DimensionMismatch(f"sets have dimensions {X.dim} and {Y.dim}")


def _check_same_dim(sets: Sequence[SampleSet]):
    if not sets:
        raise EmptySet("need at least one set")
    dims = {s.dim for s in sets}
    if len(dims) > 1:
        raise DimensionMismatch(f"sets have mixed dimensions {sorted(dims)}")


def _block_mean(block: np.ndarray) -> float:
    # contiguous copy so the summation order matches set_kernel on the same pair
    return float(np.ascontiguousarray(block).mean())


def _offsets(sets: Sequence[SampleSet]) -> np.ndarray:
    return np.concatenate([[0], np.cumsum([s.n for s in sets])[:-1]]).astype(np.int64)


# ---------- operations ----------
def set_kernel(X: SampleSet, Y: SampleSet, spec: BaseKernelSpec) -> float:
    _check_pair(X, Y)
    return _block_mean(gram_matrix(X.points, Y.points, spec))


def set_norm_sq(X: SampleSet, spec: BaseKernelSpec) -> float:
    return set_kernel(X, X, spec)


def _clamp(raw: float) -> SetDistance:
    if raw < 0.0:
        if raw < -NEGATIVE_DISTANCE_TOL:
            logger.warning(f"squared set distance {raw:.3e} below tolerance; clamping to 0")
        else:
            logger.debug(f"clamped squared set distance {raw:.3e} to 0")
        return SetDistance(0.0, raw)
    return SetDistance(raw, raw)


def set_distance(X: SampleSet, Y: SampleSet, spec: BaseKernelSpec) -> SetDistance:
    _check_pair(X, Y)
    raw = set_norm_sq(X, spec) - 2.0 * set_kernel(X, Y, spec) + set_norm_sq(Y, spec)
    return _clamp(raw)


def set_distance_sq(X: SampleSet, Y: SampleSet, spec: BaseKernelSpec) -> float:
    return set_distance(X, Y, spec).value


def set_gram(sets: Sequence[SampleSet], spec: BaseKernelSpec, cache: "PointGramCache | None" = None) -> SetGram:
    sets = list(sets)
    _check_same_dim(sets)
    if cache is not None:
        return cache.set_gram(sets)
    pts = np.vstack([s.points for s in sets])
    P = gram_matrix(pts, pts, spec)
    offs = _offsets(sets)
    sizes = [s.n for s in sets]
    l = len(sets)
    G = np.empty((l, l))
    for i in range(l):
        ri = slice(offs[i], offs[i] + sizes[i])
        for j in range(i, l):
            G[i, j] = _block_mean(P[ri, offs[j]:offs[j] + sizes[j]])
            G[j, i] = G[i, j]
    ids = [s.label if s.label is not None else i for i, s in enumerate(sets)]
    return SetGram(values=G, kernel=spec, source_ids=ids)


def _pair_sums(P: np.ndarray, rows: Sequence[SampleSet], cols: Sequence[SampleSet]) -> np.ndarray:
    S = np.add.reduceat(np.add.reduceat(P, _offsets(rows), axis=0), _offsets(cols), axis=1)
    return S / np.outer([s.n for s in rows], [s.n for s in cols])


def cross_set_kernel(rows: Sequence[SampleSet], cols: Sequence[SampleSet], spec: BaseKernelSpec,
                     chunk: int = 512, cache: "PointGramCache | None" = None) -> np.ndarray:
    """K(rows[i], cols[j]) for every pair, from one point Gram per column chunk."""
    rows, cols = list(rows), list(cols)
    _check_same_dim(rows + cols)
    if cache is not None:
        return cache.cross(rows, cols, chunk)
    row_pts = np.vstack([s.points for s in rows])
    out = np.empty((len(rows), len(cols)))
    for start in range(0, len(cols), chunk):
        block = cols[start:start + chunk]
        P = gram_matrix(row_pts, np.vstack([s.points for s in block]), spec)
        out[:, start:start + len(block)] = _pair_sums(P, rows, block)
    return out


class PointGramCache:
    """
    Base-kernel Gram over a fixed universe of points, computed once.

    Sets drawn from the universe (via SampleSet.subset, so that their index
    holds universe rows) get every Set-Kernel value by indexing instead of
    recomputing base kernels. Entries equal those of gram_matrix on the same
    points, so results agree with the direct functions.
    """

    def __init__(self, universe: SampleSet, spec: BaseKernelSpec):
        if universe.index is not None and not np.array_equal(universe.index, np.arange(universe.n)):
            raise DimensionMismatch("universe rows must be indexed 0..n-1")
        self.universe = universe
        self.spec = spec
        self.P = gram_matrix(universe.points, universe.points, spec)
        logger.debug(f"point Gram cached for {universe.n} points")

    def _ids(self, s: SampleSet) -> np.ndarray:
        if s.index is None or s.dim != self.universe.dim:
            raise DimensionMismatch(f"set {s.label!r} was not drawn from the cached universe")
        return s.index

    def set_kernel(self, X: SampleSet, Y: SampleSet) -> float:
        return _block_mean(self.P[np.ix_(self._ids(X), self._ids(Y))])

    def distance(self, X: SampleSet, Y: SampleSet) -> SetDistance:
        raw = self.set_kernel(X, X) - 2.0 * self.set_kernel(X, Y) + self.set_kernel(Y, Y)
        return _clamp(raw)

    def set_gram(self, sets: Sequence[SampleSet]) -> SetGram:
        sets = list(sets)
        l = len(sets)
        ids = [self._ids(s) for s in sets]
        G = np.empty((l, l))
        for i in range(l):
            for j in range(i, l):
                G[i, j] = G[j, i] = _block_mean(self.P[np.ix_(ids[i], ids[j])])
        return SetGram(values=G, kernel=self.spec,
                       source_ids=[s.label if s.label is not None else i for i, s in enumerate(sets)])

    def cross(self, rows: Sequence[SampleSet], cols: Sequence[SampleSet], chunk: int = 512) -> np.ndarray:
        row_ids = np.concatenate([self._ids(s) for s in rows])
        out = np.empty((len(rows), len(cols)))
        for start in range(0, len(cols), chunk):
            block = cols[start:start + chunk]
            P = self.P[np.ix_(row_ids, np.concatenate([self._ids(s) for s in block]))]
            out[:, start:start + len(block)] = _pair_sums(P, rows, block)
        return out
