import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from kernels.base_kernel import (
    BaseKernelSpec,
    gaussian_kernel,
    gram_matrix,
    median_heuristic,
    median_heuristic_spec,
)
from kernels.common import (
    DegenerateBandwidth,
    DimensionMismatch,
    InsufficientData,
    NonFiniteInput,
    SetTestError,
)


def test_gaussian_kernel_known_values(unit_spec):
    assert gaussian_kernel([0.0], [1.0], unit_spec) == pytest.approx(math.exp(-0.5), abs=1e-15)
    assert gaussian_kernel([1.0, 2.0], [1.0, 2.0], unit_spec) == 1.0
    wide = BaseKernelSpec(2.0)
    assert gaussian_kernel([0.0, 0.0], [3.0, 4.0], wide) == pytest.approx(math.exp(-25.0 / 8.0), abs=1e-15)


def test_gaussian_kernel_is_symmetric_and_bounded(rng, unit_spec):
    for _ in range(50):
        x, y = rng.random(4), rng.random(4)
        k = gaussian_kernel(x, y, unit_spec)
        assert 0.0 < k <= 1.0
        assert k == gaussian_kernel(y, x, unit_spec)


def test_gram_entries_match_pointwise_kernel(rng, unit_spec):
    A, B = rng.random((6, 3)), rng.random((4, 3))
    G = gram_matrix(A, B, unit_spec)
    assert G.shape == (6, 4)
    for i in range(6):
        for j in range(4):
            assert G[i, j] == gaussian_kernel(A[i], B[j], unit_spec)
    assert_allclose(gram_matrix(A, A, unit_spec), gram_matrix(A, A, unit_spec).T, rtol=0, atol=0)


def test_kernel_rejects_bad_input(unit_spec):
    with pytest.raises(DimensionMismatch):
        gaussian_kernel([1.0, 2.0], [1.0], unit_spec)
    with pytest.raises(NonFiniteInput):
        gram_matrix([[np.nan, 1.0]], [[1.0, 1.0]], unit_spec)
    with pytest.raises(DimensionMismatch):
        gram_matrix(np.ones((2, 3)), np.ones((2, 2)), unit_spec)


@pytest.mark.parametrize("sigma", [0.0, -1.0, float("inf"), float("nan")])
def test_spec_rejects_invalid_sigma(sigma):
    with pytest.raises(SetTestError):
        BaseKernelSpec(sigma)


def test_median_heuristic():
    # pairwise distances 1, 3, 2
    assert median_heuristic([[0.0], [1.0], [3.0]]) == 2.0
    assert median_heuristic_spec([[0.0, 0.0], [3.0, 4.0]]).sigma == 5.0


def test_median_heuristic_degenerate_inputs():
    with pytest.raises(DegenerateBandwidth):
        median_heuristic([[1.0, 1.0]] * 4)
    with pytest.raises(InsufficientData):
        median_heuristic([[1.0, 2.0]])


def test_scale_relation(rng, unit_spec):
    for _ in range(50):
        d = int(rng.integers(1, 6))
        x, y = rng.random(d) * 4, rng.random(d) * 4
        sigma = float(rng.uniform(0.2, 5.0))
        expected = gaussian_kernel(x / sigma, y / sigma, unit_spec)
        assert gaussian_kernel(x, y, BaseKernelSpec(sigma)) == pytest.approx(expected, rel=1e-12, abs=1e-300)


def test_point_gram_quadratic_forms_are_nonnegative(rng):
    for _ in range(50):
        n, d = int(rng.integers(2, 30)), int(rng.integers(1, 5))
        pts = rng.random((n, d)) * 3
        G = gram_matrix(pts, pts, BaseKernelSpec(float(rng.uniform(0.2, 2.0))))
        c = rng.standard_normal(n)
        assert c @ G @ c >= -1e-9
