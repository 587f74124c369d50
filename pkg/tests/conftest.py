import numpy as np
import pytest

from etl.rng import make_rng
from kernels.base_kernel import BaseKernelSpec
from kernels.set_kernel import SampleSet


@pytest.fixture
def rng():
    return make_rng(12345)


@pytest.fixture
def unit_spec():
    return BaseKernelSpec(1.0)


def random_set(rng, n: int, d: int, scale: float = 1.0, label=None) -> SampleSet:
    return SampleSet(scale * rng.random((n, d)), label=label)


@pytest.fixture
def make_set(rng):
    def _make(n, d, scale=1.0, label=None):
        return random_set(rng, n, d, scale, label)
    return _make


def write_csv(path, text: str):
    path.write_text(text)
    return path


@pytest.fixture
def separable_split():
    """Tiny expression-like split: shared profile, 1e-11 noise, negatives shifted by 0.5."""
    from etl.data_io import SplitCounts, split_dataset

    d = 50
    profile = np.abs(5.0 + make_rng(1, 0).standard_normal(d))
    pos = profile + 1e-11 * make_rng(1, 1).standard_normal((20, d))
    neg = profile + 0.5 + 1e-11 * make_rng(1, 2).standard_normal((30, d))
    return split_dataset(pos, neg, SplitCounts(train=13, leaveout=7, set_size=4), seed=3)
