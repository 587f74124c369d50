import numpy as np
import pytest
from numpy.testing import assert_array_equal
from scipy import stats

from etl.rng import make_rng, standard_normal
from kernels.common import Decision, DegenerateVariance, DimensionMismatch, InsufficientData, SetTestError
from kernels.set_kernel import SampleSet
from stats.classical_tests import (
    TestKind,
    f_test_equal_variance,
    f_test_pvalues,
    t_test_equal_mean,
    t_test_pvalues,
    union_multivariate_test,
    union_reject,
)


def test_t_test_matches_scipy(rng):
    a, b = rng.standard_normal(12), rng.standard_normal(9) + 0.4
    res = t_test_equal_mean(a, b)
    ref = stats.ttest_ind(a, b, equal_var=True)
    assert res.statistic == pytest.approx(ref.statistic, rel=1e-12)
    assert res.p_value == pytest.approx(ref.pvalue, abs=1e-12)
    assert res.degrees_of_freedom == (11.0, 8.0)
    assert res.reject == (ref.pvalue < 0.05)


def test_f_test_matches_two_sided_reference(rng):
    a, b = 2.0 * rng.standard_normal(15), rng.standard_normal(7)
    res = f_test_equal_variance(a, b)
    ratio = a.var(ddof=1) / b.var(ddof=1)
    cdf = stats.f.cdf(ratio, 14, 6)
    assert res.statistic == pytest.approx(ratio, rel=1e-14)
    assert res.p_value == pytest.approx(min(1.0, 2 * min(cdf, 1 - cdf)), abs=1e-12)


def test_vectorized_p_values_match_single_tests(rng):
    A, B = rng.standard_normal((20, 4)), rng.standard_normal((6, 4))
    pf, pt = f_test_pvalues(A, B), t_test_pvalues(A, B)
    for j in range(4):
        assert pf[j] == pytest.approx(f_test_equal_variance(A[:, j], B[:, j]).p_value, abs=1e-14)
        assert pt[j] == pytest.approx(t_test_equal_mean(A[:, j], B[:, j]).p_value, abs=1e-14)


def test_union_reject_agrees_with_p_values(rng):
    A = rng.standard_normal((50, 8))
    B = rng.standard_normal((300, 7, 8)) * 1.3
    for kind, pvalues in ((TestKind.F_TEST, f_test_pvalues), (TestKind.T_TEST, t_test_pvalues)):
        expected = (pvalues(A, B) < 0.05).any(axis=-1)
        assert_array_equal(union_reject(A, B, kind, 0.05), expected)


def test_union_decision(rng):
    A = SampleSet(rng.standard_normal((40, 5)))
    B = SampleSet(rng.standard_normal((7, 5)) + np.array([0, 0, 0, 0, 50.0]))
    res = union_multivariate_test(A, B, TestKind.T_TEST)
    assert res.decision == Decision.DIFFERENT
    assert 4 in res.rejected.tolist()
    assert res.p_values.shape == (5,)
    assert union_multivariate_test(A, A, "TTest").decision == Decision.SAME


@pytest.mark.parametrize("d", [2, 10, 25, 50])
def test_null_union_f_test_rate_is_one_minus_095_to_the_d(d):
    trials, chunk, rejected = 10_000, 500, 0
    for c in range(trials // chunk):
        A = standard_normal(make_rng(d, c, 0), (chunk, 250, d)) * 1.5
        B = standard_normal(make_rng(d, c, 1), (chunk, 7, d)) * 1.5
        rejected += int(union_reject(A, B, TestKind.F_TEST, 0.05).sum())
    assert abs(rejected / trials - (1 - 0.95 ** d)) <= 0.03


def test_errors():
    with pytest.raises(DegenerateVariance):
        f_test_equal_variance([1.0, 1.0, 1.0], [1.0, 2.0])
    with pytest.raises(DegenerateVariance):
        t_test_equal_mean([1.0, 1.0], [2.0, 2.0])
    with pytest.raises(InsufficientData):
        t_test_equal_mean([1.0], [1.0, 2.0])
    with pytest.raises(SetTestError):
        f_test_equal_variance([1.0, 2.0], [1.0, 3.0], alpha=0.0)
    with pytest.raises(DimensionMismatch):
        union_multivariate_test(SampleSet(np.ones((3, 2))), SampleSet(np.ones((3, 3))), TestKind.F_TEST)


def test_kind_parses_from_value():
    assert TestKind("FTest") is TestKind.F_TEST
    assert TestKind("TTest") is TestKind.T_TEST
    assert TestKind.T_TEST == "TTest"


@pytest.mark.parametrize("kind", [TestKind.F_TEST, TestKind.T_TEST])
def test_null_p_values_are_uniform(kind):
    A = standard_normal(make_rng(81, 0), (10_000, 250, 1)) * 1.5
    B = standard_normal(make_rng(81, 1), (10_000, 7, 1)) * 1.5
    p = (f_test_pvalues if kind == TestKind.F_TEST else t_test_pvalues)(A, B).ravel()
    assert p.size == 10_000
    assert stats.kstest(p, "uniform").statistic <= 0.03
