import math

import pytest
from scipy.special import ndtr

from etl.rng import make_rng
from kernels.common import DimensionMismatch, DomainError, SetTestError
from stats.bayes_error import (
    ErrorComponents,
    GaussianPairProblem,
    bayes_error,
    closed_form_components,
    combine,
    error_components,
    set_bayes_error,
    set_likelihood_error,
)


def test_set_of_one_is_the_bayes_error():
    problem = GaussianPairProblem([0.0, 0.0], [1.0, 0.5], 1.0, 1.3)
    assert set_bayes_error(problem, 1, samples=50_000, seed=3) == bayes_error(problem, samples=50_000, seed=3)


def test_set_error_never_exceeds_point_error():
    rng = make_rng(40)
    for _ in range(20):
        d = int(rng.integers(1, 6))
        problem = GaussianPairProblem(rng.uniform(-1, 1, d), rng.uniform(-1, 1, d),
                                      float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.5, 2.0)))
        comp = error_components(problem, samples=20_000, seed=int(rng.integers(0, 1000)))
        base = bayes_error(problem, components=comp)
        for n in (1, 2, 5, 10):
            assert set_bayes_error(problem, n, components=comp) <= base + 3 * comp.error_se


def test_one_dimensional_closed_form():
    problem = GaussianPairProblem([0.0], [2.0], 1.0, 1.0)
    exact = closed_form_components(problem)
    assert exact.miss == pytest.approx(float(ndtr(-1.0)), abs=1e-15)
    mc = error_components(problem, samples=1_000_000, seed=1)
    assert mc.miss == pytest.approx(ndtr(-1.0), abs=1e-3)
    assert mc.false_positive == pytest.approx(ndtr(-1.0), abs=1e-3)
    assert bayes_error(problem, components=mc) == pytest.approx(0.158655, abs=1e-3)
    assert set_bayes_error(problem, 3, components=exact) == pytest.approx(ndtr(-1.0) ** 3, abs=1e-15)


def test_equal_means_closed_form_matches_monte_carlo():
    problem = GaussianPairProblem([0.0, 0.0], [0.0, 0.0], 1.0, 2.0)
    exact = closed_form_components(problem)
    mc = error_components(problem, samples=400_000, seed=2)
    assert mc.miss == pytest.approx(exact.miss, abs=4e-3)
    assert mc.false_positive == pytest.approx(exact.false_positive, abs=4e-3)


def test_identical_classes_give_one_half():
    problem = GaussianPairProblem([0.5], [0.5], 1.0, 1.0)
    assert closed_form_components(problem).error == pytest.approx(0.5)
    mc = error_components(problem, samples=20_000, seed=0)
    assert mc.error == pytest.approx(0.5, abs=0.02)


def test_set_likelihood_error():
    problem = GaussianPairProblem([0.0], [1.0], 1.0, 1.0)
    single = set_likelihood_error(problem, 1, trials=20_000, seed=4)
    assert single == error_components(problem, samples=20_000, seed=4)
    five = set_likelihood_error(problem, 5, trials=20_000, seed=4)
    # summed LLR over 5 points: mean gap sqrt(5) in units of sigma
    assert five.error == pytest.approx(ndtr(-math.sqrt(5) / 2), abs=0.01)
    assert five.error < single.error


def test_validation():
    with pytest.raises(DimensionMismatch):
        GaussianPairProblem([0.0], [0.0, 1.0], 1.0, 1.0)
    with pytest.raises(SetTestError):
        GaussianPairProblem([0.0], [1.0], 0.0, 1.0)
    comp = closed_form_components(GaussianPairProblem([0.0], [1.0], 1.0, 1.0))
    with pytest.raises(SetTestError):
        combine(comp, 0)
    with pytest.raises(DomainError):
        closed_form_components(GaussianPairProblem([0.0], [1.0], 1.0, 2.0))
    with pytest.raises(SetTestError):
        error_components(GaussianPairProblem([0.0], [1.0], 1.0, 1.0), samples=10)


def test_set_error_decays_monotonically_and_geometrically():
    problem = GaussianPairProblem([0.0], [1.0], 1.0, 1.0)
    comp = ErrorComponents(miss=0.3, false_positive=0.1, miss_se=0.0, false_positive_se=0.0, samples=1000)
    errors = [set_bayes_error(problem, n, components=comp) for n in range(1, 41)]
    assert all(b <= a for a, b in zip(errors, errors[1:]))
    rate = math.log(errors[19]) - math.log(errors[20])
    assert rate == pytest.approx(-math.log(max(comp.miss, comp.false_positive)), abs=1e-3)
