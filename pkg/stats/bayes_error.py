# stats/bayes_error.py
"""
Bayes error of a pair of isotropic Gaussian class conditionals with equal
priors, and the error of deciding on whole i.i.d. sets of n points.

    miss            = P(decide Q | x ~ P)
    false_positive  = P(decide P | x ~ Q)
    bayes_error     = 1/2 miss + 1/2 false_positive
    set_bayes_error = 1/2 miss^n + 1/2 false_positive^n

Components are estimated once by Monte Carlo under the likelihood-ratio rule
(ties broken by a fair coin) and reused for every n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr
from scipy.stats import chi2

from etl.rng import make_rng, standard_normal
from kernels.common import DimensionMismatch, DomainError, NonFiniteInput, SetTestError

BATCH = 100_000
MIN_SAMPLES = 1_000
STREAM_P, STREAM_Q, STREAM_TIES = 0, 1, 2


@dataclass(frozen=True, eq=False)
class GaussianPairProblem:
    mean_p: np.ndarray
    mean_q: np.ndarray
    sigma_p: float
    sigma_q: float

    def __post_init__(self):
        mp = np.atleast_1d(np.asarray(self.mean_p, dtype=float))
        mq = np.atleast_1d(np.asarray(self.mean_q, dtype=float))
        if mp.ndim != 1 or mp.shape != mq.shape:
            raise DimensionMismatch(f"means have shapes {mp.shape} and {mq.shape}")
        if not (np.isfinite(mp).all() and np.isfinite(mq).all()):
            raise NonFiniteInput("means contain NaN or Inf")
        for s in (self.sigma_p, self.sigma_q):
            if not (math.isfinite(s) and s > 0):
                raise SetTestError(f"sigmas must be positive and finite, got {s!r}")
        object.__setattr__(self, "mean_p", mp)
        object.__setattr__(self, "mean_q", mq)
        object.__setattr__(self, "sigma_p", float(self.sigma_p))
        object.__setattr__(self, "sigma_q", float(self.sigma_q))

    @property
    def dim(self) -> int:
        return self.mean_p.size

    def log_ratio(self, x: np.ndarray) -> np.ndarray:
        """log P(x|p) - log P(x|q) for rows of x."""
        d = self.dim
        lp = -d * math.log(self.sigma_p) - ((x - self.mean_p) ** 2).sum(axis=-1) / (2 * self.sigma_p ** 2)
        lq = -d * math.log(self.sigma_q) - ((x - self.mean_q) ** 2).sum(axis=-1) / (2 * self.sigma_q ** 2)
        return lp - lq


class ErrorComponents(NamedTuple):
    miss: float
    false_positive: float
    miss_se: float
    false_positive_se: float
    samples: int

    @property
    def error(self) -> float:
        return combine(self, 1)

    @property
    def error_se(self) -> float:
        return 0.5 * math.hypot(self.miss_se, self.false_positive_se)


def combine(c: ErrorComponents, n: int) -> float:
    if n < 1:
        raise SetTestError(f"set size must be >= 1, got {n}")
    return 0.5 * c.miss ** n + 0.5 * c.false_positive ** n


def _binomial_se(rate: float, count: int) -> float:
    return math.sqrt(max(rate * (1.0 - rate), 0.0) / count)


def _wrong_count(llr: np.ndarray, coin: np.ndarray, says_p: bool) -> int:
    decide_p = (llr > 0) | ((llr == 0) & coin)
    return int((~decide_p).sum()) if says_p else int(decide_p.sum())


def _draw(problem: GaussianPairProblem, which: str, rng, count: int, n: int = 1) -> np.ndarray:
    mean, sigma = (problem.mean_p, problem.sigma_p) if which == "p" else (problem.mean_q, problem.sigma_q)
    return mean + sigma * standard_normal(rng, (count, n, problem.dim))


def _monte_carlo(problem: GaussianPairProblem, samples: int, seed: int, n: int) -> ErrorComponents:
    if samples < MIN_SAMPLES:
        raise SetTestError(f"need at least {MIN_SAMPLES} Monte Carlo samples, got {samples}")
    wrong_p = wrong_q = 0
    step = max(1, BATCH // n)
    for batch, start in enumerate(range(0, samples, step)):
        count = min(step, samples - start)
        for which in ("p", "q"):
            stream = STREAM_P if which == "p" else STREAM_Q
            x = _draw(problem, which, make_rng(seed, n, stream, batch), count, n)
            llr = problem.log_ratio(x).sum(axis=1)
            coin = make_rng(seed, n, STREAM_TIES, stream, batch).random(count) < 0.5
            if which == "p":
                wrong_p += _wrong_count(llr, coin, True)
            else:
                wrong_q += _wrong_count(llr, coin, False)
    miss, fp = wrong_p / samples, wrong_q / samples
    return ErrorComponents(miss, fp, _binomial_se(miss, samples), _binomial_se(fp, samples), samples)


def error_components(problem: GaussianPairProblem, samples: int = 1_000_000, seed: int = 0) -> ErrorComponents:
    return _monte_carlo(problem, samples, seed, 1)


def bayes_error(problem: GaussianPairProblem, samples: int = 1_000_000, seed: int = 0,
                components: ErrorComponents | None = None) -> float:
    c = components if components is not None else error_components(problem, samples, seed)
    return combine(c, 1)


def set_bayes_error(problem: GaussianPairProblem, n: int, samples: int = 1_000_000, seed: int = 0,
                    components: ErrorComponents | None = None) -> float:
    c = components if components is not None else error_components(problem, samples, seed)
    return combine(c, n)


def set_likelihood_error(problem: GaussianPairProblem, n: int, trials: int = 100_000,
                         seed: int = 0) -> ErrorComponents:
    """Error of classifying whole sets of n points by the summed log-likelihood ratio."""
    if n < 1:
        raise SetTestError(f"set size must be >= 1, got {n}")
    return _monte_carlo(problem, trials, seed, n)


def closed_form_components(problem: GaussianPairProblem) -> ErrorComponents:
    """Exact components when sigmas are equal, or when means are equal."""
    sp, sq, d = problem.sigma_p, problem.sigma_q, problem.dim
    if sp == sq:
        # the decision boundary is the bisecting hyperplane
        gap = float(np.linalg.norm(problem.mean_p - problem.mean_q))
        e = float(ndtr(-gap / (2.0 * sp)))
        return ErrorComponents(e, e, 0.0, 0.0, 0)
    if not np.array_equal(problem.mean_p, problem.mean_q):
        raise DomainError("closed form needs equal sigmas or equal means")
    # decide p inside (or outside) the ball ||x - mean||^2 = r2
    r2 = 2.0 * d * math.log(sq / sp) / (1.0 / sp ** 2 - 1.0 / sq ** 2)
    if sp < sq:
        miss = float(chi2.sf(r2 / sp ** 2, d))
        fp = float(chi2.cdf(r2 / sq ** 2, d))
    else:
        miss = float(chi2.cdf(r2 / sp ** 2, d))
        fp = float(chi2.sf(r2 / sq ** 2, d))
    return ErrorComponents(miss, fp, 0.0, 0.0, 0)
