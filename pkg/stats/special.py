# stats/special.py
"""
Regularized incomplete beta I_x(a, b) and the F / Student-t CDFs built on it.

Modified Lentz evaluation of the continued fraction, vectorized over numpy
arrays; for x >= a/(a+b) it evaluates 1 - I_{1-x}(b, a) instead.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import brentq
from scipy.special import betaln

from kernels.common import DomainError, setup_logger

logger = setup_logger("special")

FPMIN = 1e-300
EPS = 1e-15
MAX_ITER = 5000


def _floor(v: np.ndarray) -> np.ndarray:
    return np.where(np.abs(v) < FPMIN, FPMIN, v)


def _betacf(a: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = np.ones_like(x)
    d = 1.0 / _floor(1.0 - qab * x / qap)
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for m in range(1, MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 / _floor(1.0 + aa * d)
        c = _floor(1.0 + aa / c)
        step = d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 / _floor(1.0 + aa * d)
        c = _floor(1.0 + aa / c)
        delta = d * c
        h = np.where(done, h, h * step * delta)
        done |= np.abs(delta - 1.0) < EPS
        if done.all():
            break
    else:
        logger.warning(f"incomplete beta continued fraction not converged after {MAX_ITER} terms "
                       f"for {int((~done).sum())} argument(s)")
    return h


def reg_incomplete_beta(x, a, b):
    """I_x(a, b) for x in [0, 1], a > 0, b > 0. Scalars in, float out; arrays broadcast."""
    scalar = all(np.ndim(v) == 0 for v in (x, a, b))
    x, a, b = (np.asarray(v, dtype=float) for v in np.broadcast_arrays(x, a, b))
    bad = ~((x >= 0) & (x <= 1)) | ~(a > 0) | ~(b > 0) | ~np.isfinite(a) | ~np.isfinite(b)
    if bad.any():
        raise DomainError("reg_incomplete_beta needs 0 <= x <= 1, a > 0 and b > 0 (finite)")

    out = np.where(x >= 1.0, 1.0, 0.0)
    inner = (x > 0) & (x < 1)
    if inner.any():
        xi, ai, bi = x[inner], a[inner], b[inner]
        log_front = ai * np.log(xi) + bi * np.log1p(-xi) - betaln(ai, bi)
        front = np.exp(log_front)
        direct = xi < ai / (ai + bi)
        val = np.empty_like(xi)
        if direct.any():
            val[direct] = front[direct] * _betacf(ai[direct], bi[direct], xi[direct]) / ai[direct]
        flip = ~direct
        if flip.any():
            val[flip] = 1.0 - front[flip] * _betacf(bi[flip], ai[flip], 1.0 - xi[flip]) / bi[flip]
        out[inner] = np.clip(val, 0.0, 1.0)
    return float(out) if scalar else out


def f_cdf(f, d1, d2):
    """P(F <= f) for F ~ F(d1, d2)."""
    scalar = all(np.ndim(v) == 0 for v in (f, d1, d2))
    f, d1, d2 = (np.asarray(v, dtype=float) for v in np.broadcast_arrays(f, d1, d2))
    if np.isnan(f).any():
        raise DomainError("F statistic is NaN")
    pos = f > 0
    out = np.zeros(f.shape)
    fin = pos & np.isfinite(f)
    out[pos & ~fin] = 1.0
    if fin.any():
        num = d1[fin] * f[fin]
        out[fin] = reg_incomplete_beta(num / (num + d2[fin]), d1[fin] / 2.0, d2[fin] / 2.0)
    return float(out) if scalar else out


def t_two_sided_p(t, df):
    """P(|T| >= |t|) for T ~ t(df)."""
    scalar = np.ndim(t) == 0 and np.ndim(df) == 0
    t, df = (np.asarray(v, dtype=float) for v in np.broadcast_arrays(t, df))
    if np.isnan(t).any():
        raise DomainError("t statistic is NaN")
    with np.errstate(over="ignore"):
        x = df / (df + t * t)
    p = reg_incomplete_beta(np.where(np.isfinite(t), x, 0.0), df / 2.0, np.full(df.shape, 0.5))
    return float(p) if scalar else p


def t_cdf(t, df):
    """P(T <= t) for T ~ t(df)."""
    scalar = np.ndim(t) == 0 and np.ndim(df) == 0
    t = np.asarray(t, dtype=float)
    tail = 0.5 * np.asarray(t_two_sided_p(t, df))
    out = np.where(t > 0, 1.0 - tail, tail)
    return float(out) if scalar else out


def f_two_sided_p(f, d1, d2):
    """2 * min(CDF, 1 - CDF), capped at 1."""
    cdf = np.asarray(f_cdf(f, d1, d2))
    p = np.minimum(1.0, 2.0 * np.minimum(cdf, 1.0 - cdf))
    return float(p) if p.ndim == 0 else p


# ---------- critical values ----------
def _bracket_root(fn, lo: float, hi: float) -> float:
    """Root of an increasing fn, widening [lo, hi] geometrically until it brackets."""
    while fn(lo) > 0:
        lo /= 2.0
    while fn(hi) < 0:
        hi *= 2.0
    return brentq(fn, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def t_critical(df: float, alpha: float) -> float:
    """c with P(|T| >= c) = alpha, so the two-sided test rejects iff |t| > c."""
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return _bracket_root(lambda t: alpha - t_two_sided_p(t, df), 0.0, 1.0)


def f_critical(d1: float, d2: float, alpha: float) -> tuple[float, float]:
    """(lo, hi) with CDF(lo) = alpha/2 and CDF(hi) = 1 - alpha/2."""
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    lo = _bracket_root(lambda f: f_cdf(f, d1, d2) - alpha / 2.0, 0.5, 1.0)
    hi = _bracket_root(lambda f: f_cdf(f, d1, d2) - (1.0 - alpha / 2.0), 1.0, 2.0)
    return lo, hi
