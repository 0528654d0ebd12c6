"""Correlation, t-tests and the Student t tail they share.

Everything here is pure and works on plain sequences of floats.  The
t-distribution tail goes through the regularized incomplete beta
function, evaluated with a modified Lentz continued fraction so that
p-values far below double-precision epsilon (1e-35 and smaller) keep
their relative accuracy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Continued-fraction controls for the incomplete beta function.
BETA_CF_TOL = 1e-15
BETA_CF_MAX_ITER = 2000
_TINY = 1e-300


class DegenerateDataError(ValueError):
    """Raised when a statistic is undefined for the given data."""


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    n: int
    p_two_tailed: float


@dataclass(frozen=True)
class GroupStats:
    mean: float
    sample_std: float
    n: int


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p_two_tailed: float
    group_stats: tuple[GroupStats, GroupStats]


def _as_array(xs) -> np.ndarray:
    return np.asarray(xs, dtype=float).ravel()


def mean_std(xs: Sequence[float]) -> tuple[float, float]:
    """Arithmetic mean and sample standard deviation (n - 1 denominator)."""
    a = _as_array(xs)
    if a.size < 2:
        raise DegenerateDataError(f"standard deviation needs at least 2 values, got {a.size}")
    m = float(a.mean())
    return m, float(np.sqrt(np.sum((a - m) ** 2) / (a.size - 1)))


def mean(xs: Sequence[float]) -> float:
    a = _as_array(xs)
    if a.size < 1:
        raise DegenerateDataError("mean of an empty sample")
    return float(a.mean())


def _betacf(a: float, b: float, x: float) -> float:
    # Modified Lentz evaluation of the incomplete beta continued fraction.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, BETA_CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < BETA_CF_TOL:
            return h
    raise ArithmeticError(
        f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})"
    )


def betainc_reg(a: float, b: float, x: float, x_complement: float | None = None) -> float:
    """Regularized incomplete beta I_x(a, b).

    ``x_complement`` may carry an accurately computed ``1 - x`` when the
    caller has one; it avoids cancellation for x close to 1.
    """
    if a <= 0 or b <= 0:
        raise ValueError("betainc_reg needs a > 0 and b > 0")
    y = 1.0 - x if x_complement is None else x_complement
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log(y)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, y) / b


def student_t_sf(t: float, df: float) -> float:
    """Upper tail P(T > t) of Student's t with ``df`` degrees of freedom."""
    if not df > 0:
        raise ValueError(f"df must be positive, got {df}")
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    if t == 0.0:
        return 0.5
    t2 = t * t
    denom = df + t2
    # P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2)
    tail2 = betainc_reg(0.5 * df, 0.5, df / denom, t2 / denom)
    return 0.5 * tail2 if t > 0 else 1.0 - 0.5 * tail2


def two_tailed_p(t: float, df: float) -> float:
    return min(1.0, 2.0 * student_t_sf(abs(t), df))


def p_from_r(r: float, n: int) -> float:
    """Two-tailed p-value of a Pearson r via the t transform with n - 2 df."""
    if n < 3:
        raise DegenerateDataError(f"p-value of r needs n >= 3, got {n}")
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return two_tailed_p(t, n - 2)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> CorrelationResult:
    x = _as_array(xs)
    y = _as_array(ys)
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    n = x.size
    if n < 3:
        raise DegenerateDataError(f"pearson needs n >= 3, got {n}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateDataError("pearson undefined for a constant input")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    return CorrelationResult(r=r, n=n, p_two_tailed=p_from_r(r, n))


def welch_t(xs: Sequence[float], ys: Sequence[float], *, pooled: bool = False) -> TTestResult:
    """Two-sample t-test of mean(xs) - mean(ys).

    Welch's unequal-variance test by default; ``pooled=True`` gives the
    classical Student test with n1 + n2 - 2 degrees of freedom.
    """
    x = _as_array(xs)
    y = _as_array(ys)
    n1, n2 = x.size, y.size
    if n1 < 2 or n2 < 2:
        raise DegenerateDataError(f"t-test needs n >= 2 per group, got {n1} and {n2}")
    m1, s1 = mean_std(x)
    m2, s2 = mean_std(y)
    groups = (GroupStats(m1, s1, n1), GroupStats(m2, s2, n2))
    v1, v2 = s1 * s1, s2 * s2
    diff = m1 - m2
    if v1 == 0.0 and v2 == 0.0:
        if diff == 0.0:
            raise DegenerateDataError("t-test undefined: both groups constant and equal")
        return TTestResult(math.copysign(math.inf, diff), float(n1 + n2 - 2), 0.0, groups)
    if pooled:
        df = float(n1 + n2 - 2)
        sp2 = ((n1 - 1) * v1 + (n2 - 1) * v2) / df
        se = math.sqrt(sp2 * (1.0 / n1 + 1.0 / n2))
    else:
        a1, a2 = v1 / n1, v2 / n2
        se = math.sqrt(a1 + a2)
        df = (a1 + a2) ** 2 / (a1 * a1 / (n1 - 1) + a2 * a2 / (n2 - 1))
    t = diff / se
    return TTestResult(t, df, two_tailed_p(t, df), groups)
