"""Correlation statistics: Pearson, the dependent-correlation t test,
the Student-t tail it needs, and score histograms.

The t test compares two correlations r13 and r23 that share variable 1
(two systems' correlations with the same gold scores), accounting for
the inter-system correlation r12:

    t = (r13 - r23) * sqrt( (n-1)(1+r12) /
        ( 2K(n-1)/(n-3) + ((r13+r23)^2 / 4)(1-r12)^3 ) )

with K = 1 - r12^2 - r13^2 - r23^2 + 2*r12*r13*r23 (the determinant of
the 3x3 correlation matrix) and n-3 degrees of freedom.  The reported
p-value is one-tailed: P(T > t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RangeError

__all__ = ["pearson", "williams_test", "WilliamsResult", "t_tail", "score_histogram", "histogram_csv"]


def pearson(x, y) -> float:
    """Sample Pearson correlation of two equal-length sequences."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"inputs must be equal-length 1-D sequences, got {x.shape} and {y.shape}")
    if len(x) < 3:
        raise ValueError("correlation needs at least 3 observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("correlation is undefined for a constant input")
    return float(dx @ dy) / (sx * sy)


_FPMIN = 1e-300
_CF_EPS = 1e-14
_CF_MAXIT = 500


def _betacf(a: float, b: float, x: float) -> float:
    # Lentz's continued fraction for the incomplete beta integral.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def _reg_inc_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = math.exp(
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log(1.0 - x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_tail(t: float, df: int) -> float:
    """One-tailed tail probability P(T > t) of Student's t with df degrees."""
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    t = float(t)
    x = df / (df + t * t)
    half_two_sided = 0.5 * _reg_inc_beta(df / 2.0, 0.5, x)
    return half_two_sided if t >= 0 else 1.0 - half_two_sided


@dataclass(frozen=True)
class WilliamsResult:
    """t statistic, n-3 degrees of freedom, and one-tailed p-value."""

    t_statistic: float
    degrees_of_freedom: int
    p_value: float

    def __post_init__(self):
        if self.degrees_of_freedom < 1:
            raise ValueError("degrees of freedom must be >= 1")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError("p-value must lie in [0,1]")


def williams_test(r12: float, r13: float, r23: float, n: int) -> WilliamsResult:
    """Significance of the difference between dependent correlations r13 and r23.

    See the module docstring for the statistic.  The correlation triple
    must form a positive semidefinite matrix and n must be at least 4.
    """
    for name, r in (("r12", r12), ("r13", r13), ("r23", r23)):
        if not -1.0 < r < 1.0:
            raise ValueError(f"{name} must lie in (-1,1), got {r}")
    if n < 4:
        raise ValueError(f"n must be >= 4, got {n}")
    k = 1.0 - r12 * r12 - r13 * r13 - r23 * r23 + 2.0 * r12 * r13 * r23
    if k < -1e-12:
        raise ValueError("correlation triple is not positive semidefinite")
    k = max(k, 0.0)
    numerator = (r13 - r23) * math.sqrt((n - 1) * (1.0 + r12))
    denom_sq = 2.0 * k * (n - 1) / (n - 3) + ((r13 + r23) ** 2 / 4.0) * (1.0 - r12) ** 3
    if denom_sq <= 0.0:
        t = 0.0 if numerator == 0.0 else math.copysign(math.inf, numerator)
    else:
        t = numerator / math.sqrt(denom_sq)
    df = n - 3
    return WilliamsResult(t, df, t_tail(t, df))


def score_histogram(scores, bins: int) -> np.ndarray:
    """Counts over equal-width bins of [0,1]; left-closed, last bin closed.

    A score s lands in bin min(floor(s*bins), bins-1), so 1.0 falls in
    the last bin and interior boundaries belong to the bin on their right.
    """
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    counts = np.zeros(bins, dtype=np.int64)
    for s in scores:
        s = float(s)
        if not 0.0 <= s <= 1.0:
            raise RangeError(f"score {s} outside [0,1]")
        counts[min(int(s * bins), bins - 1)] += 1
    return counts


def histogram_csv(counts) -> str:
    bins = len(counts)
    lines = ["bin_lo,bin_hi,count"]
    lines += [f"{i / bins!r},{(i + 1) / bins!r},{int(c)}" for i, c in enumerate(counts)]
    return "\n".join(lines) + "\n"
