"""Goodness-of-fit statistics used by the experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import StatisticsError

MIN_EXPECTED = 5.0
_MAX_BUCKETS = 100_000
_CHUNK = 4096


def ecdf(sample) -> tuple[np.ndarray, np.ndarray]:
    """Distinct sorted values and the ECDF at each of them."""
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise StatisticsError("empty sample")
    vals, counts = np.unique(x, return_counts=True)
    return vals, np.cumsum(counts) / x.size


def ks_distance(sample, cdf) -> float:
    """One-sample KS sup-distance between the ECDF of ``sample`` and ``cdf``."""
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise StatisticsError("empty sample")
    if not np.all(np.isfinite(x)):
        raise StatisticsError("sample contains non-finite values")
    vals, f_emp = ecdf(x)
    f = np.asarray(cdf(vals), dtype=float)
    f_left = np.concatenate(([0.0], f_emp[:-1]))
    return float(max(np.max(np.abs(f_emp - f)), np.max(np.abs(f - f_left))))


@dataclass(frozen=True)
class ChiSquare:
    statistic: float
    pvalue: float
    dof: int
    buckets: int


def merge_buckets(observed, expected, min_expected: float = MIN_EXPECTED):
    """Merge adjacent buckets left to right until every expected count is >= min_expected."""
    obs = np.asarray(observed, dtype=float)
    exp = np.asarray(expected, dtype=float)
    if obs.shape != exp.shape or obs.ndim != 1:
        raise StatisticsError("observed and expected must be 1-d arrays of equal length")
    mo, me = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(obs, exp):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            mo.append(acc_o)
            me.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if not me:
            raise StatisticsError("total expected count below the bucket minimum")
        mo[-1] += acc_o
        me[-1] += acc_e
    return np.array(mo), np.array(me)


def chi_square(observed, expected, min_expected: float = MIN_EXPECTED, ddof: int = 0) -> ChiSquare:
    """Pearson chi-square after bucket merging; expected is rescaled to the observed total."""
    obs, exp = merge_buckets(observed, expected, min_expected)
    if obs.size < 2:
        raise StatisticsError("fewer than two buckets after merging")
    exp = exp * (obs.sum() / exp.sum())
    stat, p = stats.chisquare(obs, exp, ddof=ddof)
    return ChiSquare(float(stat), float(p), int(obs.size - 1 - ddof), int(obs.size))


def discrete_chi_square(sample, pmf, start: int = 1, min_expected: float = MIN_EXPECTED) -> ChiSquare:
    """Chi-square of an integer sample against ``pmf(k)`` on ``k >= start``.

    Values are bucketed one per integer while the remaining mass is worth a
    bucket; everything beyond shares one tail bucket.  Sparse buckets are
    merged afterwards, so zero-probability gaps in the support are harmless.
    """
    x = np.asarray(sample, dtype=np.int64)
    n = x.size
    if n == 0:
        raise StatisticsError("empty sample")
    if np.any(x < start):
        raise StatisticsError(f"sample has values below the support start {start}")
    # evaluate the pmf in chunks until the remaining mass is too small for a bucket
    chunks = []
    total = 0.0
    top = start
    while n * (1.0 - total) >= min_expected and top - start < _MAX_BUCKETS:
        ks = np.arange(top, min(top + _CHUNK, start + _MAX_BUCKETS))
        p = _pmf_values(pmf, ks)
        cum = total + np.cumsum(p)
        stop = np.flatnonzero(n * (1.0 - cum) < min_expected)
        if stop.size:
            p = p[: stop[0] + 1]
        chunks.append(p)
        total = float(total + p.sum())
        top += p.size
    probs = np.concatenate(chunks) if chunks else np.zeros(0)
    counts = np.bincount(np.minimum(x, top) - start, minlength=probs.size + 1)[: probs.size + 1]
    expected = np.append(probs, max(1.0 - total, 0.0)) * n
    return chi_square(counts, expected, min_expected)


def _pmf_values(pmf, ks) -> np.ndarray:
    # vectorised call when the pmf supports it, one call per value otherwise
    try:
        p = np.asarray(pmf(ks), dtype=float)
        if p.shape == ks.shape:
            return p
    except (TypeError, ValueError):
        pass
    return np.array([float(pmf(int(k))) for k in ks])


def tv_distance(sample, pmf_values, start: int = 0) -> float:
    """Total variation between an integer sample and a pmf given on ``start .. start+len-1``.

    Mass beyond the last value forms one tail bucket on both sides.
    """
    x = np.asarray(sample, dtype=np.int64)
    p = np.asarray(pmf_values, dtype=float)
    if x.size == 0 or p.size == 0:
        raise StatisticsError("empty sample or pmf")
    if np.any(x < start):
        raise StatisticsError(f"sample has values below the support start {start}")
    top = start + p.size
    emp = np.bincount(np.minimum(x, top) - start, minlength=p.size + 1) / x.size
    ref = np.append(p, max(1.0 - math.fsum(p), 0.0))
    return 0.5 * float(np.abs(emp - ref).sum())


def chi_square_two_sample(a, b, min_expected: float = MIN_EXPECTED) -> ChiSquare:
    """Homogeneity test of two integer samples over merged value buckets."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.size == 0 or b.size == 0:
        raise StatisticsError("empty sample")
    vals = np.union1d(a, b)
    ca = np.searchsorted(vals, a)
    cb = np.searchsorted(vals, b)
    ha = np.bincount(ca, minlength=vals.size).astype(float)
    hb = np.bincount(cb, minlength=vals.size).astype(float)
    # merge so that the smaller expected cell in each column reaches the minimum
    frac = min(a.size, b.size) / (a.size + b.size)
    cols_a, cols_b = [], []
    acc_a = acc_b = 0.0
    for x, y in zip(ha, hb):
        acc_a += x
        acc_b += y
        if (acc_a + acc_b) * frac >= min_expected:
            cols_a.append(acc_a)
            cols_b.append(acc_b)
            acc_a = acc_b = 0.0
    if acc_a or acc_b:
        if not cols_a:
            raise StatisticsError("fewer than two buckets after merging")
        cols_a[-1] += acc_a
        cols_b[-1] += acc_b
    if len(cols_a) < 2:
        raise StatisticsError("fewer than two buckets after merging")
    table = np.array([cols_a, cols_b])
    res = stats.chi2_contingency(table, correction=False)
    return ChiSquare(float(res.statistic), float(res.pvalue), int(res.dof), len(cols_a))


def binomial_ci(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Normal interval with continuity correction; Clopper-Pearson when counts are small."""
    if n <= 0 or not 0 <= k <= n:
        raise StatisticsError(f"invalid binomial counts k={k}, n={n}")
    if k < 30 or n - k < 30:
        ci = stats.binomtest(int(k), int(n)).proportion_ci(confidence_level=level, method="exact")
        return float(ci.low), float(ci.high)
    z = stats.norm.ppf(0.5 + level / 2.0)
    p = k / n
    half = z * math.sqrt(p * (1.0 - p) / n) + 0.5 / n
    return max(0.0, p - half), min(1.0, p + half)


def binomial_z(k: int, n: int, p0: float) -> float:
    """(k/n - p0) in units of the binomial sigma at ``p0``."""
    if n <= 0:
        raise StatisticsError("no trials")
    if not 0.0 < p0 < 1.0:
        return 0.0 if k == round(p0 * n) else math.inf
    return (k / n - p0) / math.sqrt(p0 * (1.0 - p0) / n)
