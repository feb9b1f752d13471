"""Merger laws of the Lambda-coalescent with Lambda(dx) = (1 - alpha) x^(-alpha) dx.

alpha = 0 is the Bolthausen-Sznitman coalescent.  The size of the next merger
from ``n`` blocks has the law of ``nu_alpha`` conditioned on ``nu_alpha <= n``;
``verify_link`` measures how exactly that holds numerically.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln

from .errors import DomainError, ParameterError
from .offspring import pmf_alpha


@dataclass(frozen=True)
class CoalescentSpec:
    alpha: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in [0, 1), got {self.alpha!r}")


def _log_rate(alpha, n, k):
    return np.log1p(-alpha) + betaln(k - 1.0 - alpha, n - k + 1.0)


def merger_rate(spec: CoalescentSpec, n: int, k):
    """lambda_{n,k}: rate at which a given k of n blocks merge."""
    ks = np.asarray(k)
    if n < 2 or np.any(ks < 2) or np.any(ks > n):
        raise DomainError(f"need 2 <= k <= n, got n={n}, k={k}")
    out = np.exp(_log_rate(spec.alpha, float(n), ks.astype(float)))
    return out[()] if np.ndim(out) == 0 else out


def next_merger_law(spec: CoalescentSpec, n: int) -> np.ndarray:
    """P(Y_n = k) for k = 2..n, as an array of length n - 1."""
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    k = np.arange(2, n + 1, dtype=float)
    logw = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0) + _log_rate(spec.alpha, float(n), k)
    w = np.exp(logw - logw.max())
    return w / w.sum()


def conditional_offspring_law(alpha: float, n: int) -> np.ndarray:
    """P(nu_alpha = k | nu_alpha <= n) for k = 2..n."""
    p = np.atleast_1d(pmf_alpha(alpha, np.arange(2, n + 1)))
    return p / p.sum()


def link_discrepancy(alpha: float, n_max: int) -> np.ndarray:
    """max_k |P(Y_n = k) - P(nu_alpha = k | nu_alpha <= n)| for n = 2..n_max."""
    if n_max < 2:
        raise DomainError(f"need n_max >= 2, got {n_max}")
    spec = CoalescentSpec(alpha)
    return np.array(
        [np.max(np.abs(next_merger_law(spec, n) - conditional_offspring_law(alpha, n))) for n in range(2, n_max + 1)]
    )


def verify_link(alpha: float, n_max: int) -> float:
    """Largest discrepancy of the merger/offspring link over n <= n_max."""
    return float(link_discrepancy(alpha, n_max).max())


def link_table_csv(alphas, n_max: int) -> str:
    """CSV with one row per (alpha, n): the max discrepancy over k."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "n", "max_discrepancy"])
    for a in alphas:
        for n, d in zip(range(2, n_max + 1), link_discrepancy(float(a), n_max)):
            w.writerow([repr(float(a)), n, f"{d:.3e}"])
    return buf.getvalue()
