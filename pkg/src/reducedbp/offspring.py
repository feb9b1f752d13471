"""Offspring distributions: the critical heavy-tailed family, the limit laws
nu_alpha / nu_0 and the Sibuya marginals.

All samplers use inverse transform with the convention that a uniform
``u`` in (0, 1] maps to the smallest ``k`` with ``P(nu > k) < u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numba as nb
import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .errors import DomainError, ParameterError

E = math.e
# largest value an inverse-transform draw may return; doubles as a saturation marker
DRAW_CAP = 1 << 62

KIND_HEAVY = 0
KIND_ALPHA = 1
KIND_ZERO = 2
KIND_SIBUYA = 3
KIND_TABLE = 4


class LawKind(str, Enum):
    HEAVY_TAIL = "heavy_tail"
    ALPHA_LIMIT = "alpha_limit"
    ZERO_LIMIT = "zero_limit"
    SIBUYA = "sibuya"
    TABLE = "table"


_KIND_CODES = {
    LawKind.HEAVY_TAIL: KIND_HEAVY,
    LawKind.ALPHA_LIMIT: KIND_ALPHA,
    LawKind.ZERO_LIMIT: KIND_ZERO,
    LawKind.SIBUYA: KIND_SIBUYA,
    LawKind.TABLE: KIND_TABLE,
}


# ---------------------------------------------------------------------------
# compiled inverse-transform kernels


@nb.njit(cache=True)
def _tail_heavy(k, beta, c, t0):
    # the single definition of P(nu > k); the sampler compares against it exactly
    if k <= 0:
        return t0
    y = float(k)
    return c / (y * math.log(E + y) ** (1.0 + beta))


@nb.njit(cache=True)
def _tail_heavy_many(ks, beta, c, t0):
    out = np.empty(ks.shape[0])
    for i in range(ks.shape[0]):
        out[i] = _tail_heavy(ks[i], beta, c, t0)
    return out


@nb.njit(cache=True)
def _draw_heavy(beta, c, t0, u):
    if u > t0:
        return 0
    if _tail_heavy(1, beta, c, t0) < u:
        return 1
    target = math.log(c / u)
    v = target
    for _ in range(100):
        ev = math.exp(v)
        ln_ = math.log(E + ev)
        psi = v + (1.0 + beta) * math.log(ln_) - target
        dpsi = 1.0 + (1.0 + beta) * ev / ((E + ev) * ln_)
        step = psi / dpsi
        v -= step
        if v < 0.0:
            v = 0.0
        if abs(step) < 1e-13:
            break
    y = math.exp(v)
    if y >= DRAW_CAP:
        return DRAW_CAP
    k = max(2, int(math.floor(y)))
    while k > 2 and _tail_heavy(k - 1, beta, c, t0) < u:
        k -= 1
    while _tail_heavy(k, beta, c, t0) >= u:
        k += 1
    return k


@nb.njit(cache=True)
def _log_tail_alpha(k, alpha):
    # log P(nu_alpha > k) for k >= 1, 0 <= alpha < 1
    return math.lgamma(k - alpha) - math.lgamma(1.0 - alpha) - math.lgamma(k + 1.0)


@nb.njit(cache=True)
def _log_tail_sibuya(k, gamma):
    # log P(X > k) for k >= 0, 0 < gamma < 1
    return math.lgamma(k + 1.0 - gamma) - math.lgamma(1.0 - gamma) - math.lgamma(k + 1.0)


@nb.njit(cache=True)
def _search(kind, a, lo, logu):
    # smallest k >= lo with log_tail(k) < logu, given log_tail(lo - 1) >= logu
    hi = max(2 * lo, 2)
    while True:
        if kind == KIND_ALPHA:
            lt = _log_tail_alpha(float(hi), a)
        else:
            lt = _log_tail_sibuya(float(hi), a)
        if lt < logu:
            break
        if hi >= DRAW_CAP // 2:
            return DRAW_CAP
        lo = hi + 1
        hi = 2 * hi
    # invariant: tail(lo - 1) >= u > tail(hi)
    while lo < hi:
        mid = lo + (hi - lo) // 2
        if kind == KIND_ALPHA:
            lt = _log_tail_alpha(float(mid), a)
        else:
            lt = _log_tail_sibuya(float(mid), a)
        if lt < logu:
            hi = mid
        else:
            lo = mid + 1
    return lo


@nb.njit(cache=True)
def _draw_table(tail, u):
    lo = 0
    hi = tail.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if tail[mid] < u:
            hi = mid
        else:
            lo = mid + 1
    return lo


@nb.njit(cache=True)
def draw_from_uniform(kind, p0, p1, p2, tail, u):
    """Inverse-transform draw for a law given by its kernel arguments."""
    if kind == KIND_HEAVY:
        return _draw_heavy(p0, p1, p2, u)
    if kind == KIND_ZERO:
        k = int(math.floor(1.0 / u)) + 1
        if k < 2:
            k = 2
        while k > 2 and 1.0 / (k - 1) < u:
            k -= 1
        while 1.0 / k >= u:
            k += 1
        return k
    if kind == KIND_ALPHA:
        if p0 >= 1.0:
            return 2
        return _search(KIND_ALPHA, p0, 2, math.log(u))
    if kind == KIND_SIBUYA:
        if p0 >= 1.0:
            return 1
        return _search(KIND_SIBUYA, p0, 1, math.log(u))
    return _draw_table(tail, u)


@nb.njit(cache=True)
def _draw_many(kind, p0, p1, p2, tail, us):
    out = np.empty(us.shape[0], dtype=np.int64)
    for i in range(us.shape[0]):
        out[i] = draw_from_uniform(kind, p0, p1, p2, tail, us[i])
    return out


# ---------------------------------------------------------------------------
# law object


@dataclass(frozen=True, eq=False)
class OffspringLaw:
    """A distribution on {0, 1, 2, ...} with exact pmf, tail and sampler.

    ``params`` holds, by kind: heavy tail ``(beta, C, T0)``; alpha limit
    ``(alpha,)``; zero limit ``()``; Sibuya ``(gamma,)``; table ``()``
    with the pmf in ``table``.
    """

    kind: LawKind
    params: tuple = ()
    table: np.ndarray | None = field(default=None, repr=False)
    label: str = ""

    # -- kernel plumbing ----------------------------------------------------
    def kernel_args(self):
        p = tuple(self.params) + (0.0,) * (3 - len(self.params))
        if self.kind is LawKind.TABLE:
            tail = _table_tail(self.table)
        else:
            tail = np.zeros(1)
        return _KIND_CODES[self.kind], float(p[0]), float(p[1]), float(p[2]), tail

    # -- distribution functions ---------------------------------------------
    @property
    def beta(self) -> float:
        if self.kind is not LawKind.HEAVY_TAIL:
            raise AttributeError("beta is defined for heavy-tail laws only")
        return self.params[0]

    @property
    def C(self) -> float:
        if self.kind is not LawKind.HEAVY_TAIL:
            raise AttributeError("C is defined for heavy-tail laws only")
        return self.params[1]

    @property
    def T0(self) -> float:
        if self.kind is not LawKind.HEAVY_TAIL:
            raise AttributeError("T0 is defined for heavy-tail laws only")
        return self.params[2]

    def tail(self, k):
        """P(nu > k), vectorized over integer ``k >= 0``."""
        ks = np.asarray(k)
        if np.any(ks < 0):
            raise DomainError("tail is defined for k >= 0")
        kf = ks.astype(float)
        kind = self.kind
        if kind is LawKind.HEAVY_TAIL:
            beta, c, t0 = self.params
            flat = np.atleast_1d(ks).astype(np.int64).ravel()
            out = _tail_heavy_many(flat, beta, c, t0).reshape(np.shape(ks))
        elif kind is LawKind.ZERO_LIMIT:
            out = np.where(ks <= 1, 1.0, 1.0 / np.maximum(kf, 1.0))
        elif kind is LawKind.ALPHA_LIMIT:
            (alpha,) = self.params
            if alpha >= 1.0:
                out = np.where(ks <= 1, 1.0, 0.0)
            else:
                kk = np.maximum(kf, 1.0)
                out = np.where(
                    ks <= 1, 1.0, np.exp(gammaln(kk - alpha) - gammaln(1.0 - alpha) - gammaln(kk + 1.0))
                )
        elif kind is LawKind.SIBUYA:
            (gamma,) = self.params
            if gamma >= 1.0:
                out = np.where(ks == 0, 1.0, 0.0)
            else:
                out = np.exp(gammaln(kf + 1.0 - gamma) - gammaln(1.0 - gamma) - gammaln(kf + 1.0))
        else:
            tail = _table_tail(self.table)
            out = np.where(ks < tail.size, tail[np.minimum(ks, tail.size - 1)], 0.0)
        return out[()] if np.ndim(out) == 0 else out

    def pmf(self, k):
        """P(nu = k), vectorized over integer ``k >= 0``."""
        ks = np.asarray(k)
        if np.any(ks < 0):
            raise DomainError("pmf is defined for k >= 0")
        kind = self.kind
        if kind is LawKind.HEAVY_TAIL:
            out = _heavy_pmf(ks, *self.params)
        elif kind is LawKind.ZERO_LIMIT:
            out = pmf_alpha(0.0, np.maximum(ks, 2)) * (ks >= 2)
        elif kind is LawKind.ALPHA_LIMIT:
            out = pmf_alpha(self.params[0], np.maximum(ks, 2)) * (ks >= 2)
        elif kind is LawKind.SIBUYA:
            out = _sibuya_pmf_closed(self.params[0], np.maximum(ks, 1)) * (ks >= 1)
        else:
            t = self.table
            out = np.where(ks < t.size, t[np.minimum(ks, t.size - 1)], 0.0)
        out = np.asarray(out, dtype=float)
        return out[()] if out.ndim == 0 else out

    @property
    def mean(self) -> float:
        kind = self.kind
        if kind is LawKind.HEAVY_TAIL:
            return 1.0
        if kind is LawKind.ZERO_LIMIT:
            return math.inf
        if kind is LawKind.ALPHA_LIMIT:
            alpha = self.params[0]
            return math.inf if alpha == 0.0 else 1.0 + 1.0 / alpha
        if kind is LawKind.SIBUYA:
            return 1.0 if self.params[0] >= 1.0 else math.inf
        return float(np.dot(np.arange(self.table.size), self.table))

    # -- sampling ------------------------------------------------------------
    def sample(self, rng: np.random.Generator, size=None):
        """Draw from the law using uniforms taken from ``rng``."""
        n = 1 if size is None else int(np.prod(size))
        us = 1.0 - rng.random(n)  # (0, 1]
        draws = _draw_many(*self.kernel_args(), us)
        if size is None:
            return int(draws[0])
        return draws.reshape(size)

    def quantile(self, u):
        """Inverse-transform map from uniforms in (0, 1] to draws."""
        us = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any((us <= 0.0) | (us > 1.0)):
            raise DomainError("uniforms must lie in (0, 1]")
        out = _draw_many(*self.kernel_args(), us)
        return int(out[0]) if np.ndim(u) == 0 else out


def _table_tail(pmf: np.ndarray) -> np.ndarray:
    rev = np.cumsum(pmf[::-1])[::-1]
    tail = np.empty_like(pmf)
    tail[:-1] = rev[1:]
    tail[-1] = 0.0
    return tail


def _heavy_pmf(ks, beta, c, t0):
    kf = np.maximum(np.asarray(ks, dtype=float), 2.0)
    # tail(k-1) - tail(k) without cancellation: tail(k-1) * (1 - tail(k)/tail(k-1))
    l_prev = np.log(E + kf - 1.0)
    log_ratio = np.log1p(-1.0 / kf) + (1.0 + beta) * np.log1p(np.log1p(-1.0 / (E + kf)) / np.log(E + kf))
    prev = c / ((kf - 1.0) * l_prev ** (1.0 + beta))
    big = prev * -np.expm1(log_ratio)
    one = t0 - c / math.log(E + 1.0) ** (1.0 + beta)
    return np.where(ks == 0, 1.0 - t0, np.where(ks == 1, one, big))


# ---------------------------------------------------------------------------
# constructors


def _tail_density(y, beta):
    return 1.0 / (y * np.log(E + y) ** (1.0 + beta))


def tail_integral(a: float, beta: float) -> float:
    """Integral of 1/(y ln(e+y)^(1+beta)) over [a, inf), a > 0."""
    u0 = math.log(E + a)
    main = u0 ** (-beta) / beta
    if u0 > 60.0:
        return main
    corr, _ = integrate.quad(
        lambda v: v ** (-1.0 - beta) * math.exp(1.0 - v) / -math.expm1(1.0 - v),
        u0,
        np.inf,
        epsabs=1e-16,
        epsrel=1e-13,
    )
    return main + corr


@lru_cache(maxsize=64)
def series_constant(beta: float, tol: float = 1e-10) -> float:
    """S(beta) = sum_{k>=1} 1/(k ln(e+k)^(1+beta)) to absolute accuracy ``tol``.

    Direct sum below ``K0`` plus an Euler-Maclaurin remainder.
    """
    k0 = 100_000
    k = np.arange(1, k0, dtype=float)
    head = math.fsum(_tail_density(k, beta))
    y = float(k0)
    ly = math.log(E + y)
    f0 = 1.0 / (y * ly ** (1.0 + beta))
    df0 = -1.0 / (y * y * ly ** (1.0 + beta)) - (1.0 + beta) / (y * (E + y) * ly ** (2.0 + beta))
    # |f'''| is bounded by about 6 f / y^3 for y this large
    bound = 6.0 * f0 / y**3 / 720.0
    if bound > tol:
        raise ParameterError(f"series remainder bound {bound:.3g} exceeds tol {tol:.3g}")
    return head + tail_integral(y, beta) + 0.5 * f0 - df0 / 12.0


def build_heavy_tail(beta: float, tol: float = 1e-10, t0: float = 0.5) -> OffspringLaw:
    """Critical law with P(nu > k) = C / (k ln(e+k)^(1+beta)) for k >= 1.

    ``C`` makes the tails for k >= 1 sum to ``1 - t0`` so that P(nu > 0) = t0
    and the mean is exactly one.
    """
    if not (beta > 0 and math.isfinite(beta)):
        raise ParameterError(f"beta must be positive, got {beta!r}")
    if not (0 < tol <= 1e-6):
        raise ParameterError(f"tol must lie in (0, 1e-6], got {tol!r}")
    if not (0 < t0 < 1):
        raise ParameterError(f"t0 must lie in (0, 1), got {t0!r}")
    s = series_constant(float(beta), float(tol))
    c = (1.0 - t0) / s
    if t0 < c / math.log(E + 1.0) ** (1.0 + beta):
        raise ParameterError("t0 below P(nu > 1); tail would not be monotone")
    return OffspringLaw(LawKind.HEAVY_TAIL, (float(beta), c, float(t0)), label=f"heavy_tail(beta={beta:g})")


def alpha_limit_law(alpha: float) -> OffspringLaw:
    if not (0.0 <= alpha <= 1.0):
        raise ParameterError(f"alpha must lie in [0, 1], got {alpha!r}")
    if alpha == 0.0:
        return zero_limit_law()
    return OffspringLaw(LawKind.ALPHA_LIMIT, (float(alpha),), label=f"nu_alpha(alpha={alpha:g})")


def zero_limit_law() -> OffspringLaw:
    return OffspringLaw(LawKind.ZERO_LIMIT, (), label="nu_0")


def sibuya_law(gamma: float) -> OffspringLaw:
    if not (0.0 < gamma <= 1.0):
        raise ParameterError(f"gamma must lie in (0, 1], got {gamma!r}")
    return OffspringLaw(LawKind.SIBUYA, (float(gamma),), label=f"sibuya(gamma={gamma:g})")


def table_law(pmf, label: str = "table") -> OffspringLaw:
    p = np.asarray(pmf, dtype=float)
    if p.ndim != 1 or p.size == 0 or np.any(p < 0):
        raise ParameterError("pmf must be a non-empty vector of non-negative numbers")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ParameterError(f"pmf sums to {p.sum()!r}, not 1")
    p = p / p.sum()
    p.setflags(write=False)
    return OffspringLaw(LawKind.TABLE, (), table=p, label=label)


def point_mass(k: int) -> OffspringLaw:
    p = np.zeros(k + 1)
    p[k] = 1.0
    return table_law(p, label=f"point_mass({k})")


def binary_law() -> OffspringLaw:
    """P(nu = 0) = P(nu = 2) = 1/2, the critical binary split."""
    return table_law([0.5, 0.0, 0.5], label="binary")


# ---------------------------------------------------------------------------
# standalone pmfs


def pmf_alpha(alpha: float, k):
    """P(nu_alpha = k) for k >= 2, evaluated in log space."""
    if not (0.0 <= alpha <= 1.0):
        raise DomainError(f"alpha must lie in [0, 1], got {alpha!r}")
    ks = np.asarray(k)
    if np.any(ks < 2):
        raise DomainError("nu_alpha is supported on k >= 2")
    kf = ks.astype(float)
    if alpha == 1.0:
        out = (ks == 2).astype(float)
    elif alpha == 0.0:
        out = 1.0 / (kf * (kf - 1.0))
    else:
        out = (1.0 + alpha) * np.exp(gammaln(kf - 1.0 - alpha) - gammaln(1.0 - alpha) - gammaln(kf + 1.0))
    return out[()] if np.ndim(out) == 0 else out


def sibuya_pmf(gamma: float, k):
    """Sibuya pmf by the recursion p_1 = gamma, p_{k+1} = p_k (k - gamma)/(k + 1)."""
    if not (0.0 < gamma <= 1.0):
        raise DomainError(f"gamma must lie in (0, 1], got {gamma!r}")
    ks = np.asarray(k)
    if np.any(ks < 1):
        raise DomainError("Sibuya is supported on k >= 1")
    kmax = int(ks.max())
    j = np.arange(1, kmax, dtype=float)
    table = np.empty(kmax)
    table[0] = gamma
    table[1:] = gamma * np.cumprod((j - gamma) / (j + 1.0))
    out = table[ks - 1]
    return out[()] if np.ndim(out) == 0 else out


def _sibuya_pmf_closed(gamma, ks):
    kf = np.asarray(ks, dtype=float)
    if gamma >= 1.0:
        return (kf == 1).astype(float)
    return gamma * np.exp(gammaln(kf - gamma) - gammaln(1.0 - gamma) - gammaln(kf + 1.0))
