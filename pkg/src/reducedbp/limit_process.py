"""Samplers for the limit genealogies on the unit interval.

Zero mode (parameter beta) is Z_0 run on the clock -beta/(1+beta) log(1-x);
alpha mode is Z_alpha on the clock -log(1-x).  A particle born at position
``p`` splits at ``p + (1 - tau)(1 - p)`` with tau drawn from ``sample_tau``.

Trees store only split events.  Daughters that never split before the
resolution edge ``1 - eps`` are implicit leaves, so the number of branches at
``x`` is ``1 + sum (children - 1)`` over splits at positions ``<= x``.
Splits are expanded in position order; when the node cap is hit the tree is
exact below ``exact_below`` and a lower bound beyond it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numba as nb
import numpy as np

from .errors import DomainError, ParameterError, SamplingError
from .offspring import DRAW_CAP, KIND_ALPHA, KIND_SIBUYA, KIND_TABLE, KIND_ZERO, draw_from_uniform
from .rng import stream

_NO_TAIL = np.zeros(1)


@dataclass(frozen=True)
class LimitConfig:
    """``mode`` is 'zero' (uses ``beta``) or 'alpha' (uses ``alpha``)."""

    mode: str
    beta: float | None = None
    alpha: float | None = None
    resolution: float = 1e-3
    node_cap: int = 1_000_000

    def __post_init__(self):
        if self.mode == "zero":
            if self.beta is None or not self.beta > 0:
                raise ParameterError(f"zero mode needs beta > 0, got {self.beta!r}")
        elif self.mode == "alpha":
            if self.alpha is None or not 0 < self.alpha <= 1:
                raise ParameterError(f"alpha mode needs alpha in (0, 1], got {self.alpha!r}")
        else:
            raise ParameterError(f"mode must be 'zero' or 'alpha', got {self.mode!r}")
        if not 0 < self.resolution < 0.5:
            raise ParameterError(f"resolution must lie in (0, 0.5), got {self.resolution!r}")
        if self.node_cap <= 0:
            raise ParameterError("node_cap must be positive")

    @property
    def exponent(self) -> float:
        """CDF exponent of tau: beta/(1+beta) in zero mode, 1 in alpha mode."""
        return self.beta / (1.0 + self.beta) if self.mode == "zero" else 1.0

    def kernel_args(self):
        zero = self.mode == "zero"
        return zero, self.exponent, 0.0 if zero else float(self.alpha)


@dataclass(frozen=True, eq=False)
class LimitTree:
    positions: np.ndarray  # split positions, nondecreasing
    parents: np.ndarray  # index of the parent split, -1 for the root
    counts: np.ndarray  # number of daughters at each split
    resolution: float
    truncated: bool
    exact_below: float

    def __len__(self) -> int:
        return self.positions.size


# ---------------------------------------------------------------------------
# kernels


@nb.njit(cache=True)
def _tau(rng, zero, expo):
    u = 1.0 - rng.random()
    return u ** (1.0 / expo) if zero else u


@nb.njit(cache=True)
def _tau_above(rng, zero, expo, a):
    # tau conditioned on tau > a
    u = rng.random()
    if zero:
        fa = a**expo
        return (fa + u * (1.0 - fa)) ** (1.0 / expo)
    return a + u * (1.0 - a)


@nb.njit(cache=True)
def _push(hpos, hpar, size, pos, par):
    i = size
    while i > 0:
        up = (i - 1) // 2
        if hpos[up] <= pos:
            break
        hpos[i] = hpos[up]
        hpar[i] = hpar[up]
        i = up
    hpos[i] = pos
    hpar[i] = par


@nb.njit(cache=True)
def _pop(hpos, hpar, size):
    # removes the root of a heap of ``size`` items; caller decrements size
    last_p = hpos[size - 1]
    last_q = hpar[size - 1]
    n = size - 1
    i = 0
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n and hpos[c + 1] < hpos[c]:
            c += 1
        if hpos[c] >= last_p:
            break
        hpos[i] = hpos[c]
        hpar[i] = hpar[c]
        i = c
    if n > 0:
        hpos[i] = last_p
        hpar[i] = last_q


@nb.njit(cache=True)
def _build(rng, zero, expo, alpha, edge, node_cap):
    # splits at positions >= edge are not expanded
    cap = 64
    pos = np.empty(cap)
    par = np.empty(cap, dtype=np.int64)
    cnt = np.empty(cap, dtype=np.int64)
    hpos = np.empty(cap)
    hpar = np.empty(cap, dtype=np.int64)
    hsize = 0
    n = 0
    truncated = False
    exact_below = edge
    p0 = 1.0 - _tau(rng, zero, expo)
    if p0 < edge:
        _push(hpos, hpar, hsize, p0, -1)
        hsize = 1
    while hsize > 0:
        if n >= node_cap:
            truncated = True
            exact_below = hpos[0]
            break
        p = hpos[0]
        q = hpar[0]
        _pop(hpos, hpar, hsize)
        hsize -= 1
        u = 1.0 - rng.random()
        if zero:
            k = draw_from_uniform(KIND_ZERO, 0.0, 0.0, 0.0, _NO_TAIL, u)
        else:
            k = draw_from_uniform(KIND_ALPHA, alpha, 0.0, 0.0, _NO_TAIL, u)
        if n >= pos.shape[0]:
            m = 2 * pos.shape[0]
            pos2 = np.empty(m)
            pos2[:n] = pos[:n]
            pos = pos2
            par2 = np.empty(m, dtype=np.int64)
            par2[:n] = par[:n]
            par = par2
            cnt2 = np.empty(m, dtype=np.int64)
            cnt2[:n] = cnt[:n]
            cnt = cnt2
        pos[n] = p
        par[n] = q
        cnt[n] = k
        me = n
        n += 1
        sigma = 1.0 - p
        a = (1.0 - edge) / sigma
        if a >= 1.0:
            continue
        prob = 1.0 - a**expo
        nsplit = rng.binomial(k, prob)
        if nsplit == 0:
            continue
        if n + hsize + nsplit > node_cap:
            truncated = True
            exact_below = p
            break
        if hsize + nsplit > hpos.shape[0]:
            m = max(2 * hpos.shape[0], hsize + nsplit)
            h2 = np.empty(m)
            h2[:hsize] = hpos[:hsize]
            hpos = h2
            g2 = np.empty(m, dtype=np.int64)
            g2[:hsize] = hpar[:hsize]
            hpar = g2
        for _ in range(nsplit):
            tau = _tau_above(rng, zero, expo, a)
            _push(hpos, hpar, hsize, p + (1.0 - tau) * sigma, me)
            hsize += 1
    return pos[:n], par[:n], cnt[:n], truncated, exact_below


@nb.njit(cache=True)
def _branches(pos, cnt, xs):
    out = np.empty(xs.shape[0], dtype=np.int64)
    acc = 1.0
    total = 1
    j = 0
    for m in range(xs.shape[0]):
        while j < pos.shape[0] and pos[j] <= xs[m]:
            acc += cnt[j] - 1.0
            total += cnt[j] - 1
            j += 1
        out[m] = DRAW_CAP if acc >= DRAW_CAP else total
    return out


@nb.njit(cache=True)
def _tree_values(rng, zero, expo, alpha, edge, node_cap, xs):
    pos, par, cnt, truncated, exact_below = _build(rng, zero, expo, alpha, edge, node_cap)
    return _branches(pos, cnt, xs), truncated, exact_below, pos.shape[0]


# ---------------------------------------------------------------------------
# public operations


def sample_tau(config: LimitConfig, rng: np.random.Generator, size=None):
    """Relative MRCA time: U^((1+beta)/beta) in zero mode, U in alpha mode."""
    u = 1.0 - rng.random(size)
    if config.mode == "zero":
        return u ** (1.0 / config.exponent)
    return u


def tau_from_uniform(config: LimitConfig, u):
    """Inverse CDF of tau; the deterministic core of ``sample_tau``."""
    u = np.asarray(u, dtype=float)
    return u ** (1.0 / config.exponent) if config.mode == "zero" else u


def sample_limit_tree(config: LimitConfig, rng: np.random.Generator) -> LimitTree:
    edge = 1.0 - config.resolution
    pos, par, cnt, truncated, exact_below = _build(rng, *config.kernel_args(), edge, int(config.node_cap))
    return LimitTree(pos, par, cnt, config.resolution, bool(truncated), float(exact_below))


def trajectory_at(tree: LimitTree, xs) -> np.ndarray:
    """R(x): number of branches crossing each (sorted) position ``x``.

    Values at ``x >= tree.exact_below`` are lower bounds when the tree is
    truncated.
    """
    x = np.atleast_1d(np.asarray(xs, dtype=float))
    if np.any(np.diff(x) < 0):
        raise DomainError("positions must be sorted")
    if np.any((x < 0) | (x >= 1.0 - tree.resolution)):
        raise DomainError(f"positions must lie in [0, {1.0 - tree.resolution})")
    return _branches(tree.positions, tree.counts, x)


@dataclass(frozen=True, eq=False)
class TreeBlock:
    values: np.ndarray  # (trees, len(xs)) branch counts
    truncated: np.ndarray
    exact_below: np.ndarray
    nodes: np.ndarray

    def exact(self, xs) -> np.ndarray:
        """Mask of entries that are exact rather than lower bounds."""
        return np.asarray(xs, dtype=float)[None, :] < self.exact_below[:, None]


def tree_block(config: LimitConfig, seed: int, start: int, count: int, xs) -> TreeBlock:
    """Build trees ``start .. start+count-1`` and evaluate R at ``xs``.

    Trees are only expanded up to ``max(xs)``; the values have the same law
    as ``trajectory_at`` on a full tree, though not the same realisation.
    """
    x = np.atleast_1d(np.asarray(xs, dtype=float))
    if np.any(np.diff(x) < 0) or np.any((x < 0) | (x >= 1.0 - config.resolution)):
        raise DomainError(f"positions must be sorted and lie in [0, {1.0 - config.resolution})")
    vals = np.empty((count, x.size), dtype=np.int64)
    trunc = np.empty(count, dtype=bool)
    below = np.empty(count)
    nodes = np.empty(count, dtype=np.int64)
    edge = min(float(np.nextafter(x.max(), 1.0)), 1.0 - config.resolution) if x.size else 0.0
    args = config.kernel_args() + (edge, int(config.node_cap))
    for j in range(count):
        vals[j], trunc[j], below[j], nodes[j] = _tree_values(stream(seed, start + j), *args, x)
    return TreeBlock(vals, trunc, below, nodes)


# ---------------------------------------------------------------------------
# direct marginals


_MARGINAL_KMAX = 1 << 14


@nb.njit(cache=True)
def _alpha_marginal_tail(alpha, p, kmax):
    # P(Z > n) are the coefficients of (1 - (1-p) G(s))^(-1/alpha), G the
    # Sibuya(alpha) pgf; every term of this recurrence is non-negative
    g = np.zeros(kmax + 1)
    g[1] = alpha
    for k in range(1, kmax):
        g[k + 1] = g[k] * (k - alpha) / (k + 1.0)
    b = np.empty(kmax + 1)
    b[0] = 1.0
    c = 1.0 / alpha - 1.0
    for n in range(1, kmax + 1):
        acc = 0.0
        for k in range(1, n + 1):
            acc += (n + c * k) * g[k] * b[n - k]
        b[n] = (1.0 - p) * acc / n
    return b


@lru_cache(maxsize=32)
def alpha_marginal_tail(alpha: float, x: float, kmax: int = _MARGINAL_KMAX) -> np.ndarray:
    """P(Z_alpha(-log(1-x)) > k) for k = 0..kmax."""
    tail = _alpha_marginal_tail(float(alpha), 1.0 - float(x), int(kmax))
    tail.setflags(write=False)
    return tail


def sample_marginal(config: LimitConfig, x: float, rng: np.random.Generator, size=None):
    """Draw R(x) directly from its closed-form law."""
    if not 0.0 <= x < 1.0:
        raise DomainError(f"x must lie in [0, 1), got {x!r}")
    n = 1 if size is None else int(np.prod(size))
    u = 1.0 - rng.random(n)
    out = marginal_from_uniform(config, x, u)
    return int(out[0]) if size is None else out.reshape(size)


def marginal_from_uniform(config: LimitConfig, x: float, u) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if x == 0.0:
        return np.ones(u.size, dtype=np.int64)
    if config.mode == "zero":
        gamma = (1.0 - x) ** config.exponent
        return _draw_vec(KIND_SIBUYA, gamma, _NO_TAIL, u)
    alpha = config.alpha
    if alpha == 1.0:
        # shifted geometric with success probability 1 - x
        k = np.ceil(np.log(u) / math.log(x)).astype(np.int64)
        k = np.maximum(k, 1)
        return k
    tail = alpha_marginal_tail(alpha, x)
    if np.any(u <= tail[-1]):
        raise SamplingError(f"alpha marginal exceeded the series cap {tail.size - 1}; resample")
    return _draw_vec(KIND_TABLE, 0.0, tail, u)


@nb.njit(cache=True)
def _draw_vec(kind, a, tail, us):
    out = np.empty(us.shape[0], dtype=np.int64)
    for i in range(us.shape[0]):
        out[i] = draw_from_uniform(kind, a, 0.0, 0.0, tail, us[i])
    return out
