"""Forward simulation of the continuous-time Markov branching process.

Each particle lives an Exp(1) time and is replaced by ``nu`` daughters.
Particles are processed depth first from an explicit stack and recorded in a
flat arena; children always get larger indices than their parent, so one
reverse sweep suffices to mark the lineages that reach the horizon.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import BudgetError, DomainError, ParameterError
from .offspring import OffspringLaw, draw_from_uniform
from .rng import DEFAULT_SEED, stream


@dataclass(frozen=True)
class SimConfig:
    horizon: float
    max_events: int = 100_000_000
    max_population: int = 10_000_000
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ParameterError(f"horizon must be positive, got {self.horizon!r}")
        if self.max_events <= 0 or self.max_population <= 0:
            raise ParameterError("caps must be positive")


@dataclass(frozen=True, eq=False)
class Genealogy:
    """Arena of particles: parent index (-1 for the root), birth and death times.

    ``alive[i]`` marks particles alive at the horizon; their ``death`` equals
    the horizon. Particles left unprocessed by a censored run have NaN death.
    """

    parent: np.ndarray
    birth: np.ndarray
    death: np.ndarray
    alive: np.ndarray

    def __len__(self) -> int:
        return self.parent.size


@dataclass(frozen=True, eq=False)
class SimOutcome:
    survived: bool
    z_t: int
    genealogy: Genealogy
    censored: bool
    events: int
    horizon: float


@dataclass(frozen=True, eq=False)
class ReducedTrajectory:
    """Right-continuous step function u -> Z(u, t) and the MRCA time."""

    times: np.ndarray  # jump times, times[0] == 0
    values: np.ndarray
    horizon: float

    @property
    def mrca_time(self) -> float:
        # tau(t) = t - sup{u : Z(u, t) = 1}
        if self.times.size == 1:
            return 0.0
        return self.horizon - float(self.times[1])

    def __call__(self, u):
        us = np.asarray(u, dtype=float)
        if np.any((us < 0) | (us > self.horizon)):
            raise DomainError(f"u must lie in [0, {self.horizon}]")
        idx = np.searchsorted(self.times, us, side="right") - 1
        out = self.values[idx]
        return int(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# kernels


@nb.njit(cache=True)
def _grow_i(a, n):
    b = np.empty(n, dtype=a.dtype)
    b[: a.shape[0]] = a
    return b


@nb.njit(cache=True)
def _grow_f(a, n):
    b = np.empty(n, dtype=a.dtype)
    b[: a.shape[0]] = a
    return b


@nb.njit(cache=True)
def _grow_b(a, n):
    b = np.zeros(n, dtype=np.bool_)
    b[: a.shape[0]] = a
    return b


@nb.njit(cache=True)
def _simulate(rng, horizon, kind, p0, p1, p2, tail, max_events, max_pop):
    cap = 64
    parent = np.empty(cap, dtype=np.int64)
    birth = np.empty(cap, dtype=np.float64)
    death = np.full(cap, np.nan)
    alive = np.zeros(cap, dtype=np.bool_)
    stack = np.empty(cap, dtype=np.int64)
    parent[0] = -1
    birth[0] = 0.0
    n = 1
    stack[0] = 0
    sp = 1
    events = 0
    z = 0
    censored = False
    while sp > 0:
        sp -= 1
        i = stack[sp]
        d = birth[i] + rng.standard_exponential()
        if d >= horizon:
            death[i] = horizon
            alive[i] = True
            z += 1
            continue
        death[i] = d
        events += 1
        if events > max_events:
            censored = True
            break
        k = draw_from_uniform(kind, p0, p1, p2, tail, 1.0 - rng.random())
        if k > max_pop - n:
            censored = True
            break
        if n + k > parent.shape[0]:
            newcap = max(2 * parent.shape[0], n + k)
            parent = _grow_i(parent, newcap)
            birth = _grow_f(birth, newcap)
            death = _grow_f(death, newcap)
            death[n:] = np.nan
            alive = _grow_b(alive, newcap)
        if sp + k > stack.shape[0]:
            stack = _grow_i(stack, max(2 * stack.shape[0], sp + k))
        for _ in range(k):
            parent[n] = i
            birth[n] = d
            stack[sp] = n
            n += 1
            sp += 1
    return parent[:n], birth[:n], death[:n], alive[:n], z, events, censored


@nb.njit(cache=True)
def _reduce(parent, death, alive):
    n = parent.shape[0]
    marked = alive.copy()
    marked_children = np.zeros(n, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        if marked[i]:
            p = parent[i]
            marked[p] = True
            marked_children[p] += 1
    count = 0
    for i in range(n):
        if marked[i] and not alive[i] and marked_children[i] >= 2:
            count += 1
    jt = np.empty(count)
    js = np.empty(count, dtype=np.int64)
    j = 0
    for i in range(n):
        if marked[i] and not alive[i] and marked_children[i] >= 2:
            jt[j] = death[i]
            js[j] = marked_children[i] - 1
            j += 1
    order = np.argsort(jt)
    times = np.empty(count + 1)
    values = np.empty(count + 1, dtype=np.int64)
    times[0] = 0.0
    values[0] = 1
    for m in range(count):
        times[m + 1] = jt[order[m]]
        values[m + 1] = values[m] + js[order[m]]
    return times, values, marked


@nb.njit(cache=True)
def _summary(rng, horizon, kind, p0, p1, p2, tail, max_events, max_pop, query_us):
    parent, birth, death, alive, z, events, censored = _simulate(
        rng, horizon, kind, p0, p1, p2, tail, max_events, max_pop
    )
    zq = np.zeros(query_us.shape[0], dtype=np.int64)
    tau = np.nan
    if z > 0 and not censored:
        times, values, _ = _reduce(parent, death, alive)
        tau = 0.0 if times.shape[0] == 1 else horizon - times[1]
        for m in range(query_us.shape[0]):
            idx = np.searchsorted(times, query_us[m], side="right") - 1
            zq[m] = values[idx]
    return z, events, censored, tau, zq


# ---------------------------------------------------------------------------
# public operations


def _check_law(law: OffspringLaw) -> None:
    if abs(law.mean - 1.0) > 1e-9:
        warnings.warn(f"offspring mean is {law.mean}, not 1: process is not critical", stacklevel=3)


def simulate(law: OffspringLaw, config: SimConfig, rng: np.random.Generator) -> SimOutcome:
    """Run one replicate up to ``config.horizon``; caps flag the outcome censored."""
    _check_law(law)
    parent, birth, death, alive, z, events, censored = _simulate(
        rng, float(config.horizon), *law.kernel_args(), int(config.max_events), int(config.max_population)
    )
    gen = Genealogy(parent, birth, death, alive)
    return SimOutcome(
        survived=bool(z > 0) and not censored,
        z_t=int(z),
        genealogy=gen,
        censored=bool(censored),
        events=int(events),
        horizon=float(config.horizon),
    )


def simulate_replicate(law: OffspringLaw, config: SimConfig, index: int) -> SimOutcome:
    """``simulate`` on the stream of replicate ``index``."""
    return simulate(law, config, stream(config.seed, index))


def reduce(genealogy: Genealogy, t: float) -> ReducedTrajectory:
    """Reduced process of the particles alive at ``t``."""
    if not genealogy.alive.any():
        raise DomainError("reduced process is undefined for an extinct genealogy")
    if np.isnan(genealogy.death).any():
        raise DomainError("genealogy is incomplete (censored run)")
    times, values, _ = _reduce(genealogy.parent, genealogy.death, genealogy.alive)
    return ReducedTrajectory(times, values, float(t))


def lineage_marks(genealogy: Genealogy) -> np.ndarray:
    """Boolean mask of particles with a descendant alive at the horizon."""
    return _reduce(genealogy.parent, genealogy.death, genealogy.alive)[2]


@dataclass(frozen=True)
class MrcaDraw:
    tau: float
    attempts: int
    index: int  # replicate index of the accepted run


def mrca_sample(
    law: OffspringLaw,
    config: SimConfig,
    rng: np.random.Generator | None = None,
    start_index: int = 0,
    budget: int = 1_000_000,
) -> MrcaDraw:
    """tau(t) conditioned on survival, by rejection.

    With ``rng`` given, attempts draw from it in turn; otherwise attempt ``j``
    uses the stream of replicate ``start_index + j``.
    """
    _check_law(law)
    args = law.kernel_args()
    empty = np.zeros(0)
    for j in range(budget):
        r = rng if rng is not None else stream(config.seed, start_index + j)
        z, _, censored, tau, _ = _summary(
            r, float(config.horizon), *args, int(config.max_events), int(config.max_population), empty
        )
        if z > 0 and not censored:
            return MrcaDraw(float(tau), j + 1, start_index + j)
    raise BudgetError(
        f"no surviving replicate in {budget} attempts at t={config.horizon}; "
        "use a smaller horizon or a larger budget",
        attempts=budget,
    )


@dataclass(frozen=True, eq=False)
class BatchResult:
    """Per-replicate summaries for a contiguous block of replicate indices."""

    indices: np.ndarray
    z: np.ndarray
    events: np.ndarray
    censored: np.ndarray
    tau: np.ndarray  # NaN unless survived and uncensored
    zq: np.ndarray  # Z(u, t) at the query times, zero unless survived

    @property
    def survived(self) -> np.ndarray:
        return (self.z > 0) & ~self.censored


def run_block(law: OffspringLaw, config: SimConfig, start: int, count: int, query_us=()) -> BatchResult:
    """Simulate replicates ``start .. start+count-1`` and summarise each."""
    args = law.kernel_args()
    qu = np.asarray(query_us, dtype=float)
    if np.any((qu < 0) | (qu > config.horizon)):
        raise DomainError("query times must lie in [0, horizon]")
    z = np.empty(count, dtype=np.int64)
    ev = np.empty(count, dtype=np.int64)
    cens = np.empty(count, dtype=bool)
    tau = np.empty(count)
    zq = np.empty((count, qu.size), dtype=np.int64)
    h = float(config.horizon)
    me, mp = int(config.max_events), int(config.max_population)
    for j in range(count):
        z[j], ev[j], cens[j], tau[j], zq[j] = _summary(stream(config.seed, start + j), h, *args, me, mp, qu)
    return BatchResult(np.arange(start, start + count), z, ev, cens, tau, zq)
