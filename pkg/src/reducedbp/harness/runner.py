"""Replicate-parallel execution with an index-ordered, worker-independent fold.

Replicate ``i`` always draws from ``stream(seed, i)``.  Blocks of consecutive
indices are farmed out to worker processes and folded strictly in index
order, so the accepted set (the first ``target`` survivors) does not depend
on the number of workers.
"""

from __future__ import annotations

import multiprocessing as mp
from collections import deque
from concurrent.futures import Executor, Future, ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from ..limit_process import LimitConfig, TreeBlock, tree_block
from ..offspring import OffspringLaw
from ..simulator import BatchResult, SimConfig, run_block

DEFAULT_BLOCK = 4096


class _Inline(Executor):
    """Runs submitted work immediately; stands in for a pool when workers == 1."""

    def submit(self, fn, *args, **kwargs):
        fut = Future()
        fut.set_result(fn(*args, **kwargs))
        return fut


@contextmanager
def executor(workers: int):
    if workers <= 1:
        yield _Inline()
        return
    try:
        ctx = mp.get_context("fork")
    except ValueError:
        ctx = None
    pool = ProcessPoolExecutor(max_workers=workers, mp_context=ctx)
    try:
        yield pool
    finally:
        pool.shutdown(wait=True, cancel_futures=True)


@contextmanager
def _borrow(pool):
    yield pool


@dataclass(frozen=True, eq=False)
class SurvivorSample:
    """First ``target`` surviving, uncensored replicates in index order."""

    indices: np.ndarray
    z: np.ndarray
    tau: np.ndarray
    zq: np.ndarray
    attempts: int  # replicates examined, up to and including the last accepted one
    censored: int  # censored replicates among the attempts
    events_mean: float  # mean events per replicate among the attempts
    exhausted: bool  # budget ran out before ``target`` survivors

    @property
    def accepted(self) -> int:
        return int(self.indices.size)


def collect_survivors(
    law: OffspringLaw,
    config: SimConfig,
    target: int,
    budget: int,
    query_us=(),
    workers: int = 1,
    block: int = DEFAULT_BLOCK,
    pool: Executor | None = None,
) -> SurvivorSample:
    if target <= 0:
        raise ValueError("target must be positive")
    qu = np.asarray(query_us, dtype=float)
    parts: list[BatchResult] = []
    found = 0
    cutoff = None

    def starts():
        s = 0
        while s < budget:
            yield s, min(block, budget - s)
            s += block

    with (executor(workers) if pool is None else _borrow(pool)) as ex:
        gen = starts()
        pending: deque = deque()
        ahead = max(2 * workers, 1)
        for s, n in gen:
            pending.append(ex.submit(run_block, law, config, s, n, qu))
            if len(pending) >= ahead:
                break
        while pending:
            res: BatchResult = pending.popleft().result()
            surv = np.flatnonzero(res.survived)
            if found + surv.size >= target:
                last = surv[target - found - 1]
                cutoff = int(res.indices[last]) + 1
                parts.append(res)
                found = target
                for f in pending:
                    f.cancel()
                break
            found += surv.size
            parts.append(res)
            nxt = next(gen, None)
            if nxt is not None:
                pending.append(ex.submit(run_block, law, config, nxt[0], nxt[1], qu))

    attempts = cutoff if cutoff is not None else sum(p.indices.size for p in parts)
    idx = np.concatenate([p.indices for p in parts]) if parts else np.zeros(0, dtype=np.int64)
    keep = idx < attempts

    def cat(name, empty):
        if not parts:
            return empty
        return np.concatenate([getattr(p, name) for p in parts])[keep]

    z = cat("z", np.zeros(0, dtype=np.int64))
    censored = cat("censored", np.zeros(0, dtype=bool))
    events = cat("events", np.zeros(0, dtype=np.int64))
    tau = cat("tau", np.zeros(0))
    zq = np.concatenate([p.zq for p in parts])[keep] if parts else np.zeros((0, qu.size), dtype=np.int64)
    idx = idx[keep]
    surv = (z > 0) & ~censored
    return SurvivorSample(
        indices=idx[surv],
        z=z[surv],
        tau=tau[surv],
        zq=zq[surv],
        attempts=int(attempts),
        censored=int(censored.sum()),
        events_mean=float(events.mean()) if events.size else float("nan"),
        exhausted=cutoff is None,
    )


def collect_trees(
    config: LimitConfig,
    seed: int,
    count: int,
    xs,
    workers: int = 1,
    block: int = DEFAULT_BLOCK,
    pool: Executor | None = None,
) -> TreeBlock:
    """Trees ``0 .. count-1`` evaluated at ``xs``, computed block-parallel."""
    x = np.asarray(xs, dtype=float)
    with (executor(workers) if pool is None else _borrow(pool)) as ex:
        futs = [ex.submit(tree_block, config, seed, s, min(block, count - s), x) for s in range(0, count, block)]
        parts = [f.result() for f in futs]
    return TreeBlock(
        values=np.concatenate([p.values for p in parts]),
        truncated=np.concatenate([p.truncated for p in parts]),
        exact_below=np.concatenate([p.exact_below for p in parts]),
        nodes=np.concatenate([p.nodes for p in parts]),
    )
