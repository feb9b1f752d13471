"""Counter-based random streams, one per (master seed, replicate index).

Every replicate owns an independent Philox stream keyed by the pair
``(seed, index)``, so results never depend on how replicates are split
across workers.
"""

from __future__ import annotations

import numpy as np

DEFAULT_SEED = 20_240_601
_MASK64 = (1 << 64) - 1


def stream(seed: int, index: int) -> np.random.Generator:
    """Return the random stream for replicate ``index`` under ``seed``."""
    seed, index = int(seed), int(index)
    if index < 0:
        raise ValueError(f"replicate index must be non-negative, got {index}")
    key = np.array([seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def substream_seed(seed: int, label: str) -> int:
    """Derive a child master seed for a named sub-experiment."""
    # FNV-1a over the label, folded with the parent seed
    h = 0xCBF29CE484222325
    for byte in label.encode():
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return (h ^ (seed & _MASK64)) & _MASK64
