"""Seed lineage.

Every random quantity is drawn from a child stream keyed by
``(master_seed, *key, purpose)``; streams never depend on the order in which
replications are scheduled.
"""
from __future__ import annotations

import numpy as np

DATA = 0
WEIGHTS = 1
AUX = 2


def child_stream(master_seed: int, *key: int) -> np.random.Generator:
    """Philox generator for the spawn key ``key`` under ``master_seed``."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def fresh_seed() -> int:
    """A 63-bit seed from system entropy."""
    return int(np.random.SeedSequence().generate_state(2, np.uint64)[0] >> np.uint64(1))
