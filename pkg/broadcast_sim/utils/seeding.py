"""
Per-trial seed derivation.

Trial i of a run seeded with `master_seed` always gets the same integer seed,
whatever the worker count or scheduling order.
"""

import numpy as np

from .errors import InvalidParameterError

SEED_ALGORITHM = "numpy-SeedSequence-spawn-v1"


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """First 64-bit word of SeedSequence(master_seed, spawn_key=(trial_index,))."""
    if master_seed < 0 or trial_index < 0:
        raise InvalidParameterError("master_seed and trial_index must be non-negative")
    sequence = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial_index),))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
