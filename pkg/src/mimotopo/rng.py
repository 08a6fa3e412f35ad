"""Keyed counter-based random streams.

Every Monte Carlo realization draws from its own Philox stream keyed by
``(master_seed, purpose)`` with the realization index in the counter, so any
realization can be regenerated in isolation and the result of a campaign does
not depend on evaluation order or on how realizations are split across workers.
"""

import numpy as np

PLACEMENT = 1
SHADOWING = 2
SMALL_SCALE = 3
SUBSAMPLE = 4

_U64 = 2**64


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed < _U64:
        raise ValueError(f"seed must lie in [0, 2**64), got {seed}")
    return seed


def realization_stream(master_seed: int, realization: int, purpose: int) -> np.random.Generator:
    """Independent generator for one (seed, realization, purpose) triple."""
    key = [check_seed(master_seed), purpose]
    # realization index occupies counter word 2; words 0-1 leave 2**128 blocks per stream
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, int(realization), 0]))


def derive_seed(master_seed: int, *labels: int) -> int:
    """Child seed for a sub-campaign, e.g. one (M, L) point of a sweep."""
    seq = np.random.SeedSequence(check_seed(master_seed), spawn_key=tuple(int(v) for v in labels))
    return int(seq.generate_state(1, np.uint64)[0])
