"""Seeded random streams.

Every stochastic routine takes an explicit ``numpy.random.Generator``. Streams
are PCG64 (64-bit state) generators; independent child streams are derived
through ``SeedSequence`` keys so that adding a consumer never shifts the
numbers another consumer sees.
"""

import numpy as np

# Fixed stream keys, so a planner's randomness does not depend on which
# other planners share the trial.
STREAM_KEYS = {
    "start": 0,
    "nmpse": 1,
    "gss": 2,
    "fixed": 3,
    "random": 4,
    "sensor": 100,
}


def make_rng(seed, *keys) -> np.random.Generator:
    """Generator seeded from ``seed`` and an optional spawn path of int keys."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, keys)])))


def derive_seed(seed, *keys) -> int:
    """Deterministic 63-bit child seed."""
    state = np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(1, np.uint64)[0]
    return int(state) >> 1


def planner_streams(trial_seed: int, planner: str) -> tuple[np.random.Generator, np.random.Generator]:
    """(planning stream, sensor-noise stream) for one planner in one trial."""
    key = STREAM_KEYS[planner]
    return make_rng(trial_seed, key), make_rng(trial_seed, key, STREAM_KEYS["sensor"])
