"""Deterministic random-stream derivation.

Every realization owns two independent streams derived from the master seed:

* the environment stream (``ENV``) drives the initial world state and all
  per-slot channel/mobility draws,
* the policy stream (``POLICY``) drives arm selection, tie-breaking and
  posterior sampling.

Derivation is ``SeedSequence(entropy=master_seed, spawn_key=(purpose,
realization))``, i.e. numpy's published SeedSequence hash. The policy stream
is the same for every policy label, so adding or removing policies from an
experiment never perturbs anyone else's draws, and two engines that make the
same decisions from the same stream produce bit-identical traces.
"""

from __future__ import annotations

import numpy as np

ENV = 0
POLICY = 1


def seed_sequence(master_seed: int, purpose: int, realization: int) -> np.random.SeedSequence:
    if realization < 0:
        raise ValueError("realization index must be nonnegative")
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(purpose, realization))


def stream(master_seed: int, purpose: int, realization: int) -> np.random.Generator:
    """A PCG64 generator for one (master seed, purpose, realization) triple."""
    return np.random.Generator(np.random.PCG64(seed_sequence(master_seed, purpose, realization)))
