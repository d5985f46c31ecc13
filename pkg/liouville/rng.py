"""Counter-based random substreams.

Every random draw in the package comes from a Philox generator keyed by
(seed, replicate, purpose), so replicates are independent and a given
replicate's field or path is the same whichever command asks for it.
"""

from enum import IntEnum
from typing import Dict

import numpy as np


GENERATOR_FAMILY = "numpy.random.Philox (4x64, SeedSequence spawn_key=(replicate, purpose))"


class Purpose(IntEnum):
    """Stream identifiers for the three independent sources of randomness."""
    FIELD = 0
    PATH = 1
    AUX = 2


def substream(seed: int, replicate: int, purpose: Purpose) -> np.random.Generator:
    """Return the generator for one (seed, replicate, purpose) triple.

    Args:
        seed: Root seed (non-negative 64-bit integer)
        replicate: Replicate index
        purpose: Which quantity the stream feeds

    Returns:
        A fresh numpy Generator; calling twice gives identical draws
    """
    if seed < 0 or replicate < 0:
        raise ValueError(f"seed and replicate must be non-negative, got {seed}, {replicate}")
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(replicate), int(purpose)))
    return np.random.Generator(np.random.Philox(sequence))


def describe() -> Dict[str, str]:
    """Generator description recorded in run manifests."""
    return {
        "family": GENERATOR_FAMILY,
        "purposes": ", ".join(f"{p.name.lower()}={p.value}" for p in Purpose),
        "numpy": np.__version__,
    }
