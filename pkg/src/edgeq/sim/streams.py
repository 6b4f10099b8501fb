"""Named, reproducible random streams.

Each logical randomness consumer (one arrival source, one station's service
sequence, the estimator noise) gets its own counter-based generator derived
from the run seed and the stream name, so draws are independent of event
interleaving and of the order in which streams are first used.
"""

from __future__ import annotations

import hashlib

import numpy as np


class StreamFactory:
    def __init__(self, seed: int):
        self._seed = int(seed)
        self._streams: dict[str, np.random.Generator] = {}

    def stream(self, name: str) -> np.random.Generator:
        """Generator for the named stream (created on first use, then cached)."""
        gen = self._streams.get(name)
        if gen is None:
            digest = hashlib.sha256(name.encode("utf-8")).digest()
            key = int.from_bytes(digest[:16], "little")
            seq = np.random.SeedSequence((self._seed, key))
            gen = np.random.Generator(np.random.Philox(seq))
            self._streams[name] = gen
        return gen
