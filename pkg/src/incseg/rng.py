"""Named random streams on a counter-based generator.

Every consumer of randomness (initialization, dropout masks, batch order,
corpus synthesis) asks the hub for a stream by name. Streams derived from
the same seed and name always produce the same draw sequence, independent
of what other streams exist, so runs are reproducible end to end.
"""

import hashlib

import numpy as np


def _spawn_key(name: str) -> tuple[int, ...]:
    # Stable across processes and platforms, unlike hash().
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return tuple(int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4))


class RngHub:
    """Factory and cache of named Philox streams for one base seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._streams: dict[str, np.random.Generator] = {}

    def stream(self, name: str) -> np.random.Generator:
        """Return the persistent generator for ``name``, creating it on first use."""
        gen = self._streams.get(name)
        if gen is None:
            seq = np.random.SeedSequence(entropy=self.seed, spawn_key=_spawn_key(name))
            gen = np.random.Generator(np.random.Philox(seq))
            self._streams[name] = gen
        return gen

    def split(self, name: str) -> "RngHub":
        """Derive an independent hub, e.g. one per worker or per corpus shard."""
        sub_seed = self.stream(f"split/{name}").integers(0, 2**63 - 1)
        return RngHub(int(sub_seed))
