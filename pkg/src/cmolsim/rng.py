"""Named, independently replayable random streams derived from one seed."""

from __future__ import annotations

import zlib

import numpy as np

STREAMS = ("device", "mismatch", "stdp", "shapes", "init")


def substream(seed: int, name: str, *extra: int) -> np.random.Generator:
    """Return a generator keyed by ``(seed, name, *extra)``.

    The same key always yields the same sequence, and streams with different
    names never share state, so e.g. reseeding the mismatch draw leaves the
    device-programming draws untouched.
    """
    key = (zlib.crc32(name.encode("utf-8")),) + tuple(int(e) for e in extra)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))


def as_generator(random_state=None) -> np.random.Generator:
    """Coerce an int / Generator / None into a ``numpy.random.Generator``."""
    if isinstance(random_state, np.random.Generator):
        return random_state
    return np.random.default_rng(random_state)
