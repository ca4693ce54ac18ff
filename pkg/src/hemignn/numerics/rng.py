"""Seedable random streams with a fixed, documented algorithm.

All randomness in the package flows through PCG64 generators derived from
one root seed. A purpose name (e.g. "dropout/finetune/3") is hashed with
crc32 and mixed into the seed sequence, so every consumer gets an
independent stream and two runs with the same root seed replay bit-identical
draws on any platform.
"""

from __future__ import annotations

import zlib

import numpy as np


def named_stream(root_seed: int, name: str) -> np.random.Generator:
    """Return the PCG64 generator for `name` under `root_seed`."""
    tag = zlib.crc32(name.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([root_seed, tag])))


class SeedFanout:
    """Fans one root seed out to named per-purpose streams."""

    def __init__(self, root_seed: int):
        self.root_seed = int(root_seed)

    def stream(self, name: str) -> np.random.Generator:
        return named_stream(self.root_seed, name)
