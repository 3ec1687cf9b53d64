"""Seeded random streams.

Every stream is a Philox counter-based generator keyed by
``(seed, purpose, index)``, so a stream never depends on how many other
streams were drawn before it. That is what makes chunked or parallel oracle
builds reproduce the serial build bit-for-bit.
"""

from __future__ import annotations

import secrets

import numpy as np

ORACLE = 0
SAMPLE = 1
VERIFY = 2
RETRY = 3


def stream(seed: int, purpose: int, index: int = 0) -> np.random.Generator:
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence([int(seed), int(purpose), int(index)])
    return np.random.Generator(np.random.Philox(ss))


def fresh_seed() -> int:
    """Draw a seed from OS entropy (63 bits, so it fits signed 64-bit storage)."""
    return secrets.randbits(63)
