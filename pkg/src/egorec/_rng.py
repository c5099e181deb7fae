"""Seed derivation.

Every random draw in the package comes from a stream keyed by the master seed
plus a tuple of integers/labels (command, user, split, replicate). Streams are
independent of evaluation order, so serial and parallel runs agree.
"""
from __future__ import annotations

import random
import zlib

import numpy as np


def _key(part: int | str) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    part = int(part)
    if part < 0:
        raise ValueError(f"seed components must be non-negative, got {part}")
    return part


def seed_sequence(seed: int, *keys: int | str) -> np.random.SeedSequence:
    return np.random.SeedSequence([_key(seed), *(_key(k) for k in keys)])


def rng(seed: int, *keys: int | str) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(seed, *keys))


def py_rng(seed: int, *keys: int | str) -> random.Random:
    """Stdlib generator for tight scalar loops (much cheaper per draw)."""
    state = seed_sequence(seed, *keys).generate_state(2, dtype=np.uint64)
    return random.Random(int(state[0]) << 64 | int(state[1]))


def sub_seed(seed: int, *keys: int | str) -> int:
    return int(seed_sequence(seed, *keys).generate_state(1, dtype=np.uint32)[0])
