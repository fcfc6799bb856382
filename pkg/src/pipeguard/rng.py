"""Seed derivation for the deterministic sampler.

The sampler uses xoshiro256** (Blackman & Vigna) whose state is produced
here with splitmix64, the seeding generator recommended by its authors.
Per-document inference streams are derived by mixing the base seed with an
FNV-1a hash of the document id, so every document gets an independent,
reproducible stream.  Everything is plain integer arithmetic mod 2^64.
"""
from __future__ import annotations

import numpy as np

__all__ = ["splitmix64", "seed_state", "fnv1a64", "derive_doc_seed"]

_MASK64 = (1 << 64) - 1

_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_SPLITMIX_MULT1 = 0xBF58476D1CE4E5B9
_SPLITMIX_MULT2 = 0x94D049BB133111EB

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 stream once; returns (next_state, output)."""
    state = (state + _SPLITMIX_GAMMA) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * _SPLITMIX_MULT1) & _MASK64
    z = ((z ^ (z >> 27)) * _SPLITMIX_MULT2) & _MASK64
    z = z ^ (z >> 31)
    return state, z


def seed_state(seed: int) -> np.ndarray:
    """Expand a 64-bit seed into a xoshiro256** state vector (uint64[4])."""
    state = seed & _MASK64
    words = []
    for _ in range(4):
        state, out = splitmix64(state)
        words.append(out)
    return np.array(words, dtype=np.uint64)


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def derive_doc_seed(seed: int, doc_id: str) -> int:
    """Mix a base seed with a document id into an independent stream seed."""
    _, mixed = splitmix64((seed ^ fnv1a64(doc_id.encode("utf-8"))) & _MASK64)
    return mixed
