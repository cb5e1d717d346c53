"""Per-cell seed derivation: splitmix64 mixing of the root seed with cell
coordinates, so parallel sweeps are reproducible regardless of execution
order."""

from __future__ import annotations

import hashlib

_MASK = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return (z ^ (z >> 31)) & _MASK


def _as_int(part: int | str) -> int:
    if isinstance(part, int):
        return part & _MASK
    digest = hashlib.sha256(part.encode()).digest()
    return int.from_bytes(digest[:8], "big")


def derive_seed(root: int, *parts: int | str) -> int:
    """Mix cell coordinates (ints or labels) into a root seed."""
    state = _splitmix64(root & _MASK)
    for part in parts:
        state = _splitmix64(state ^ _as_int(part))
    return state
