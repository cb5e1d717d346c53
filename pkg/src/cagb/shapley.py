"""Shapley-value division of a coalition's cost.

Exact mode averages marginal contributions over all join orderings, computed
through the equivalent subset-weighted sum (s!(n-s-1)!/n! per subset) so the
value oracle is hit 2^n times instead of n! times.  Monte Carlo mode averages
seeded random orderings and is efficient by telescoping per sample.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations
from math import factorial
from typing import Callable

EXACT_LIMIT = 10


@dataclass(frozen=True)
class TUGame:
    """Transferable-utility game; value(frozenset()) must be 0."""
    members: tuple[int, ...]
    value: Callable[[frozenset], float]


def _memoized(value: Callable[[frozenset], float]):
    cache: dict[frozenset, float] = {frozenset(): 0.0}

    def get(subset: frozenset) -> float:
        v = cache.get(subset)
        if v is None:
            v = value(subset)
            cache[subset] = v
        return v

    return get


def shapley_exact(game: TUGame) -> dict[int, float]:
    """Exact Shapley allocation; limited to 10 members."""
    n = len(game.members)
    if n == 0:
        return {}
    if n > EXACT_LIMIT:
        raise ValueError(
            f"{n} members exceeds the exact limit of {EXACT_LIMIT}; "
            "use shapley_montecarlo")
    value = _memoized(game.value)
    weight = [factorial(s) * factorial(n - s - 1) / factorial(n) for s in range(n)]
    shares: dict[int, float] = {}
    for i in game.members:
        others = [m for m in game.members if m != i]
        phi = 0.0
        for size in range(n):
            for subset in combinations(others, size):
                s = frozenset(subset)
                phi += weight[size] * (value(s | {i}) - value(s))
        shares[i] = phi
    return shares


def shapley_montecarlo(game: TUGame, samples: int, seed: int = 0) -> dict[int, float]:
    """Average marginal contributions over seeded uniform random orderings."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    value = _memoized(game.value)
    rng = random.Random(seed)
    order = list(game.members)
    acc = {i: 0.0 for i in game.members}
    for _ in range(samples):
        rng.shuffle(order)
        prev = 0.0
        running: set[int] = set()
        for member in order:
            running.add(member)
            v = value(frozenset(running))
            acc[member] += v - prev
            prev = v
    return {i: acc[i] / samples for i in game.members}
