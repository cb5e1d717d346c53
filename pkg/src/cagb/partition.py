"""Partitions of a player set into disjoint, nonempty coalitions.

A coalition is a frozenset of player ids.  Partitions are kept in canonical
form (members sorted inside a coalition, coalitions ordered by least member)
so that equal partitions compare and hash equal.
"""

from __future__ import annotations

import hashlib
from typing import Iterable, Iterator

Coalition = frozenset


class Partition:
    __slots__ = ("_blocks", "_owner", "_key")

    def __init__(self, blocks: Iterable[Iterable[int]]):
        frozen = sorted((frozenset(b) for b in blocks), key=lambda b: min(b) if b else -1)
        owner: dict[int, frozenset] = {}
        for block in frozen:
            if not block:
                raise ValueError("empty coalition in partition")
            for player in block:
                if player in owner:
                    raise ValueError(f"player {player} appears in two coalitions")
                owner[player] = block
        self._blocks = tuple(frozen)
        self._owner = owner
        self._key = tuple(tuple(sorted(b)) for b in self._blocks)

    @classmethod
    def singletons(cls, n_players: int) -> "Partition":
        return cls([{i} for i in range(n_players)])

    @property
    def coalitions(self) -> tuple[frozenset, ...]:
        return self._blocks

    @property
    def players(self) -> frozenset:
        return frozenset(self._owner)

    def coalition_of(self, player: int) -> frozenset:
        return self._owner[player]

    def key(self) -> tuple[tuple[int, ...], ...]:
        return self._key

    def canonical_str(self) -> str:
        return "|".join(",".join(str(p) for p in block) for block in self._key)

    def digest(self) -> str:
        return hashlib.sha1(self.canonical_str().encode()).hexdigest()[:12]

    def covers(self, n_players: int) -> bool:
        return self._owner.keys() == set(range(n_players))

    def apply_move(self, mover: int, dest: frozenset | None) -> "Partition":
        """Partition after mover leaves its coalition and joins dest
        (None = a fresh singleton).  Empty origins disappear."""
        origin = self._owner[mover]
        if dest is not None and mover in dest:
            raise ValueError("mover already in destination")
        new_blocks = []
        for block in self._blocks:
            if block is origin:
                remainder = block - {mover}
                if remainder:
                    new_blocks.append(remainder)
            elif dest is not None and block == dest:
                new_blocks.append(block | {mover})
            else:
                new_blocks.append(block)
        if dest is None:
            new_blocks.append(frozenset({mover}))
        return Partition(new_blocks)

    def merge(self, a: frozenset, b: frozenset) -> "Partition":
        blocks = [blk for blk in self._blocks if blk != a and blk != b]
        blocks.append(a | b)
        return Partition(blocks)

    def split(self, whole: frozenset, part_a: frozenset, part_b: frozenset) -> "Partition":
        if part_a | part_b != whole or part_a & part_b:
            raise ValueError("parts must bisect the coalition")
        blocks = [blk for blk in self._blocks if blk != whole]
        blocks.extend([part_a, part_b])
        return Partition(blocks)

    def swap(self, x: int, y: int) -> "Partition":
        cx, cy = self._owner[x], self._owner[y]
        if cx == cy:
            raise ValueError("swap requires distinct coalitions")
        blocks = [blk for blk in self._blocks if blk != cx and blk != cy]
        blocks.append((cx - {x}) | {y})
        blocks.append((cy - {y}) | {x})
        return Partition(blocks)

    def __iter__(self) -> Iterator[frozenset]:
        return iter(self._blocks)

    def __len__(self) -> int:
        return len(self._blocks)

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Partition({self.canonical_str()})"


def set_partitions(items: Iterable[int]) -> Iterator[list[set[int]]]:
    """Yield every partition of items exactly once (Bell(n) in total)."""
    items = list(items)

    def rec(idx: int):
        if idx == len(items):
            yield []
            return
        first = items[idx]
        for rest in rec(idx + 1):
            for i in range(len(rest)):
                yield rest[:i] + [rest[i] | {first}] + rest[i + 1:]
            yield rest + [{first}]

    yield from rec(0)
