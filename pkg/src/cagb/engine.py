"""Coalition formation dynamics on a network graph.

Three preference orders gate every action:

* pareto   -- nobody affected may lose, the driver strictly gains
* coalition -- the destination coalition's aggregate utility strictly grows
* selfish  -- the driver strictly gains and no destination member loses

Actions are single-player moves (join / leave), merges and splits of whole
coalitions, and two-phase swaps.  Runs start from the all-singletons
partition and are deterministic in their seed; non-convergence is reported
in the trace status, never raised.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable

from .partition import Partition
from .topology import NetworkGraph, neighbors

ORDERS = ("pareto", "coalition", "selfish")
DYNAMICS = ("merge-split", "switch", "switch+swap")

# Absolute tolerance for "does not lose"; strict gains use plain >.
EPS = 1e-9

# Coalitions above this size have their bipartitions sampled, not enumerated.
SPLIT_ENUM_CAP = 12
SPLIT_SAMPLES = 2048


@dataclass(frozen=True)
class GameSpec:
    """Cooperative game: per-player utility over its own coalition only."""
    n_players: int
    utility: Callable[[int, frozenset], float]
    feasible: Callable[[frozenset], bool]


@dataclass(frozen=True)
class Move:
    mover: int
    origin: frozenset
    dest: frozenset | None  # None = new singleton

    def describe(self) -> str:
        target = "new" if self.dest is None else ",".join(map(str, sorted(self.dest)))
        return f"move:{self.mover}:{','.join(map(str, sorted(self.origin)))}->{target}"


class InfeasibleMoveError(ValueError):
    """The move would create an infeasible coalition (distinct from an
    order-based rejection)."""


def _check_order(order: str) -> None:
    if order not in ORDERS:
        raise ValueError(f"unknown preference order {order!r}")


def approves(order: str, game: GameSpec, move: Move, *,
             check_origin: bool = True) -> bool:
    """Does the preference order approve this single-player move?"""
    _check_order(order)
    mover, origin, dest = move.mover, move.origin, move.dest
    if mover not in origin:
        raise ValueError("mover must belong to origin")
    dest = frozenset() if dest is None else dest
    if mover in dest:
        raise ValueError("mover already in destination")
    new_dest = dest | {mover}
    if not game.feasible(new_dest):
        raise InfeasibleMoveError(f"{new_dest} is not feasible")
    remainder = origin - {mover}
    if check_origin and remainder and not game.feasible(remainder):
        raise InfeasibleMoveError(f"{remainder} is not feasible")

    u = game.utility
    mover_old = u(mover, origin)
    mover_new = u(mover, new_dest)
    if order == "coalition":
        new_total = sum(u(j, new_dest) for j in new_dest)
        old_total = sum(u(j, dest) for j in dest) + mover_old
        return new_total > old_total
    if mover_new <= mover_old:
        return False
    for j in dest:
        if u(j, new_dest) < u(j, dest) - EPS:
            return False
    if order == "selfish":
        return True
    # pareto: origin mates must not lose either
    for j in remainder:
        if u(j, remainder) < u(j, origin) - EPS:
            return False
    return True


def merge_allowed(order: str, game: GameSpec, a: frozenset, b: frozenset) -> bool:
    """Merge test for two coalitions; selfish falls back to the pareto test
    (a merge has no single driving player)."""
    _check_order(order)
    union = a | b
    if not game.feasible(union):
        return False
    u = game.utility
    if order == "coalition":
        merged = sum(u(j, union) for j in union)
        separate = sum(u(j, a) for j in a) + sum(u(j, b) for j in b)
        return merged > separate
    strict = False
    for part in (a, b):
        for j in part:
            old, new = u(j, part), u(j, union)
            if new < old - EPS:
                return False
            if new > old:
                strict = True
    return strict


def split_allowed(order: str, game: GameSpec, whole: frozenset,
                  part_a: frozenset, part_b: frozenset) -> bool:
    """Symmetric split test; selfish falls back to pareto, as for merges."""
    _check_order(order)
    for part in (part_a, part_b):
        if len(part) >= 2 and not game.feasible(part):
            return False
    u = game.utility
    if order == "coalition":
        separate = sum(u(j, part_a) for j in part_a) + sum(u(j, part_b) for j in part_b)
        return separate > sum(u(j, whole) for j in whole)
    strict = False
    for part in (part_a, part_b):
        for j in part:
            old, new = u(j, whole), u(j, part)
            if new < old - EPS:
                return False
            if new > old:
                strict = True
    return strict


def merge_step(game: GameSpec, partition: Partition,
               order: str) -> tuple[Partition, str] | None:
    """Apply the first approved merge in deterministic scan order."""
    blocks = partition.coalitions  # already ordered by least member
    for i in range(len(blocks)):
        for j in range(i + 1, len(blocks)):
            a, b = blocks[i], blocks[j]
            if merge_allowed(order, game, a, b):
                action = (f"merge:{','.join(map(str, sorted(a)))}"
                          f"+{','.join(map(str, sorted(b)))}")
                return partition.merge(a, b), action
    return None


def _bipartitions(members: list[int], rng: random.Random | None):
    """Yield (part_a, part_b, sampled) bisections of members.

    Enumerated exhaustively (2^(k-1) - 1 of them) up to SPLIT_ENUM_CAP
    members; beyond that a seeded sample of SPLIT_SAMPLES masks is used.
    """
    k = len(members)
    anchor = members[0]
    rest = members[1:]
    if k <= SPLIT_ENUM_CAP:
        for mask in range(1, 1 << (k - 1)):
            side_b = frozenset(rest[i] for i in range(k - 1) if mask >> i & 1)
            yield frozenset(members) - side_b, side_b, False
    else:
        seen = set()
        for _ in range(SPLIT_SAMPLES):
            mask = rng.randrange(1, 1 << (k - 1))
            if mask in seen:
                continue
            seen.add(mask)
            side_b = frozenset(rest[i] for i in range(k - 1) if mask >> i & 1)
            yield frozenset(members) - side_b, side_b, True


def split_step(game: GameSpec, partition: Partition,
               order: str) -> tuple[Partition, str] | None:
    """Apply the first approved 2-way split in deterministic scan order."""
    for block in partition.coalitions:
        if len(block) < 2:
            continue
        members = sorted(block)
        # Sampling seed is derived from the membership so the scan stays
        # deterministic without an rng parameter.
        rng = random.Random(hash(tuple(members)) & 0xFFFFFFFF)
        for part_a, part_b, sampled in _bipartitions(members, rng):
            if split_allowed(order, game, block, part_a, part_b):
                action = (f"split:{','.join(map(str, sorted(part_a)))}"
                          f"|{','.join(map(str, sorted(part_b)))}")
                if sampled:
                    action += ":sampled"
                return partition.split(block, part_a, part_b), action
    return None


def candidate_moves(game: GameSpec, graph: NetworkGraph, partition: Partition,
                    player: int) -> list[Move]:
    """Moves available to player: coalitions holding a graph neighbor, plus a
    fresh singleton.  Only moves whose resulting coalitions are feasible."""
    origin = partition.coalition_of(player)
    remainder = origin - {player}
    if remainder and not game.feasible(remainder):
        return []
    moves = []
    dests = []
    seen = set()
    for nbr in sorted(neighbors(graph, player)):
        dest = partition.coalition_of(nbr)
        if dest == origin or dest in seen:
            continue
        seen.add(dest)
        dests.append(dest)
    dests.sort(key=min)
    for dest in dests:
        if game.feasible(dest | {player}):
            moves.append(Move(player, origin, dest))
    if len(origin) > 1:
        moves.append(Move(player, origin, None))
    return moves


def switch_step(game: GameSpec, graph: NetworkGraph, partition: Partition,
                order: str, rng: random.Random) -> tuple[Partition, str] | None:
    """One seeded attempt: a random player tries its candidate moves in a
    seeded order and applies the first approved one."""
    if game.n_players <= 1:
        return None
    player = rng.randrange(game.n_players)
    moves = candidate_moves(game, graph, partition, player)
    rng.shuffle(moves)
    for move in moves:
        if approves(order, game, move):
            return partition.apply_move(move.mover, move.dest), move.describe()
    return None


def _swap_phases_approved(order: str, game: GameSpec, partition: Partition,
                          x: int, y: int) -> bool:
    """Both phases of the x<->y exchange, evaluated sequentially, must pass."""
    cx, cy = partition.coalition_of(x), partition.coalition_of(y)
    phase1 = Move(x, cx, cy)
    try:
        # Origin feasibility is deferred: y backfills cx in phase two.
        if not approves(order, game, phase1, check_origin=False):
            return False
        mid_cy = cy | {x}
        mid_cx = cx - {x}
        phase2 = Move(y, mid_cy, mid_cx if mid_cx else None)
        return approves(order, game, phase2)
    except InfeasibleMoveError:
        return False


def swap_step(game: GameSpec, partition: Partition, order: str,
              rng: random.Random) -> tuple[Partition, str] | None:
    """One seeded attempt at a one-to-one exchange between two coalitions."""
    if game.n_players <= 1 or len(partition) < 2:
        return None
    x = rng.randrange(game.n_players)
    cx = partition.coalition_of(x)
    partners = [y for y in range(game.n_players) if partition.coalition_of(y) != cx]
    rng.shuffle(partners)
    for y in partners:
        if _swap_phases_approved(order, game, partition, x, y):
            return partition.swap(x, y), f"swap:{x}<->{y}"
    return None


def find_blocking_move(game: GameSpec, graph: NetworkGraph,
                       partition: Partition, order: str) -> Move | None:
    """Deterministic sweep for any approved single-player move."""
    for player in range(game.n_players):
        for move in candidate_moves(game, graph, partition, player):
            try:
                if approves(order, game, move):
                    return move
            except InfeasibleMoveError:
                continue
    return None


def _find_approved_swap(game: GameSpec, partition: Partition,
                        order: str) -> tuple[int, int] | None:
    for x in range(game.n_players):
        cx = partition.coalition_of(x)
        for y in range(game.n_players):
            if partition.coalition_of(y) == cx:
                continue
            if _swap_phases_approved(order, game, partition, x, y):
                return x, y
    return None


def is_stable(game: GameSpec, graph: NetworkGraph, partition: Partition,
              order: str) -> bool:
    """No single-player move (to a neighbor coalition or a new singleton)
    is approved by the order."""
    return find_blocking_move(game, graph, partition, order) is None


def total_utility(game: GameSpec, partition: Partition) -> float:
    return sum(game.utility(j, block) for block in partition for j in block)


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    action: str
    partition: str
    potential: float
    digest: str


@dataclass
class Trace:
    entries: list[TraceEntry] = field(default_factory=list)
    status: str = "iteration-cap"
    iterations: int = 0

    def to_jsonl(self) -> str:
        lines = [json.dumps({"iter": e.iteration, "action": e.action,
                             "partition": e.partition, "potential": e.potential})
                 for e in self.entries]
        return "\n".join(lines) + ("\n" if lines else "")


def run_until_stable(game: GameSpec, graph: NetworkGraph, order: str,
                     dynamics: str, seed: int,
                     max_iters: int) -> tuple[Partition, Trace]:
    """Iterate the chosen dynamics from all-singletons until stability,
    a revisited partition (cycle), or the iteration cap."""
    _check_order(order)
    if dynamics not in DYNAMICS:
        raise ValueError(f"unknown dynamics {dynamics!r}")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")

    partition = Partition.singletons(game.n_players)
    rng = random.Random(seed)
    seen = {partition.key()}
    trace = Trace()

    while trace.iterations < max_iters:
        trace.iterations += 1
        if dynamics == "merge-split":
            result = merge_step(game, partition, order) or \
                split_step(game, partition, order)
            if result is None:
                trace.status = "stable"
                break
        else:
            result = switch_step(game, graph, partition, order, rng)
            if result is None and dynamics == "switch+swap":
                result = swap_step(game, partition, order, rng)
            if result is None:
                blocked = find_blocking_move(game, graph, partition, order) is None
                if blocked and dynamics == "switch+swap":
                    blocked = _find_approved_swap(game, partition, order) is None
                if blocked:
                    trace.status = "stable"
                    break
                continue
        partition, action = result
        trace.entries.append(TraceEntry(
            trace.iterations, action, partition.canonical_str(),
            total_utility(game, partition), partition.digest()))
        key = partition.key()
        if key in seen:
            trace.status = "cycle-detected"
            break
        seen.add(key)
    return partition, trace


def enumerate_stable_partitions(game: GameSpec, graph: NetworkGraph,
                                order: str) -> set[Partition]:
    """Brute-force oracle: every feasibility-respecting partition that passes
    is_stable.  Bounded at 10 players (Bell(10) = 115975 candidates)."""
    from .partition import set_partitions

    if game.n_players > 10:
        raise ValueError("oracle enumeration is limited to 10 players")
    stable = set()
    for blocks in set_partitions(range(game.n_players)):
        frozen = [frozenset(b) for b in blocks]
        if any(len(b) >= 2 and not game.feasible(b) for b in frozen):
            continue
        partition = Partition(frozen)
        if is_stable(game, graph, partition, order):
            stable.add(partition)
    return stable
