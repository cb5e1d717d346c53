"""Channel selection as a local cooperative game: every player's utility is
its own interference reward plus its neighbors' rewards, which makes the sum
of rewards an exact potential for unilateral deviations."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..topology import NetworkGraph, neighbors

LcgState = dict  # player id -> channel index

# Improvement margin: rewards are unit fractions, so any real gain dwarfs
# this; it only filters float noise on mathematically equal utilities.
EPS = 1e-9


def reward(player: int, state: LcgState, graph: NetworkGraph) -> float:
    """1 / (1 + number of neighbors sharing the player's channel)."""
    channel = state[player]
    collisions = sum(1 for j in graph.adj(player) if state[j] == channel)
    return 1.0 / (1.0 + collisions)


def lcg_utility(player: int, state: LcgState, graph: NetworkGraph) -> float:
    """Own reward plus all neighbors' rewards."""
    total = reward(player, state, graph)
    for j in sorted(graph.adj(player)):
        total += reward(j, state, graph)
    return total


def potential(state: LcgState, graph: NetworkGraph) -> float:
    """Sum of all rewards; changes exactly as any unilateral deviator's
    utility does."""
    return sum(reward(i, state, graph) for i in graph.node_ids)


@dataclass
class LcgTrace:
    potentials: list[float] = field(default_factory=list)
    moves: list[tuple[int, int, int, int]] = field(default_factory=list)
    #        (iteration, player, old channel, new channel)
    converged: bool = False
    iterations: int = 0


def best_response(player: int, state: LcgState, graph: NetworkGraph,
                  n_channels: int) -> int:
    """Channel strictly maximizing the player's utility; ties go to the
    lowest channel and the current channel wins only ties at its own value."""
    current = state[player]
    best_channel, best_value = None, None
    for k in range(n_channels):
        state[player] = k
        value = lcg_utility(player, state, graph)
        if best_value is None or value > best_value:
            best_channel, best_value = k, value
    state[player] = current
    return best_channel


def is_equilibrium(state: LcgState, graph: NetworkGraph, n_channels: int) -> bool:
    for player in graph.node_ids:
        current = lcg_utility(player, state, graph)
        for k in range(n_channels):
            if k == state[player]:
                continue
            trial = dict(state)
            trial[player] = k
            if lcg_utility(player, trial, graph) > current + EPS:
                return False
    return True


def best_response_dynamics(graph: NetworkGraph, n_channels: int, seed: int = 0,
                           max_iters: int = 10000) -> tuple[LcgState, LcgTrace]:
    """Asynchronous best response from a seeded random start.  Terminates at
    a Nash equilibrium or at the iteration cap."""
    if n_channels < 1:
        raise ValueError("need at least one channel")
    rng = random.Random(seed)
    n = len(graph)
    state: LcgState = {i: rng.randrange(n_channels) for i in range(n)}
    trace = LcgTrace()
    trace.potentials.append(potential(state, graph))
    if n == 0:
        trace.converged = True
        return state, trace
    while trace.iterations < max_iters:
        trace.iterations += 1
        player = rng.randrange(n)
        current = lcg_utility(player, state, graph)
        choice = best_response(player, state, graph, n_channels)
        trial = dict(state)
        trial[player] = choice
        if choice != state[player] and lcg_utility(player, trial, graph) > current + EPS:
            trace.moves.append((trace.iterations, player, state[player], choice))
            state[player] = choice
            trace.potentials.append(potential(state, graph))
        elif is_equilibrium(state, graph, n_channels):
            trace.converged = True
            break
    return state, trace


def collision_free(state: LcgState, graph: NetworkGraph) -> bool:
    return all(reward(i, state, graph) == 1.0 for i in graph.node_ids)
