"""Cooperative caching scenario: coalitions download the union of their
members' demanded contents once, split that cost by Shapley value, and pay a
per-hop sharing cost for contents fetched by another member.

The resulting GameSpec plugs into the coalition engine; the all-singletons
partition is the non-grouping baseline (everyone downloads alone).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..engine import GameSpec
from ..seeds import derive_seed
from ..shapley import EXACT_LIMIT, TUGame, shapley_exact, shapley_montecarlo
from ..topology import NetworkGraph, coalition_feasible, hop_distance

MC_SAMPLES = 4096


@dataclass(frozen=True)
class ContentCatalog:
    """Content id -> size in MB (strictly positive)."""
    sizes: dict[int, float]

    def __post_init__(self):
        for cid, size in self.sizes.items():
            if size <= 0:
                raise ValueError(f"content {cid} has non-positive size {size}")

    def __len__(self) -> int:
        return len(self.sizes)

    @classmethod
    def uniform(cls, n_items: int, size_mb: float = 1.0) -> "ContentCatalog":
        return cls({i: size_mb for i in range(n_items)})


@dataclass(frozen=True)
class CachingParams:
    c_bs: float            # cost per MB downloaded from the macro BS
    c_share: float = 0.0   # cost per MB per hop shared inside a coalition
    popularity_skew: float = 0.8

    def __post_init__(self):
        if self.c_bs <= 0:
            raise ValueError("c_bs must be > 0")
        if self.c_share < 0 or self.popularity_skew < 0:
            raise ValueError("c_share and popularity_skew must be >= 0")


DemandProfile = dict  # player id -> frozenset of content ids


def validate_demands(demands: DemandProfile, catalog: ContentCatalog) -> None:
    for player, wanted in demands.items():
        if not wanted:
            raise ValueError(f"player {player} has an empty demand set")
        unknown = set(wanted) - set(catalog.sizes)
        if unknown:
            raise ValueError(f"player {player} demands unknown contents {unknown}")


def demand_union(members, demands: DemandProfile) -> set[int]:
    union: set[int] = set()
    for player in members:
        union |= demands[player]
    return union


def coalition_download_cost(members, demands: DemandProfile,
                            catalog: ContentCatalog,
                            params: CachingParams) -> float:
    """Each content in the members' demand union is fetched exactly once."""
    if not members:
        raise ValueError("empty coalition")
    return params.c_bs * sum(catalog.sizes[c] for c in demand_union(members, demands))


def _union_cost_game(members, demands, catalog, params) -> TUGame:
    # Demand sets as bitmasks over the catalog: union = OR, cost = bit walk.
    order = sorted(catalog.sizes)
    bit_of = {cid: i for i, cid in enumerate(order)}
    size_of_bit = [catalog.sizes[cid] for cid in order]
    masks = {p: sum(1 << bit_of[c] for c in demands[p]) for p in members}

    def value(subset: frozenset) -> float:
        mask = 0
        for p in subset:
            mask |= masks[p]
        total = 0.0
        while mask:
            low = mask & -mask
            total += size_of_bit[low.bit_length() - 1]
            mask ^= low
        return params.c_bs * total

    return TUGame(tuple(sorted(members)), value)


def download_shares(members, demands: DemandProfile, catalog: ContentCatalog,
                    params: CachingParams, mc_samples: int = MC_SAMPLES,
                    mc_seed: int = 0) -> dict[int, float]:
    """Shapley split of the coalition download cost; exact up to 10 members,
    seeded Monte Carlo beyond."""
    game = _union_cost_game(members, demands, catalog, params)
    if len(game.members) <= EXACT_LIMIT:
        return shapley_exact(game)
    return shapley_montecarlo(game, mc_samples,
                              derive_seed(mc_seed, *game.members))


def assign_downloaders(members, graph: NetworkGraph, demands: DemandProfile,
                       catalog: ContentCatalog,
                       params: CachingParams) -> dict[int, int]:
    """Assign each union content to the demanding member whose total hop
    count to the other requesters is minimal (ties to the lowest id)."""
    members = frozenset(members)
    assignment: dict[int, int] = {}
    for content in sorted(demand_union(members, demands)):
        requesters = sorted(p for p in members if content in demands[p])
        best, best_hops = None, None
        for candidate in requesters:
            hops = 0
            for other in requesters:
                if other == candidate:
                    continue
                d = hop_distance(graph, candidate, other, members)
                assert d is not None, "feasible coalition must be connected"
                hops += d
            if best is None or hops < best_hops:
                best, best_hops = candidate, hops
        assignment[content] = best
    return assignment


def sharing_cost(player: int, members, graph: NetworkGraph,
                 demands: DemandProfile, catalog: ContentCatalog,
                 params: CachingParams,
                 downloader_map: dict[int, int]) -> float:
    """Cost of relaying the contents player demands but did not download."""
    members = frozenset(members)
    total = 0.0
    for content in sorted(demands[player]):
        holder = downloader_map[content]
        if holder == player:
            continue
        hops = hop_distance(graph, holder, player, members)
        assert hops is not None, "feasible coalition must be connected"
        total += catalog.sizes[content] * params.c_share * hops
    return total


def build_caching_game(graph: NetworkGraph, demands: DemandProfile,
                       catalog: ContentCatalog, params: CachingParams,
                       mc_seed: int = 0) -> GameSpec:
    """GameSpec whose utility is the negated per-member caching cost."""
    validate_demands(demands, catalog)
    if set(demands) != set(graph.node_ids):
        raise ValueError("demand keys must equal the graph node ids")
    cost_cache: dict[frozenset, dict[int, float]] = {}

    def member_costs(coalition: frozenset) -> dict[int, float]:
        costs = cost_cache.get(coalition)
        if costs is None:
            shares = download_shares(coalition, demands, catalog, params,
                                     mc_seed=mc_seed)
            holders = assign_downloaders(coalition, graph, demands, catalog, params)
            costs = {p: shares[p] + sharing_cost(p, coalition, graph, demands,
                                                 catalog, params, holders)
                     for p in coalition}
            cost_cache[coalition] = costs
        return costs

    def utility(player: int, coalition: frozenset) -> float:
        return -member_costs(coalition)[player]

    def feasible(coalition: frozenset) -> bool:
        return coalition_feasible(graph, coalition)

    return GameSpec(len(graph), utility, feasible)


def generate_demands(graph: NetworkGraph, catalog: ContentCatalog,
                     popularity_skew: float, per_player_count: int,
                     seed: int = 0) -> DemandProfile:
    """Each player samples distinct contents with Zipf(popularity_skew)
    weights over the catalog (id order = popularity rank)."""
    if per_player_count > len(catalog):
        raise ValueError("per_player_count exceeds the catalog size")
    if per_player_count < 1:
        raise ValueError("per_player_count must be >= 1")
    rng = random.Random(seed)
    ranked = sorted(catalog.sizes)
    base_weights = [(r + 1) ** -popularity_skew for r in range(len(ranked))]
    demands: DemandProfile = {}
    for player in graph.node_ids:
        pool = list(ranked)
        weights = list(base_weights)
        picked = []
        for _ in range(per_player_count):
            u = rng.random() * sum(weights)
            acc = 0.0
            idx = len(pool) - 1
            for i, w in enumerate(weights):
                acc += w
                if u < acc:
                    idx = i
                    break
            picked.append(pool.pop(idx))
            weights.pop(idx)
        demands[player] = frozenset(picked)
    return demands
