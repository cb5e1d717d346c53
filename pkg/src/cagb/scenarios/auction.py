"""Spectrum double auction with overlapping buyer groups.

One buyer group forms per channel; a buyer may sit in up to `demand` groups.
Groups aggregate their members' valuations into a single bid, and a channel
sells to its group when the bid covers the ask, at the midpoint price.
Group formation applies unanimously harmless (pareto) join actions only, so
each applied action helps the joiner and never hurts a seated member.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from ..seeds import derive_seed
from ..topology import generate_uniform

# Weight of the "progress toward covering the ask" term that lets groups
# form before they can afford the channel; the surplus term dominates once
# the group wins.
PROGRESS_WEIGHT = 0.01


@dataclass(frozen=True)
class Channel:
    id: int
    ask: float

    def __post_init__(self):
        if self.ask < 0:
            raise ValueError("ask must be >= 0")


@dataclass(frozen=True)
class Buyer:
    id: int
    valuations: dict[int, float]  # channel id -> value
    demand: int                   # distinct channels wanted

    def __post_init__(self):
        if self.demand < 1:
            raise ValueError("demand must be >= 1")
        for cid, v in self.valuations.items():
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"valuation for channel {cid} must be finite >= 0")


@dataclass(frozen=True)
class AuctionInstance:
    channels: tuple[Channel, ...]
    buyers: tuple[Buyer, ...]
    conflicts: frozenset  # frozenset({a, b}) pairs that cannot share a channel

    def __post_init__(self):
        for pair in self.conflicts:
            if len(pair) != 2:
                raise ValueError("conflicts must be unordered pairs")
        for b in self.buyers:
            if b.demand > len(self.channels) and self.channels:
                raise ValueError(f"buyer {b.id} demands more channels than exist")

    def conflict(self, a: int, b: int) -> bool:
        return frozenset((a, b)) in self.conflicts

    def buyer(self, buyer_id: int) -> Buyer:
        return self.buyers[buyer_id]


BuyerGrouping = dict  # channel id -> frozenset of buyer ids


def conflict_free(instance: AuctionInstance, group) -> bool:
    group = sorted(group)
    for i, a in enumerate(group):
        for b in group[i + 1:]:
            if instance.conflict(a, b):
                return False
    return True


def group_bid(instance: AuctionInstance, group, channel_id: int) -> float:
    """Aggregated budget: the sum of the members' valuations."""
    if not conflict_free(instance, group):
        raise ValueError("conflicting buyers cannot bid together")
    return sum(instance.buyer(b).valuations.get(channel_id, 0.0) for b in group)


@dataclass(frozen=True)
class Trade:
    channel_id: int
    group: frozenset
    price: float


@dataclass(frozen=True)
class AuctionOutcome:
    trades: tuple[Trade, ...]
    selling_ratio: float
    satisfaction: float
    revenue: float


def double_auction_clear(grouping: BuyerGrouping,
                         instance: AuctionInstance) -> AuctionOutcome:
    """Greedy per-channel clearing: a channel sells to its group iff the
    group bid covers the ask; price is the bid/ask midpoint."""
    trades = []
    won: dict[int, int] = {b.id: 0 for b in instance.buyers}
    for channel in sorted(instance.channels, key=lambda c: (c.ask, c.id)):
        group = frozenset(grouping.get(channel.id, frozenset()))
        if not group:
            continue
        bid = group_bid(instance, group, channel.id)
        if bid >= channel.ask:
            trades.append(Trade(channel.id, group, (channel.ask + bid) / 2.0))
            for b in group:
                won[b] += 1
    ratio = len(trades) / len(instance.channels) if instance.channels else 0.0
    if instance.buyers:
        satisfaction = sum(min(won[b.id], b.demand) / b.demand
                           for b in instance.buyers) / len(instance.buyers)
    else:
        satisfaction = 0.0
    revenue = sum(t.price for t in trades)
    return AuctionOutcome(tuple(trades), ratio, satisfaction, revenue)


def validate_grouping(grouping: BuyerGrouping, instance: AuctionInstance) -> None:
    counts: dict[int, int] = {}
    for cid, group in grouping.items():
        if not conflict_free(instance, group):
            raise ValueError(f"channel {cid} group has conflicting buyers")
        for b in group:
            counts[b] = counts.get(b, 0) + 1
    for b, k in counts.items():
        if k > instance.buyer(b).demand:
            raise ValueError(f"buyer {b} sits in {k} groups, demand is "
                             f"{instance.buyer(b).demand}")


def _member_utility(instance: AuctionInstance, channel: Channel,
                    group, buyer_id: int) -> float:
    """Per-channel utility: capped progress toward the ask plus, once the
    group can afford the channel, the midpoint-price surplus (cost shares
    proportional to valuations)."""
    v = instance.buyer(buyer_id).valuations.get(channel.id, 0.0)
    bid = group_bid(instance, group, channel.id)
    progress = 1.0 if channel.ask == 0 else min(bid / channel.ask, 1.0)
    utility = PROGRESS_WEIGHT * v * progress
    if bid >= channel.ask and bid > 0:
        utility += v * (bid - channel.ask) / (2.0 * bid)
    return utility


def _approved_join(instance: AuctionInstance, channel: Channel,
                   group: frozenset, buyer_id: int) -> bool:
    """Pareto gate: the joiner strictly gains and no seated member loses."""
    joined = group | {buyer_id}
    gain = _member_utility(instance, channel, joined, buyer_id)
    if gain <= 0:
        return False
    return not any(
        _member_utility(instance, channel, joined, m)
        < _member_utility(instance, channel, group, m) - 1e-9
        for m in group)


def form_buyer_groups(instance: AuctionInstance, order: str = "pareto",
                      seed: int = 0, max_iters: int = 100) -> BuyerGrouping:
    """Iterative overlapping group formation under pareto improvement.

    Allocation and pricing are considered jointly: each round targets the
    channel that can be pushed over its ask with the fewest joiners, and the
    crossing joins are committed one by one (each a strict gain for the
    joiner, harmless to seated members).  Leftover capacity then rides along
    on winning channels, which only lowers the seated members' shares."""
    if order != "pareto":
        raise ValueError("buyer-group formation uses the pareto order")
    rng = random.Random(seed)
    groups: dict[int, frozenset] = {c.id: frozenset() for c in instance.channels}
    seats = {b.id: 0 for b in instance.buyers}
    channels = {c.id: c for c in instance.channels}
    # seeded shuffle ahead of the stable value sort: ties break per seed
    base_order = [b.id for b in instance.buyers]
    rng.shuffle(base_order)

    def candidates(cid: int):
        group = groups[cid]
        eligible = [b for b in base_order
                    if seats[b] < instance.buyer(b).demand
                    and b not in group
                    and not any(instance.conflict(b, m) for m in group)]
        eligible.sort(key=lambda b: -instance.buyer(b).valuations.get(cid, 0.0))
        return eligible

    def winning(cid: int) -> bool:
        group = groups[cid]
        return bool(group) and group_bid(instance, group, cid) >= channels[cid].ask

    for _ in range(max_iters):
        # cheapest crossing: the losing channel needing the fewest joiners
        best_plan, best_cost = None, None
        for cid in sorted(groups):
            if winning(cid):
                continue
            group = groups[cid]
            bid = group_bid(instance, group, cid)
            joiners, joined = [], set(group)
            for b in candidates(cid):
                if any(instance.conflict(b, m) for m in joined):
                    continue
                v = instance.buyer(b).valuations.get(cid, 0.0)
                if v <= 0:
                    continue
                joiners.append(b)
                joined.add(b)
                bid += v
                if bid >= channels[cid].ask and joined:
                    break
            if not joined or bid < channels[cid].ask:
                continue
            cost = (len(joiners), channels[cid].ask, cid)
            if best_cost is None or cost < best_cost:
                best_plan, best_cost = (cid, joiners), cost
        if best_plan is None:
            break
        cid, joiners = best_plan
        for b in joiners:
            if _approved_join(instance, channels[cid], groups[cid], b):
                groups[cid] = groups[cid] | {b}
                seats[b] += 1

    # free riding on winners: strict joiner gain, seated shares only shrink
    changed = True
    while changed:
        changed = False
        for b in base_order:
            if seats[b] >= instance.buyer(b).demand:
                continue
            best_cid, best_gain = None, 0.0
            for cid in sorted(groups):
                if not winning(cid) or b in groups[cid]:
                    continue
                if any(instance.conflict(b, m) for m in groups[cid]):
                    continue
                gain = _member_utility(instance, channels[cid],
                                       groups[cid] | {b}, b)
                if gain > best_gain and _approved_join(instance, channels[cid],
                                                       groups[cid], b):
                    best_cid, best_gain = cid, gain
            if best_cid is not None:
                groups[best_cid] = groups[best_cid] | {b}
                seats[b] += 1
                changed = True
    return {cid: g for cid, g in groups.items() if g}


def random_grouping(instance: AuctionInstance, seed: int = 0) -> BuyerGrouping:
    """Baseline: seeded random conflict-free packing under the same demand
    caps, with no regard for budgets."""
    rng = random.Random(seed)
    seats = {b.id: 0 for b in instance.buyers}
    grouping: BuyerGrouping = {}
    for channel in instance.channels:
        group: set[int] = set()
        order = [b.id for b in instance.buyers]
        rng.shuffle(order)
        for buyer_id in order:
            if seats[buyer_id] >= instance.buyer(buyer_id).demand:
                continue
            if any(instance.conflict(buyer_id, m) for m in group):
                continue
            if rng.random() < 0.5:
                group.add(buyer_id)
                seats[buyer_id] += 1
        if group:
            grouping[channel.id] = frozenset(group)
    return grouping


def solo_assignment(instance: AuctionInstance) -> BuyerGrouping:
    """Baseline without grouping: each channel is offered to the available
    buyer valuing it most, who bids alone."""
    seats = {b.id: 0 for b in instance.buyers}
    grouping: BuyerGrouping = {}
    for channel in sorted(instance.channels, key=lambda c: (c.ask, c.id)):
        best, best_v = None, 0.0
        for buyer in instance.buyers:
            if seats[buyer.id] >= buyer.demand:
                continue
            v = buyer.valuations.get(channel.id, 0.0)
            if v > best_v:
                best, best_v = buyer.id, v
        if best is not None:
            grouping[channel.id] = frozenset({best})
            seats[best] += 1
    return grouping


def build_instance(n_buyers: int, n_channels: int,
                   ask_range: tuple[float, float],
                   valuation_range: tuple[float, float],
                   demand_max: int, area: tuple[float, float],
                   interference_radius: float, seed: int = 0) -> AuctionInstance:
    """Seeded instance: buyers dropped uniformly in the area, with buyers
    inside the interference radius conflicting (location awareness)."""
    rng = random.Random(derive_seed(seed, "auction-instance"))
    graph = generate_uniform(n_buyers, area, interference_radius, "user",
                             derive_seed(seed, "auction-topology"))
    channels = tuple(Channel(i, rng.uniform(*ask_range)) for i in range(n_channels))
    buyers = []
    for b in range(n_buyers):
        valuations = {c.id: rng.uniform(*valuation_range) for c in channels}
        demand = rng.randint(1, max(1, min(demand_max, n_channels)))
        buyers.append(Buyer(b, valuations, demand))
    conflicts = frozenset(frozenset((i, j))
                          for i in graph.node_ids for j in graph.adj(i) if i < j)
    return AuctionInstance(channels, tuple(buyers), conflicts)


ALGORITHMS = ("cagb", "random", "none")


def run_algorithm(algorithm: str, instance: AuctionInstance, seed: int,
                  max_iters: int = 100) -> AuctionOutcome:
    if algorithm == "cagb":
        grouping = form_buyer_groups(instance, seed=derive_seed(seed, "form"),
                                     max_iters=max_iters)
    elif algorithm == "random":
        grouping = random_grouping(instance, derive_seed(seed, "random"))
    elif algorithm == "none":
        grouping = solo_assignment(instance)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    validate_grouping(grouping, instance)
    return double_auction_clear(grouping, instance)


def experiment_cell(algorithm: str, n_buyers: int, seed: int, *,
                    n_channels: int, ask_range: tuple[float, float],
                    valuation_range: tuple[float, float], demand_max: int,
                    area: tuple[float, float], interference_radius: float,
                    max_iters: int = 100) -> dict:
    """One metrics row: a single (algorithm, buyer count, seed) run."""
    instance = build_instance(n_buyers, n_channels, ask_range,
                              valuation_range, demand_max, area,
                              interference_radius, derive_seed(seed, n_buyers))
    outcome = run_algorithm(algorithm, instance,
                            derive_seed(seed, n_buyers, algorithm), max_iters)
    return {
        "algorithm": algorithm,
        "n_buyers": n_buyers,
        "seed": seed,
        "selling_ratio": outcome.selling_ratio,
        "satisfaction": outcome.satisfaction,
        "revenue": outcome.revenue,
    }


def run_auction_experiment(*, n_channels: int, ask_range: tuple[float, float],
                           valuation_range: tuple[float, float],
                           demand_max: int, buyer_counts: list[int],
                           interference_radius: float,
                           area: tuple[float, float] = (100.0, 100.0),
                           seeds: list[int] = (0,),
                           max_iters: int = 100) -> list[dict]:
    """Sweep buyer counts: grouped, randomly grouped and solo runs per seed."""
    rows = []
    for n_buyers in buyer_counts:
        for seed in seeds:
            for algorithm in ALGORITHMS:
                rows.append(experiment_cell(
                    algorithm, n_buyers, seed, n_channels=n_channels,
                    ask_range=ask_range, valuation_range=valuation_range,
                    demand_max=demand_max, area=area,
                    interference_radius=interference_radius,
                    max_iters=max_iters))
    return rows
