import random
from collections import Counter

import pytest

from cagb.engine import enumerate_stable_partitions, run_until_stable, total_utility
from cagb.partition import Partition, set_partitions
from cagb.scenarios.caching import (CachingParams, ContentCatalog,
                                    assign_downloaders, build_caching_game,
                                    coalition_download_cost, download_shares,
                                    generate_demands, sharing_cost,
                                    validate_demands)
from cagb.topology import generate_fixed, generate_uniform, hop_distance

fs = frozenset


def unit_catalog(n):
    return ContentCatalog.uniform(n, 1.0)


def params(c_bs=1.0, c_share=0.0):
    return CachingParams(c_bs=c_bs, c_share=c_share)


def path_graph(n=3):
    return generate_fixed([(float(i), 0.0) for i in range(n)], radius=1.5)


# ------------------------------------------------------------ download cost

def test_download_cost_identical_demands_independent_of_size():
    catalog = unit_catalog(5)
    shared = fs({0, 1, 2})
    for size in (1, 2, 4):
        demands = {i: shared for i in range(size)}
        cost = coalition_download_cost(range(size), demands, catalog, params())
        assert cost == pytest.approx(3.0)


def test_download_cost_disjoint_demands_add_up():
    catalog = unit_catalog(6)
    demands = {0: fs({0, 1}), 1: fs({2}), 2: fs({3, 4, 5})}
    cost = coalition_download_cost(range(3), demands, catalog, params())
    assert cost == pytest.approx(6.0)


def test_download_cost_overlap_counts_once():
    catalog = unit_catalog(3)
    demands = {0: fs({0, 1}), 1: fs({1, 2})}
    cost = coalition_download_cost({0, 1}, demands, catalog, params())
    assert cost == pytest.approx(3.0)


def test_download_cost_scales_with_rate_and_sizes():
    catalog = ContentCatalog({0: 2.0, 1: 3.5})
    demands = {0: fs({0}), 1: fs({0, 1})}
    cost = coalition_download_cost({0, 1}, demands, catalog, params(c_bs=0.5))
    assert cost == pytest.approx(0.5 * 5.5)


def test_catalog_rejects_nonpositive_size():
    with pytest.raises(ValueError):
        ContentCatalog({0: 0.0})


def test_validate_demands():
    catalog = unit_catalog(2)
    with pytest.raises(ValueError):
        validate_demands({0: fs()}, catalog)
    with pytest.raises(ValueError):
        validate_demands({0: fs({7})}, catalog)


# ------------------------------------------------------------ shapley split

def test_identical_demands_split_evenly():
    catalog = unit_catalog(1)
    demands = {i: fs({0}) for i in range(4)}
    shares = download_shares(range(4), demands, catalog, params())
    for i in range(4):
        assert shares[i] == pytest.approx(0.25)


def test_two_player_overlap_shares_hand_computed():
    # union game: v(A)=2, v(B)=2, v(AB)=3; both orderings average to 1.5
    catalog = unit_catalog(3)
    demands = {0: fs({0, 1}), 1: fs({1, 2})}
    shares = download_shares({0, 1}, demands, catalog, params())
    assert shares[0] == pytest.approx(1.5)
    assert shares[1] == pytest.approx(1.5)


def test_disjoint_player_pays_standalone_cost():
    catalog = unit_catalog(6)
    demands = {0: fs({0, 1}), 1: fs({0, 1}), 2: fs({4, 5})}
    shares = download_shares(range(3), demands, catalog, params())
    assert shares[2] == pytest.approx(2.0)


def test_shares_are_individually_rational():
    # subadditive union cost: nobody pays more than downloading alone
    rng = random.Random(8)
    catalog = unit_catalog(10)
    for _ in range(20):
        n = rng.randint(2, 6)
        demands = {i: fs(rng.sample(range(10), rng.randint(1, 5)))
                   for i in range(n)}
        shares = download_shares(range(n), demands, catalog, params())
        for i in range(n):
            standalone = float(len(demands[i]))
            assert shares[i] <= standalone + 1e-9
        total = coalition_download_cost(range(n), demands, catalog, params())
        assert sum(shares.values()) == pytest.approx(total, rel=1e-9)


def test_grouping_never_raises_download_cost():
    rng = random.Random(21)
    catalog = unit_catalog(8)
    for _ in range(30):
        n = rng.randint(1, 6)
        demands = {i: fs(rng.sample(range(8), rng.randint(1, 4)))
                   for i in range(n)}
        union_cost = coalition_download_cost(range(n), demands, catalog, params())
        standalone_sum = sum(len(demands[i]) for i in range(n))
        assert union_cost <= standalone_sum + 1e-12


# ------------------------------------------------------------ sharing cost

def test_sharing_cost_zero_for_singleton():
    catalog = unit_catalog(2)
    demands = {0: fs({0, 1})}
    g = path_graph(1)
    holders = assign_downloaders({0}, g, demands, catalog, params(c_share=0.3))
    assert sharing_cost(0, {0}, g, demands, catalog, params(c_share=0.3),
                        holders) == 0.0


def test_sharing_cost_zero_when_rate_is_zero():
    catalog = unit_catalog(2)
    g = path_graph(3)
    demands = {0: fs({0}), 1: fs({0}), 2: fs({0, 1})}
    p = params(c_share=0.0)
    holders = assign_downloaders({0, 1, 2}, g, demands, catalog, p)
    for i in range(3):
        assert sharing_cost(i, {0, 1, 2}, g, demands, catalog, p, holders) == 0.0


def test_sharing_cost_two_hops_hand_computed():
    # content of size 2 MB held at one end of a 3-path, consumed at the other
    catalog = ContentCatalog({0: 2.0})
    g = path_graph(3)
    demands = {0: fs({0}), 1: fs({0}), 2: fs({0})}
    p = params(c_share=0.1)
    holders = {0: 0}
    cost = sharing_cost(2, {0, 1, 2}, g, demands, catalog, p, holders)
    assert cost == pytest.approx(2.0 * 0.1 * 2)


# ------------------------------------------------------------ downloader map

def test_sole_demander_downloads_itself():
    catalog = unit_catalog(2)
    g = path_graph(2)
    demands = {0: fs({0}), 1: fs({1})}
    holders = assign_downloaders({0, 1}, g, demands, catalog, params())
    assert holders == {0: 0, 1: 1}


def test_downloader_minimizes_total_hops():
    # all three path members want the content; the middle node reaches the
    # others in one hop each and must be chosen
    catalog = unit_catalog(1)
    g = path_graph(3)
    demands = {0: fs({0}), 1: fs({0}), 2: fs({0})}
    holders = assign_downloaders({0, 1, 2}, g, demands, catalog, params())
    ends_cost = {c: sum(hop_distance(g, c, o, {0, 1, 2})
                        for o in (0, 1, 2) if o != c) for c in (0, 1, 2)}
    assert min(ends_cost.values()) == ends_cost[1]
    assert holders[0] == 1


def test_star_hub_downloads_shared_content():
    # hub 0 with three leaves; everyone wants content 0
    g = generate_fixed([(5, 5), (5, 6), (5, 4), (6, 5)], radius=1.0,
                       area=(10, 10))
    catalog = unit_catalog(1)
    demands = {i: fs({0}) for i in range(4)}
    members = {0, 1, 2, 3}

    totals = {}
    for candidate in sorted(members):
        totals[candidate] = sum(hop_distance(g, candidate, other, members)
                                for other in members if other != candidate)
    assert min(totals, key=lambda c: (totals[c], c)) == 0

    holders = assign_downloaders(members, g, demands, catalog, params())
    assert holders[0] == 0


def test_path_tie_two_requesters_lowest_id():
    g = path_graph(3)
    catalog = unit_catalog(1)
    demands = {0: fs({0}), 1: fs({0}), 2: fs({0})}
    # within {0, 1}: both candidates cost one hop; id 0 wins the tie
    holders = assign_downloaders({0, 1}, g, demands, catalog, params())
    assert holders[0] == 0


# ------------------------------------------------------------ game building

def test_singleton_utility_is_negated_standalone_cost():
    g = path_graph(3)
    catalog = unit_catalog(4)
    demands = {0: fs({0, 1}), 1: fs({2}), 2: fs({1, 2, 3})}
    game = build_caching_game(g, demands, catalog, params(c_bs=2.0))
    assert game.utility(0, fs({0})) == pytest.approx(-4.0)
    assert game.utility(1, fs({1})) == pytest.approx(-2.0)
    assert game.utility(2, fs({2})) == pytest.approx(-6.0)


def test_adjacent_twins_profit_from_pairing():
    g = path_graph(2)
    catalog = unit_catalog(2)
    demands = {0: fs({0, 1}), 1: fs({0, 1})}
    game = build_caching_game(g, demands, catalog, params(c_bs=1.0, c_share=0.05))
    pair = fs({0, 1})
    for i in (0, 1):
        assert game.utility(i, pair) > game.utility(i, fs({i}))


def test_non_adjacent_pair_is_infeasible():
    g = generate_fixed([(0, 0), (10, 10)], radius=1.0)
    catalog = unit_catalog(1)
    demands = {0: fs({0}), 1: fs({0})}
    game = build_caching_game(g, demands, catalog, params())
    assert not game.feasible(fs({0, 1}))


def test_game_requires_demands_for_every_node():
    g = path_graph(2)
    catalog = unit_catalog(1)
    with pytest.raises(ValueError):
        build_caching_game(g, {0: fs({0})}, catalog, params())


def test_grand_coalition_dominates_with_free_sharing():
    # with c_share = 0 the grand coalition's total cost is minimal
    rng = random.Random(5)
    catalog = unit_catalog(6)
    for trial in range(10):
        g = generate_uniform(5, (10, 10), 20.0, seed=trial)  # complete graph
        demands = {i: fs(rng.sample(range(6), rng.randint(1, 4)))
                   for i in range(5)}
        game = build_caching_game(g, demands, catalog, params(c_share=0.0))
        grand_total = -total_utility(game, Partition([set(range(5))]))
        for blocks in set_partitions(range(5)):
            other = -total_utility(game, Partition(blocks))
            assert grand_total <= other + 1e-9


# ------------------------------------------------------------ demand profiles

def test_demand_generation_deterministic():
    g = generate_uniform(10, (50, 50), 10.0, seed=4)
    catalog = unit_catalog(20)
    a = generate_demands(g, catalog, 0.8, 3, seed=11)
    b = generate_demands(g, catalog, 0.8, 3, seed=11)
    assert a == b
    c = generate_demands(g, catalog, 0.8, 3, seed=12)
    assert a != c


def test_demand_full_catalog():
    g = generate_uniform(4, (50, 50), 10.0, seed=4)
    catalog = unit_catalog(5)
    demands = generate_demands(g, catalog, 0.8, 5, seed=0)
    for i in range(4):
        assert demands[i] == fs(range(5))


def test_demand_count_and_membership():
    g = generate_uniform(30, (50, 50), 10.0, seed=1)
    catalog = unit_catalog(12)
    demands = generate_demands(g, catalog, 1.2, 4, seed=3)
    for i in range(30):
        assert len(demands[i]) == 4
        assert demands[i] <= set(range(12))


def test_demand_rejects_oversized_requests():
    g = generate_uniform(2, (50, 50), 10.0, seed=1)
    with pytest.raises(ValueError):
        generate_demands(g, unit_catalog(3), 0.8, 4, seed=0)


def test_zero_skew_sampling_is_uniform():
    # one pick per player over many players: each of the K contents should
    # appear within 3 sigma of the binomial expectation
    g = generate_uniform(10000, (50, 50), 0.0, seed=2)
    catalog = unit_catalog(10)
    demands = generate_demands(g, catalog, 0.0, 1, seed=13)
    counts = Counter(next(iter(demands[i])) for i in range(10000))
    expect = 10000 / 10
    sigma = (10000 * 0.1 * 0.9) ** 0.5
    for content in range(10):
        assert abs(counts[content] - expect) <= 3 * sigma


def test_skewed_sampling_prefers_popular_contents():
    g = generate_uniform(5000, (50, 50), 0.0, seed=2)
    catalog = unit_catalog(10)
    demands = generate_demands(g, catalog, 1.5, 1, seed=29)
    counts = Counter(next(iter(demands[i])) for i in range(5000))
    assert counts[0] > counts[9] * 2


# ------------------------------------------------------------ oracle run

def test_large_coalition_shares_use_montecarlo_and_stay_efficient():
    # 12 members exceeds the exact cutoff; the seeded estimator still
    # telescopes to the full union cost
    g = generate_uniform(12, (10, 10), 20.0, seed=3)  # complete graph
    catalog = unit_catalog(20)
    rng = random.Random(9)
    demands = {i: fs(rng.sample(range(20), 5)) for i in range(12)}
    p = params()
    shares = download_shares(range(12), demands, catalog, p, mc_seed=4)
    total = coalition_download_cost(range(12), demands, catalog, p)
    assert sum(shares.values()) == pytest.approx(total, rel=1e-9)
    again = download_shares(range(12), demands, catalog, p, mc_seed=4)
    assert shares == again
    for i in range(12):
        assert shares[i] <= len(demands[i]) + 1e-9


def test_oversized_coalitions_split_by_sampling():
    # 14 players, identical demands, free sharing: merges grow the grand
    # coalition past the exhaustive-bipartition cap, where splitting must
    # fall back to sampling and still find nothing profitable
    from cagb.engine import split_step
    from cagb.partition import Partition

    g = generate_uniform(14, (10, 10), 20.0, seed=5)  # complete graph
    catalog = unit_catalog(4)
    demands = {i: fs(range(4)) for i in range(14)}
    game = build_caching_game(g, demands, catalog, params(c_share=0.0))
    partition, trace = run_until_stable(game, g, "pareto", "merge-split", 6, 500)
    assert trace.status == "stable"
    assert len(partition) == 1 and len(partition.coalitions[0]) == 14
    assert split_step(game, partition, "pareto") is None


def test_merge_split_runs_terminate_and_settle():
    from cagb.engine import merge_step, split_step

    for seed in (3, 7):
        g = generate_uniform(6, (100, 100), 45.0, kind="small-cell", seed=seed)
        catalog = unit_catalog(12)
        demands = generate_demands(g, catalog, 0.8, 3, seed=seed + 1)
        game = build_caching_game(g, demands, catalog,
                                  params(c_bs=1.0, c_share=0.02))
        for order in ("pareto", "coalition", "selfish"):
            partition, trace = run_until_stable(game, g, order, "merge-split",
                                                seed, 2000)
            assert trace.status == "stable"
            assert merge_step(game, partition, order) is None
            assert split_step(game, partition, order) is None


def test_switch_swap_runs_stay_valid():
    g = generate_uniform(6, (100, 100), 50.0, kind="small-cell", seed=41)
    catalog = unit_catalog(10)
    demands = generate_demands(g, catalog, 0.8, 3, seed=42)
    game = build_caching_game(g, demands, catalog,
                              params(c_bs=1.0, c_share=0.05))
    for order in ("pareto", "selfish"):
        partition, trace = run_until_stable(game, g, order, "switch+swap",
                                            43, 3000)
        assert partition.covers(6)
        for block in partition:
            if len(block) >= 2:
                assert game.feasible(block)
        if trace.status == "stable":
            oracle = enumerate_stable_partitions(game, g, order)
            assert partition in oracle


def test_six_player_instance_lands_in_stable_set():
    g = generate_uniform(6, (100, 100), 45.0, kind="small-cell", seed=33)
    catalog = unit_catalog(12)
    demands = generate_demands(g, catalog, 0.8, 3, seed=34)
    game = build_caching_game(g, demands, catalog,
                              params(c_bs=1.0, c_share=0.02))
    for order in ("pareto", "coalition", "selfish"):
        partition, trace = run_until_stable(game, g, order, "switch", 35, 3000)
        if trace.status == "stable":
            oracle = enumerate_stable_partitions(game, g, order)
            assert partition in oracle
