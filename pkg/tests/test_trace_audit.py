"""Replay applied actions out of run traces and assert the per-action
guarantees of each preference order on real caching instances."""

import re

from cagb.engine import merge_allowed, run_until_stable
from cagb.scenarios.caching import (CachingParams, ContentCatalog,
                                    build_caching_game, generate_demands)
from cagb.seeds import derive_seed
from cagb.topology import generate_uniform

fs = frozenset

MOVE_RE = re.compile(r"move:(\d+):([\d,]+)->(new|[\d,]+)")


def parse_move(action):
    match = MOVE_RE.fullmatch(action)
    assert match, f"unexpected action {action!r}"
    mover = int(match.group(1))
    origin = fs(int(x) for x in match.group(2).split(","))
    dest = None if match.group(3) == "new" else \
        fs(int(x) for x in match.group(3).split(","))
    return mover, origin, dest


def caching_fixture(seed, n=6):
    g = generate_uniform(n, (100, 100), 55.0, "small-cell",
                         derive_seed(seed, "topology"))
    catalog = ContentCatalog.uniform(12, 1.0)
    demands = generate_demands(g, catalog, 0.8, 4, derive_seed(seed, "demand"))
    game = build_caching_game(g, demands, catalog,
                              CachingParams(c_bs=1.0, c_share=0.05),
                              mc_seed=derive_seed(seed, "shapley"))
    return g, game


def replay_moves(game, trace):
    for entry in trace.entries:
        yield parse_move(entry.action)


def test_selfish_invariant_holds_per_applied_move():
    for seed in range(8):
        g, game = caching_fixture(seed)
        _, trace = run_until_stable(game, g, "selfish", "switch",
                                    derive_seed(seed, "dyn"), 3000)
        assert trace.entries, "fixture should produce at least one move"
        for mover, origin, dest in replay_moves(game, trace):
            joined = (dest or fs()) | {mover}
            assert game.utility(mover, joined) > game.utility(mover, origin)
            for j in (dest or fs()):
                assert game.utility(j, joined) >= game.utility(j, dest) - 1e-9


def test_pareto_invariant_holds_per_applied_move():
    for seed in range(8):
        g, game = caching_fixture(seed)
        _, trace = run_until_stable(game, g, "pareto", "switch",
                                    derive_seed(seed, "dyn"), 3000)
        for mover, origin, dest in replay_moves(game, trace):
            joined = (dest or fs()) | {mover}
            remainder = origin - {mover}
            assert game.utility(mover, joined) > game.utility(mover, origin)
            for j in (dest or fs()):
                assert game.utility(j, joined) >= game.utility(j, dest) - 1e-9
            for j in remainder:
                assert game.utility(j, remainder) >= game.utility(j, origin) - 1e-9


def test_coalition_invariant_holds_per_applied_move():
    # aggregate of the joined coalition strictly beats the pieces it absorbs
    found = 0
    for seed in range(10):
        g, game = caching_fixture(seed)
        _, trace = run_until_stable(game, g, "coalition", "switch",
                                    derive_seed(seed, "dyn"), 400)
        for mover, origin, dest in replay_moves(game, trace):
            joined = (dest or fs()) | {mover}
            new_total = sum(game.utility(j, joined) for j in joined)
            old_total = sum(game.utility(j, dest) for j in (dest or fs()))
            old_total += game.utility(mover, origin)
            assert new_total > old_total
            found += 1
    assert found > 0


def test_coalition_merge_invariant():
    # merge approved under the coalition order iff the union's aggregate
    # strictly beats the parts
    for seed in range(6):
        g, game = caching_fixture(seed, n=5)
        blocks = [fs({i}) for i in range(5)]
        for i in range(5):
            for j in range(i + 1, 5):
                union = blocks[i] | blocks[j]
                if not game.feasible(union):
                    continue
                merged = sum(game.utility(p, union) for p in union)
                separate = (game.utility(i, blocks[i])
                            + game.utility(j, blocks[j]))
                assert merge_allowed("coalition", game, blocks[i], blocks[j]) \
                    == (merged > separate)
