"""Experiment execution: seeded cells, deterministic row ordering, atomic
CSV/JSONL output, and the oracle-verification mode."""

from __future__ import annotations

import csv
import json
import logging
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..engine import (enumerate_stable_partitions, find_blocking_move,
                      run_until_stable, total_utility)
from ..partition import Partition
from ..scenarios import auction as auction_mod
from ..scenarios import caching as caching_mod
from ..scenarios import lcg as lcg_mod
from ..seeds import derive_seed
from ..topology import generate_uniform
from .config import (AuctionConfig, CachingConfig, ConfigError,
                     ExperimentConfig, LcgConfig, parse_config)

log = logging.getLogger("cagb.runner")

COLUMNS = {
    "caching": ["seed", "order", "n_players", "mean_cost", "total_cost",
                "n_coalitions", "max_coalition_size", "iterations", "status"],
    "auction": ["algorithm", "n_buyers", "seed", "selling_ratio",
                "satisfaction", "revenue"],
    "lcg": ["seed", "K", "iterations", "final_potential", "collision_free"],
}


def columns_for(cfg: ExperimentConfig, timings: bool = False) -> list[str]:
    cols = list(COLUMNS[cfg.scenario])
    if timings:
        cols.append("wall_ms")
    return cols


def build_cells(cfg: ExperimentConfig) -> list[tuple]:
    """Deterministic cell list; output rows follow this order exactly."""
    if isinstance(cfg, CachingConfig):
        return [(seed, order) for seed in cfg.seeds for order in cfg.orders]
    if isinstance(cfg, AuctionConfig):
        return [(n, seed, alg) for n in cfg.buyer_counts for seed in cfg.seeds
                for alg in auction_mod.ALGORITHMS]
    if isinstance(cfg, LcgConfig):
        return [(seed,) for seed in cfg.seeds]
    raise ConfigError(f"unknown scenario {cfg!r}")


def _caching_setup(cfg: CachingConfig, seed: int):
    graph = generate_uniform(cfg.n_players, cfg.area, cfg.radius,
                             "small-cell", derive_seed(seed, "topology"))
    catalog = caching_mod.ContentCatalog.uniform(cfg.catalog_size,
                                                 cfg.content_size_mb)
    demands = caching_mod.generate_demands(graph, catalog, cfg.zipf_skew,
                                           cfg.demand_per_player,
                                           derive_seed(seed, "demand"))
    params = caching_mod.CachingParams(cfg.c_bs, cfg.c_share, cfg.zipf_skew)
    game = caching_mod.build_caching_game(graph, demands, catalog, params,
                                          mc_seed=derive_seed(seed, "shapley"))
    return graph, game


def _caching_cell(cfg: CachingConfig, cell: tuple) -> dict:
    seed, order = cell
    graph, game = _caching_setup(cfg, seed)
    if order == "none":
        partition = Partition.singletons(cfg.n_players)
        iterations, status = 0, "baseline"
    else:
        partition, trace = run_until_stable(
            game, graph, order, cfg.dynamics,
            derive_seed(seed, "dynamics", order), cfg.max_iters)
        iterations, status = trace.iterations, trace.status
    total_cost = -total_utility(game, partition)
    return {
        "seed": seed,
        "order": order,
        "n_players": cfg.n_players,
        "mean_cost": total_cost / cfg.n_players,
        "total_cost": total_cost,
        "n_coalitions": len(partition),
        "max_coalition_size": max(len(c) for c in partition),
        "iterations": iterations,
        "status": status,
    }


def _auction_cell(cfg: AuctionConfig, cell: tuple) -> dict:
    n_buyers, seed, algorithm = cell
    return auction_mod.experiment_cell(
        algorithm, n_buyers, seed, n_channels=cfg.n_channels,
        ask_range=cfg.ask_range, valuation_range=cfg.valuation_range,
        demand_max=cfg.demand_max, area=cfg.area,
        interference_radius=cfg.interference_radius, max_iters=cfg.max_iters)


def _lcg_cell(cfg: LcgConfig, cell: tuple) -> dict:
    (seed,) = cell
    graph = generate_uniform(cfg.n_players, cfg.area, cfg.radius, "user",
                             derive_seed(seed, "topology"))
    state, trace = lcg_mod.best_response_dynamics(
        graph, cfg.channels, derive_seed(seed, "dynamics"), cfg.max_iters)
    return {
        "seed": seed,
        "K": cfg.channels,
        "iterations": trace.iterations,
        "final_potential": trace.potentials[-1],
        "collision_free": lcg_mod.collision_free(state, graph),
    }


def execute_cell(cfg: ExperimentConfig, cell: tuple,
                 timings: bool = False) -> dict:
    start = time.perf_counter()
    if isinstance(cfg, CachingConfig):
        row = _caching_cell(cfg, cell)
    elif isinstance(cfg, AuctionConfig):
        row = _auction_cell(cfg, cell)
    else:
        row = _lcg_cell(cfg, cell)
    if timings:
        row["wall_ms"] = (time.perf_counter() - start) * 1000.0
    return row


def execute_config(cfg: ExperimentConfig, jobs: int = 1,
                   timings: bool = False) -> tuple[list[str], list[dict]]:
    """Run every cell; rows come back in deterministic cell order no matter
    how many worker threads completed them."""
    cells = build_cells(cfg)
    log.info("executing %d cells for scenario %s", len(cells), cfg.scenario)
    if jobs > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda c: execute_cell(cfg, c, timings), cells))
    else:
        rows = [execute_cell(cfg, cell, timings) for cell in cells]
    return columns_for(cfg, timings), rows


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_csv(columns: list[str], rows: list[dict]) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(columns)
    for row in rows:
        writer.writerow([row[c] for c in columns])
    return buf.getvalue()


def render_jsonl(columns: list[str], rows: list[dict]) -> str:
    lines = [json.dumps({c: row[c] for c in columns}) for row in rows]
    return "\n".join(lines) + ("\n" if lines else "")


def write_output(columns: list[str], rows: list[dict], path: str | Path,
                 fmt: str = "csv") -> Path:
    path = Path(path)
    text = render_jsonl(columns, rows) if fmt == "jsonl" else render_csv(columns, rows)
    _atomic_write(path, text)
    return path


def default_out(cfg: ExperimentConfig, fmt: str = "csv") -> str:
    ext = "jsonl" if fmt == "jsonl" else "csv"
    return cfg.out or f"{cfg.scenario}_metrics.{ext}"


def run_config(cfg: ExperimentConfig, out: str | None = None, jobs: int = 1,
               fmt: str = "csv", timings: bool = False) -> Path:
    columns, rows = execute_config(cfg, jobs=jobs, timings=timings)
    return write_output(columns, rows, out or default_out(cfg, fmt), fmt)


# ---------------------------------------------------------------------------
# verification mode

VERIFY_PLAYER_CAP = 7


@dataclass
class VerifyReport:
    checked: int = 0
    stable_runs: int = 0
    failures: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def verify_config(cfg: ExperimentConfig) -> VerifyReport:
    """Cross-check every stable-status run against the brute-force stable
    set for its order.  Caching scenario only, small player counts only."""
    if not isinstance(cfg, CachingConfig):
        raise ConfigError("verify supports the caching scenario only")
    if cfg.n_players > VERIFY_PLAYER_CAP:
        raise ConfigError(
            f"n_players={cfg.n_players} is too large for oracle enumeration "
            f"(cap {VERIFY_PLAYER_CAP})")
    if cfg.dynamics == "merge-split":
        raise ConfigError(
            "verify requires switch dynamics: merge-split stability is not "
            "the single-move stability the oracle enumerates")
    report = VerifyReport()
    for seed in cfg.seeds:
        graph, game = _caching_setup(cfg, seed)
        for order in cfg.orders:
            if order == "none":
                continue
            report.checked += 1
            partition, trace = run_until_stable(
                game, graph, order, cfg.dynamics,
                derive_seed(seed, "dynamics", order), cfg.max_iters)
            if trace.status != "stable":
                continue
            report.stable_runs += 1
            oracle = enumerate_stable_partitions(game, graph, order)
            if partition not in oracle:
                witness = find_blocking_move(game, graph, partition, order)
                report.failures.append({
                    "seed": seed,
                    "order": order,
                    "partition": partition.canonical_str(),
                    "witness": witness.describe() if witness else "<none>",
                })
    return report


# ---------------------------------------------------------------------------
# parameter sweeps

def sweep_config(base: dict, key: str, values: list, jobs: int = 1,
                 timings: bool = False) -> tuple[list[str], list[dict]]:
    """One run per value of `key`, rows concatenated with a sweep_value
    column.  Each per-value config must validate against the schema."""
    if not isinstance(base, dict):
        raise ConfigError("config must be a JSON object")
    if key not in base and key not in _schema_keys(base):
        raise ConfigError(f"{key}: not a key of the {base.get('scenario')} schema")
    columns: list[str] | None = None
    all_rows: list[dict] = []
    for value in values:
        doc = dict(base)
        doc[key] = value
        cfg = parse_config(doc)
        cols, rows = execute_config(cfg, jobs=jobs, timings=timings)
        if columns is None:
            columns = cols + ["sweep_value"]
        for row in rows:
            row = dict(row)
            row["sweep_value"] = value
            all_rows.append(row)
    return columns or ["sweep_value"], all_rows


def _schema_keys(base: dict) -> set[str]:
    scenario = base.get("scenario")
    model = {"caching": CachingConfig, "auction": AuctionConfig,
             "lcg": LcgConfig}.get(scenario)
    if model is None:
        raise ConfigError(f"scenario: unknown scenario {scenario!r}")
    return set(model.model_fields)
