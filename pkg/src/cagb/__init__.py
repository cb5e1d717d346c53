"""Coalition-based group buying simulator for dense small-cell networks."""

__version__ = "0.1.0"

from .engine import (GameSpec, Move, Trace, approves, enumerate_stable_partitions,
                     is_stable, merge_step, run_until_stable, split_step,
                     swap_step, switch_step)
from .partition import Partition
from .shapley import TUGame, shapley_exact, shapley_montecarlo
from .topology import (NetworkGraph, Node, coalition_feasible, generate_fixed,
                       generate_ppp, generate_uniform, hop_distance, neighbors)

__all__ = [
    "__version__",
    "GameSpec", "Move", "Trace", "approves", "enumerate_stable_partitions",
    "is_stable", "merge_step", "run_until_stable", "split_step", "swap_step",
    "switch_step", "Partition", "TUGame", "shapley_exact", "shapley_montecarlo",
    "NetworkGraph", "Node", "coalition_feasible", "generate_fixed",
    "generate_ppp", "generate_uniform", "hop_distance", "neighbors",
]
