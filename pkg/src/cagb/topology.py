"""Geometric network model underlying all graphical games.

Nodes are placed in a rectangle (Poisson point process, fixed-count uniform
draws, or explicit fixtures) and connected whenever their Euclidean distance
is at most the connectivity radius.  Graphs are immutable after construction;
edges are always derived from positions, never stored externally.
"""

from __future__ import annotations

import json
import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

NODE_KINDS = ("user", "small-cell", "macro-bs")

# Chunk size for Poisson inversion: exp(-lam) must stay representable.
_POISSON_CHUNK = 500.0


@dataclass(frozen=True)
class Node:
    id: int
    kind: str
    pos: tuple[float, float]

    def __post_init__(self):
        if self.kind not in NODE_KINDS:
            raise ValueError(f"unknown node kind {self.kind!r}")


class NetworkGraph:
    """Immutable geometric graph over a rectangle.

    Adjacency is symmetric, irreflexive, and recomputable bit-identically
    from node positions and the radius (distance <= radius, Euclidean).
    """

    def __init__(self, nodes: Sequence[Node], area: tuple[float, float],
                 radius: float, seed: int | None = None):
        w, h = float(area[0]), float(area[1])
        if w <= 0 or h <= 0:
            raise ValueError(f"degenerate area {area!r}")
        if radius < 0:
            raise ValueError("radius must be >= 0")
        nodes = tuple(nodes)
        for idx, node in enumerate(nodes):
            if node.id != idx:
                raise ValueError("node ids must be dense 0..n-1 in order")
            x, y = node.pos
            if not (0.0 <= x <= w and 0.0 <= y <= h):
                raise ValueError(f"node {idx} position {node.pos} outside area")
        self.nodes = nodes
        self.area = (w, h)
        self.radius = float(radius)
        self.seed = seed
        self._adj = self._derive_edges()

    def _derive_edges(self) -> dict[int, frozenset[int]]:
        n = len(self.nodes)
        adj: dict[int, set[int]] = {i: set() for i in range(n)}
        r = self.radius
        if r > 0:
            positions = [node.pos for node in self.nodes]
            for i in range(n):
                xi, yi = positions[i]
                for j in range(i + 1, n):
                    xj, yj = positions[j]
                    if math.hypot(xi - xj, yi - yj) <= r:
                        adj[i].add(j)
                        adj[j].add(i)
        return {i: frozenset(s) for i, s in adj.items()}

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def node_ids(self) -> range:
        return range(len(self.nodes))

    def adjacent(self, a: int, b: int) -> bool:
        return b in self._adj[a]

    def adj(self, node_id: int) -> frozenset[int]:
        return self._adj[node_id]

    def edge_count(self) -> int:
        return sum(len(s) for s in self._adj.values()) // 2

    def __repr__(self) -> str:
        return (f"NetworkGraph(n={len(self.nodes)}, area={self.area}, "
                f"radius={self.radius}, edges={self.edge_count()})")


def neighbors(g: NetworkGraph, node_id: int) -> set[int]:
    """Ids adjacent to node_id; never contains node_id itself."""
    if node_id not in g._adj:
        raise KeyError(f"unknown node id {node_id}")
    return set(g._adj[node_id])


def coalition_feasible(g: NetworkGraph, members: Iterable[int]) -> bool:
    """True iff the subgraph induced by members is connected."""
    members = set(members)
    if not members:
        raise ValueError("empty member set")
    for m in members:
        if m not in g._adj:
            raise KeyError(f"unknown node id {m}")
    start = next(iter(members))
    seen = {start}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for nxt in g._adj[cur] & members:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen == members


def hop_distance(g: NetworkGraph, a: int, b: int,
                 within: Iterable[int]) -> int | None:
    """Shortest-path hop count between a and b inside the induced subgraph.

    Returns None when b is unreachable from a within the member set.
    """
    within = set(within)
    if a not in within or b not in within:
        raise ValueError("endpoints must belong to the member set")
    if a == b:
        return 0
    dist = {a: 0}
    queue = deque([a])
    while queue:
        cur = queue.popleft()
        for nxt in g._adj[cur] & within:
            if nxt not in dist:
                dist[nxt] = dist[cur] + 1
                if nxt == b:
                    return dist[nxt]
                queue.append(nxt)
    return None


def _poisson_draw(rng: random.Random, lam: float) -> int:
    # Inversion of the CDF; additivity splits large rates into chunks.
    total = 0
    while lam > _POISSON_CHUNK:
        total += _poisson_draw(rng, _POISSON_CHUNK)
        lam -= _POISSON_CHUNK
    u = rng.random()
    p = math.exp(-lam)
    cdf = p
    k = 0
    while u > cdf:
        k += 1
        p *= lam / k
        cdf += p
    return total + k


def generate_ppp(intensity: float, area: tuple[float, float], radius: float,
                 kind: str = "user", seed: int = 0) -> NetworkGraph:
    """Poisson point process: count ~ Poisson(intensity * |area|), positions
    i.i.d. uniform over the rectangle.  Deterministic in seed."""
    if intensity < 0:
        raise ValueError("intensity must be >= 0")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    w, h = float(area[0]), float(area[1])
    if w <= 0 or h <= 0:
        raise ValueError(f"degenerate area {area!r}")
    rng = random.Random(seed)
    n = _poisson_draw(rng, intensity * w * h)
    nodes = [Node(i, kind, (rng.random() * w, rng.random() * h))
             for i in range(n)]
    return NetworkGraph(nodes, (w, h), radius, seed=seed)


def generate_uniform(n: int, area: tuple[float, float], radius: float,
                     kind: str = "user", seed: int = 0) -> NetworkGraph:
    """Fixed node count with uniform positions (PPP conditioned on count)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    w, h = float(area[0]), float(area[1])
    rng = random.Random(seed)
    nodes = [Node(i, kind, (rng.random() * w, rng.random() * h))
             for i in range(n)]
    return NetworkGraph(nodes, (w, h), radius, seed=seed)


def generate_fixed(positions: Sequence[tuple[float, float]], radius: float,
                   kinds: str | Sequence[str] = "user",
                   area: tuple[float, float] | None = None) -> NetworkGraph:
    """Deterministic fixture graph with exactly the given node positions.

    Duplicate coordinates are allowed; an out-of-area position is rejected.
    With area=None the bounding rectangle of the positions is used.
    """
    if isinstance(kinds, str):
        kinds = [kinds] * len(positions)
    if len(kinds) != len(positions):
        raise ValueError("kinds must match positions in length")
    if area is None:
        w = max((p[0] for p in positions), default=1.0)
        h = max((p[1] for p in positions), default=1.0)
        area = (max(w, 1.0), max(h, 1.0))
    nodes = [Node(i, k, (float(x), float(y)))
             for i, ((x, y), k) in enumerate(zip(positions, kinds))]
    return NetworkGraph(nodes, area, radius)


def to_json(g: NetworkGraph) -> str:
    """Serialize a graph fixture; edges are derived, never stored."""
    doc = {
        "area": [g.area[0], g.area[1]],
        "radius": g.radius,
        "nodes": [{"id": n.id, "kind": n.kind, "pos": [n.pos[0], n.pos[1]]}
                  for n in g.nodes],
    }
    return json.dumps(doc)


def from_json(text: str) -> NetworkGraph:
    doc = json.loads(text)
    nodes = [Node(int(n["id"]), n["kind"], (float(n["pos"][0]), float(n["pos"][1])))
             for n in doc["nodes"]]
    return NetworkGraph(nodes, tuple(doc["area"]), float(doc["radius"]))
