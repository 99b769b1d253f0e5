"""Graph model of a discretized industrial floor.

Nodes are small areas of the plant (discs of diameter ``d``), arcs are the
traversable connections between them.  Node sets are grouped into rooms
(wide regions) and critical areas (doors, one-lane corridors) because the
motion protocol treats the two differently.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Node",
    "LayoutGraph",
    "WeightedAdjacency",
    "LayoutError",
    "load_layout",
    "neighbours",
    "shortest_path",
    "min_room_size",
    "max_agents",
]

# Geometry must match a declared node spacing to within this many meters.
SPACING_TOL = 1e-9


class LayoutError(ValueError):
    """Raised when a layout fails parsing or validation."""


@dataclass(frozen=True)
class Node:
    id: int
    position: np.ndarray  # shape (2,), meters in the global frame

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        if pos.shape != (2,) or not np.all(np.isfinite(pos)):
            raise LayoutError(f"node {self.id}: position must be a finite 2-vector")
        object.__setattr__(self, "position", pos)
        if not isinstance(self.id, int) or self.id < 0:
            raise LayoutError(f"node id {self.id!r} must be a non-negative integer")


class LayoutGraph:
    """Immutable plant graph with rooms, critical areas and node spacing d.

    ``rooms`` and ``criticals`` are name -> frozenset-of-node-ids mappings.
    ``d`` is the maximum Euclidean distance between arc-connected nodes;
    a layout may pin it explicitly, in which case the stated value has to
    agree with the geometry to within SPACING_TOL.
    """

    def __init__(self, nodes, arcs, rooms, criticals, d=None):
        self.nodes: dict[int, Node] = {}
        for node in nodes:
            if node.id in self.nodes:
                raise LayoutError(f"duplicate node id {node.id}")
            self.nodes[node.id] = node

        self.arcs: frozenset[frozenset[int]] = frozenset(
            frozenset(a) for a in arcs
        )
        for arc in self.arcs:
            pair = sorted(arc)
            if len(pair) != 2:
                raise LayoutError(f"self-loop arc ({pair[0]},{pair[0]}) is not allowed")
            for end in pair:
                if end not in self.nodes:
                    raise LayoutError(
                        f"arc ({pair[0]},{pair[1]}) references unknown node {end}"
                    )

        self.rooms: dict[str, frozenset[int]] = {
            name: frozenset(ids) for name, ids in rooms.items()
        }
        self.criticals: dict[str, frozenset[int]] = {
            name: frozenset(ids) for name, ids in criticals.items()
        }
        for kind, regions in (("room", self.rooms), ("critical", self.criticals)):
            for name, ids in regions.items():
                for n in ids:
                    if n not in self.nodes:
                        raise LayoutError(f"{kind} {name!r} references unknown node {n}")

        seen: dict[int, str] = {}
        for name, ids in self.rooms.items():
            overlap = [n for n in ids if n in seen]
            if overlap:
                raise LayoutError(
                    f"rooms {seen[overlap[0]]!r} and {name!r} overlap at node {overlap[0]}"
                )
            for n in ids:
                seen[n] = name

        covered = set().union(*self.rooms.values()) if self.rooms else set()
        covered |= set().union(*self.criticals.values()) if self.criticals else set()
        for n in self.nodes:
            if n not in covered:
                raise LayoutError(f"node {n} belongs to no room or critical area")

        self._adj: dict[int, frozenset[int]] = {}
        adj: dict[int, set[int]] = {n: set() for n in self.nodes}
        for arc in self.arcs:
            a, b = sorted(arc)
            adj[a].add(b)
            adj[b].add(a)
        self._adj = {n: frozenset(k) for n, k in adj.items()}

        computed = 0.0
        for arc in self.arcs:
            a, b = sorted(arc)
            computed = max(
                computed,
                float(np.linalg.norm(self.nodes[a].position - self.nodes[b].position)),
            )
        if d is None:
            if not self.arcs:
                raise LayoutError("node spacing d is undefined for a layout with no arcs")
            self.d = computed
        else:
            d = float(d)
            if d <= 0 or not math.isfinite(d):
                raise LayoutError(f"declared node spacing d={d} must be positive")
            if self.arcs and abs(d - computed) > SPACING_TOL:
                raise LayoutError(
                    f"declared node spacing d={d} disagrees with geometry "
                    f"(max arc length {computed!r})"
                )
            self.d = d

        self._critical_union: frozenset[int] = (
            frozenset().union(*self.criticals.values()) if self.criticals else frozenset()
        )
        # Stable id ordering shared by every weight matrix over this layout.
        self.node_order: tuple[int, ...] = tuple(sorted(self.nodes))
        self._index = {n: i for i, n in enumerate(self.node_order)}

    def position(self, n: int) -> np.ndarray:
        return self.nodes[n].position

    def adjacency(self, n: int) -> frozenset[int]:
        if n not in self.nodes:
            raise LayoutError(f"unknown node id {n}")
        return self._adj[n]

    def is_critical(self, n: int) -> bool:
        return n in self._critical_union

    def critical_region(self, n: int) -> frozenset[int]:
        """Union of all critical areas containing node n (empty if none)."""
        if not self.is_critical(n):
            return frozenset()
        return frozenset().union(
            *(ids for ids in self.criticals.values() if n in ids)
        )

    def index_of(self, n: int) -> int:
        return self._index[n]


class WeightedAdjacency:
    """Symmetric arc-weight matrix; absent arcs are +inf, default weight 1."""

    def __init__(self, layout: LayoutGraph, matrix: np.ndarray | None = None):
        self.layout = layout
        n = len(layout.node_order)
        if matrix is None:
            m = np.full((n, n), np.inf)
            for arc in layout.arcs:
                a, b = sorted(arc)
                i, j = layout.index_of(a), layout.index_of(b)
                m[i, j] = m[j, i] = 1.0
            self.matrix = m
        else:
            self.matrix = matrix

    @classmethod
    def defaults(cls, layout: LayoutGraph) -> "WeightedAdjacency":
        return cls(layout)

    def copy(self) -> "WeightedAdjacency":
        return WeightedAdjacency(self.layout, self.matrix.copy())

    def weight(self, a: int, b: int) -> float:
        return float(self.matrix[self.layout.index_of(a), self.layout.index_of(b)])

    def add(self, a: int, b: int, increment: float) -> None:
        i, j = self.layout.index_of(a), self.layout.index_of(b)
        if not np.isfinite(self.matrix[i, j]):
            raise LayoutError(f"cannot weight non-existent arc ({a},{b})")
        self.matrix[i, j] += increment
        self.matrix[j, i] += increment


def load_layout(text: str) -> LayoutGraph:
    """Parse layout sections of a scenario document (see scenario module)."""
    from .scenario import parse_scenario_text

    return parse_scenario_text(text, require_agents=False).layout


def neighbours(g: LayoutGraph, n: int) -> frozenset[int]:
    """Node ids arc-connected to n."""
    return g.adjacency(n)


def shortest_path(g: LayoutGraph, w: WeightedAdjacency, start: int, goal: int):
    """Minimum-total-weight path from start to goal, or None if unreachable.

    Equal-cost ties are broken toward the lexicographically smallest node-id
    sequence so that replanning is reproducible run to run.
    """
    for n in (start, goal):
        if n not in g.nodes:
            raise LayoutError(f"unknown node id {n}")
    if start == goal:
        return [start]
    # Dijkstra over (cost, path) labels: all weights are >= 1, so the first
    # pop of a node carries its lexicographically smallest min-cost path.
    heap = [(0.0, (start,))]
    done: set[int] = set()
    while heap:
        cost, path = heapq.heappop(heap)
        tail = path[-1]
        if tail in done:
            continue
        if tail == goal:
            return list(path)
        done.add(tail)
        for nxt in sorted(g.adjacency(tail)):
            if nxt in done:
                continue
            heapq.heappush(heap, (cost + w.weight(tail, nxt), path + (nxt,)))
    return None


def path_cost(w: WeightedAdjacency, path) -> float:
    return sum(w.weight(a, b) for a, b in zip(path, path[1:]))


def min_room_size(g: LayoutGraph) -> int:
    """Cardinality of the smallest room."""
    if not g.rooms:
        raise LayoutError("layout declares no rooms")
    return min(len(ids) for ids in g.rooms.values())


def max_agents(g: LayoutGraph) -> int:
    """Fleet-size bound: one less than the smallest room."""
    return min_room_size(g) - 1
