"""Shared-resource detection between agent paths.

Every path node is a micro resource; maximal runs of consecutive nodes
shared with other agents form macro resources.  Pairwise encounters are
classified by how the shared run appears in the two paths: a single node
(crossroad), a same-order run (follower) or an opposite-order run (frontal).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .layout import LayoutGraph

__all__ = [
    "MacroResource",
    "AgentConfiguration",
    "EncounterKind",
    "validate_path",
    "shared_micro",
    "macro_resources",
    "agent_configuration",
    "classify_encounter",
]


class EncounterKind(Enum):
    CROSSROAD = "crossroad"
    FOLLOWER = "follower"
    FRONTAL = "frontal"


@dataclass(frozen=True)
class MacroResource:
    """A maximal run of consecutive shared nodes in the owner's path."""

    nodes: tuple[int, ...]
    owner: int
    sharers: frozenset[int]


@dataclass(frozen=True)
class AgentConfiguration:
    """Current node plus the next element: a node, a macro resource, or
    nothing when the agent sits on its final node."""

    curr: int
    next: int | MacroResource | None

    def flat(self) -> tuple[int, ...]:
        if self.next is None:
            return (self.curr,)
        if isinstance(self.next, MacroResource):
            return (self.curr,) + self.next.nodes
        return (self.curr, self.next)


def validate_path(layout: LayoutGraph, path) -> list[int]:
    """Check the path invariants: non-empty, adjacent hops, no n -> n hop."""
    path = list(path)
    if not path:
        raise ValueError("path must be non-empty")
    for n in path:
        if n not in layout.nodes:
            raise ValueError(f"path references unknown node {n}")
    for a, b in zip(path, path[1:]):
        if a == b:
            raise ValueError(f"path repeats node {a} consecutively")
        if b not in layout.adjacency(a):
            raise ValueError(f"path hop ({a},{b}) is not an arc")
    return path


def shared_micro(p_i, p_j) -> set[int]:
    """Nodes contended by both paths."""
    return set(p_i) & set(p_j)


def macro_resources(owner: int, remaining, others) -> list[MacroResource]:
    """Partition the shared nodes ahead of the owner into maximal runs.

    ``remaining`` starts at the owner's current node, which is excluded from
    the scan: only future nodes are contendable.  ``others`` holds
    (agent-id, remaining-path) pairs as read from in-range sign-boards, so a
    node an agent has already passed no longer counts as shared.
    """
    remaining = list(remaining)
    other_sets = [(aid, set(p)) for aid, p in others]
    runs: list[MacroResource] = []
    run: list[int] = []
    run_sharers: set[int] = set()

    def close_run():
        nonlocal run, run_sharers
        if run:
            runs.append(MacroResource(tuple(run), owner, frozenset(run_sharers)))
        run, run_sharers = [], set()

    for node in remaining[1:]:
        sharers = {aid for aid, nodes in other_sets if node in nodes}
        if sharers:
            run.append(node)
            run_sharers |= sharers
        else:
            close_run()
    close_run()
    return runs


def agent_configuration(remaining, macros) -> AgentConfiguration:
    """Current node plus either the next node or its containing macro run."""
    remaining = list(remaining)
    if len(remaining) == 1:
        return AgentConfiguration(remaining[0], None)
    nxt = remaining[1]
    for macro in macros:
        if nxt in macro.nodes:
            return AgentConfiguration(remaining[0], macro)
    return AgentConfiguration(remaining[0], nxt)


def _longest_common_run(a, b) -> int:
    """Length of the longest contiguous subsequence present in both."""
    best = 0
    for i in range(len(a)):
        for j in range(len(b)):
            k = 0
            while i + k < len(a) and j + k < len(b) and a[i + k] == b[j + k]:
                k += 1
            best = max(best, k)
    return best


def classify_encounter(l_i, l_j) -> EncounterKind | None:
    """Type of a pairwise encounter, None when nothing is shared.

    A same-order common run of two or more nodes means one agent follows the
    other; the same run appearing reversed means they face each other; a lone
    shared node is a crossroad.  Mixed overlaps are resolved toward the
    longer run (a composite encounter should be split per shared run by the
    caller before classification).
    """
    l_i, l_j = list(l_i), list(l_j)
    if not shared_micro(l_i, l_j):
        return None
    same = _longest_common_run(l_i, l_j)
    opposite = _longest_common_run(l_i, list(reversed(l_j)))
    if same < 2 and opposite < 2:
        return EncounterKind.CROSSROAD
    if same >= opposite:
        return EncounterKind.FOLLOWER
    return EncounterKind.FRONTAL
