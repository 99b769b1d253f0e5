"""Safety analyses: sampling constraint, trace checks, stall probes.

The trace checks certify a finished run (no two boards ever share a node,
no two poses ever overlap).  The stall probes answer, from one agent's
local information only, whether it is wedged: a breadth expansion of its
neighbourhood up to depth p-1 (p = floor(R/d)) looks for a free node that a
chain of surrounding agents could cascade into.  A brute-force move-sequence
oracle validates the expansion on small graphs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

from .layout import LayoutGraph, max_agents
from .trace import Trace

__all__ = [
    "Diagnostics",
    "DeadlockReport",
    "SafePathSet",
    "check_sampling_constraint",
    "assert_mutual_exclusion",
    "assert_no_geometric_collision",
    "detect_local_deadlock",
    "detect_local_livelock",
    "deadlock_oracle",
    "validate_scenario_bounds",
]


def check_sampling_constraint(u_max: float, d: float, period: float) -> bool:
    """True iff the protocol runs at least twice per half node dimension.

    An agent at full speed must fit two ticks into the last d/2 before it
    reaches its next node, i.e. period <= (d/2) / (2 * u_max).  A stationary
    agent satisfies the constraint for any period.
    """
    if d <= 0 or period <= 0 or u_max < 0:
        raise ValueError("u_max must be >= 0 and d, period positive")
    if u_max == 0:
        return True
    return period <= (d / 2) / (2 * u_max)


def assert_mutual_exclusion(trace: Trace) -> list[tuple[float, int, tuple[int, ...]]]:
    """Instants at which two boards publish the same current node.

    Empty result certifies node-level mutual exclusion over the whole run.
    """
    current: dict[int, int] = {}
    violations = []
    for event in trace.events:
        if event.kind != "board":
            continue
        node = event.payload[4]
        current[event.agent] = node
        holders = tuple(sorted(a for a, n in current.items() if n == node))
        if len(holders) > 1:
            violations.append((event.time, node, holders))
    return violations


def assert_no_geometric_collision(
    trace: Trace, footprint: float
) -> list[tuple[float, tuple[int, int], float]]:
    """Sampled instants at which two agents sit closer than two footprints."""
    if footprint <= 0:
        raise ValueError("footprint must be positive")
    poses: dict[int, tuple[float, float]] = {}
    violations = []
    for event in trace.events:
        if event.kind != "pose":
            continue
        x, y = event.payload
        poses[event.agent] = (x, y)
        for other, (ox, oy) in poses.items():
            if other == event.agent:
                continue
            dist = math.hypot(x - ox, y - oy)
            if dist < 2 * footprint:
                pair = tuple(sorted((event.agent, other)))
                violations.append((event.time, pair, dist))
    return violations


# -- local stall detection ----------------------------------------------------


@dataclass(frozen=True)
class DeadlockReport:
    """Result of the depth-level expansion around one agent.

    ``levels`` maps a chain label to the node set it expanded to; the root
    level is labelled (0,), deeper sets (0, j, k, ...) by the chain of nodes
    they were entered through.  ``parked`` are goal-parked nodes (G),
    ``surrounded`` the occupied nodes whose whole neighbourhood is parked
    (N_O), ``free`` the discovered free nodes (F).  ``vacatable`` holds
    occupied-by-active nodes left unexpanded at the depth cap; their agents
    get the benefit of the doubt, so they count against a deadlock verdict.
    """

    agent: int
    deadlocked: bool
    free: frozenset[int]
    depth_found: int | None
    p: int
    levels: tuple[tuple[tuple[int, ...], frozenset[int]], ...]
    parked: frozenset[int]
    surrounded: frozenset[int]
    vacatable: frozenset[int]


@dataclass(frozen=True)
class SafePathSet:
    """Maximal blocked-node-free paths of at most p-1 hops from the agent.

    A path of full length p-1 certifies the agent is not trapped on its
    local horizon.  ``applicable`` is False for an agent parked at its goal.
    """

    agent: int
    paths: tuple[tuple[int, ...], ...]
    p: int
    applicable: bool
    parked: frozenset[int]
    surrounded: frozenset[int]

    @property
    def certifies(self) -> bool:
        return self.applicable and any(len(path) == self.p for path in self.paths)


def _occupancy(snapshot):
    """node -> (agent, parked?) from the snapshot's boards."""
    occ = {}
    for aid in sorted(snapshot.boards):
        board = snapshot.boards[aid]
        occ[board.curr] = (aid, board.at_goal)
    return occ


def _depth(radius: float, d: float) -> int:
    if radius <= 0 or d <= 0:
        raise ValueError("radius and node spacing must be positive")
    return int(math.floor(radius / d))


def _expand(layout: LayoutGraph, occ, n0: int, p: int, stop_on_free: bool):
    """Level-wise neighbourhood expansion shared by both stall probes."""
    parked: set[int] = set()
    surrounded: set[int] = set()
    free: set[int] = set()
    vacatable: set[int] = set()
    levels: list[tuple[tuple[int, ...], frozenset[int]]] = []
    depth_found = None

    def classify(members):
        hits = set()
        actives = []
        for n in sorted(members):
            if n not in occ:
                hits.add(n)
            elif occ[n][1]:
                parked.add(n)
            elif n != n0:
                actives.append(n)
        return hits, actives

    frontier = []  # (node-to-expand, entry-node, chain label)
    root = sorted(layout.adjacency(n0))
    levels.append(((0,), frozenset(root)))
    hits, actives = classify(root)
    free |= hits
    if hits:
        depth_found = 0
    expandable = not (hits and stop_on_free)
    if expandable:
        frontier = [(n, n0, (0, n)) for n in actives]

    depth = 0
    while frontier and depth < p - 1:
        depth += 1
        next_frontier = []
        level_free: set[int] = set()
        for node, entry, chain in frontier:
            members = sorted(layout.adjacency(node) - {entry})
            levels.append((chain, frozenset(members)))
            hits, actives = classify(members)
            level_free |= hits
            if all(m in occ and occ[m][1] for m in members):
                surrounded.add(node)
            else:
                for n in actives:
                    next_frontier.append((n, node, chain + (n,)))
        free |= level_free
        if level_free and depth_found is None:
            depth_found = depth
        if level_free and stop_on_free:
            frontier = []
            break
        frontier = next_frontier

    if frontier:
        # Depth cap reached with active occupants left unexplored.
        vacatable = {node for node, _, _ in frontier}
    return parked, surrounded, free, vacatable, levels, depth_found


def detect_local_deadlock(
    snapshot, agent: int, radius: float, layout: LayoutGraph, d: float | None = None
) -> DeadlockReport:
    """Can anything around this agent still move, judged locally?

    Deadlocked means: every neighbour chain within depth p-1 ends in
    goal-parked or fully-surrounded nodes, with no free node anywhere for
    the surrounding agents to cascade into.  A discovered free node (or an
    unexplored active agent at the depth cap) refutes the deadlock.
    """
    if agent not in snapshot.boards:
        raise KeyError(f"unknown agent {agent}")
    d = layout.d if d is None else float(d)
    p = _depth(radius, d)
    n0 = snapshot.boards[agent].curr
    occ = _occupancy(snapshot)
    parked, surrounded, free, vacatable, levels, depth_found = _expand(
        layout, occ, n0, p, stop_on_free=True
    )
    deadlocked = not free and not vacatable
    return DeadlockReport(
        agent=agent,
        deadlocked=deadlocked,
        free=frozenset(free),
        depth_found=depth_found,
        p=p,
        levels=tuple(levels),
        parked=frozenset(parked),
        surrounded=frozenset(surrounded),
        vacatable=frozenset(vacatable),
    )


def detect_local_livelock(
    snapshot, agent: int, radius: float, layout: LayoutGraph, d: float | None = None
) -> SafePathSet:
    """Maximal paths of at most p-1 hops avoiding parked and surrounded nodes.

    The same expansion as the deadlock probe (run to full depth) yields the
    blocked node sets; any simple path from the agent's node that dodges
    them is safe to follow for its length.  Paths come back in lexicographic
    node-id order.  An agent already at its goal gets an empty, inapplicable
    result.
    """
    if agent not in snapshot.boards:
        raise KeyError(f"unknown agent {agent}")
    d = layout.d if d is None else float(d)
    p = _depth(radius, d)
    board = snapshot.boards[agent]
    if board.at_goal:
        return SafePathSet(
            agent=agent, paths=(), p=p, applicable=False,
            parked=frozenset(), surrounded=frozenset(),
        )
    n0 = board.curr
    occ = _occupancy(snapshot)
    parked, surrounded, _, _, _, _ = _expand(layout, occ, n0, p, stop_on_free=False)
    blocked = parked | surrounded

    paths: list[tuple[int, ...]] = []

    def grow(path):
        tail = path[-1]
        extensions = [
            n
            for n in sorted(layout.adjacency(tail))
            if n not in blocked and n not in path
        ]
        if len(path) == p or not extensions:
            paths.append(tuple(path))
            return
        for n in extensions:
            grow(path + [n])

    first = [n for n in sorted(layout.adjacency(n0)) if n not in blocked]
    for n in first:
        grow([n0, n])
    return SafePathSet(
        agent=agent,
        paths=tuple(sorted(paths)),
        p=p,
        applicable=True,
        parked=frozenset(parked),
        surrounded=frozenset(surrounded),
    )


def deadlock_oracle(
    snapshot, agent: int, radius: float, layout: LayoutGraph, d: float | None = None
) -> bool:
    """Exhaustive ground truth for small graphs: True means deadlocked.

    Enumerates every sequence of at most p-1 single-agent moves on the
    subgraph within the communication radius (goal-parked agents and the
    querying agent never move) and reports a deadlock iff no sequence leaves
    a neighbour of the agent's node unoccupied.
    """
    if agent not in snapshot.boards:
        raise KeyError(f"unknown agent {agent}")
    d = layout.d if d is None else float(d)
    p = _depth(radius, d)
    n0 = snapshot.boards[agent].curr
    origin = layout.position(n0)
    subnodes = {
        n
        for n in layout.nodes
        if math.hypot(*(layout.position(n) - origin)) <= radius + 1e-9
    }
    parked_nodes = set()
    movers = []
    for aid in sorted(snapshot.boards):
        board = snapshot.boards[aid]
        if board.curr not in subnodes:
            continue
        if aid == agent:
            continue
        if board.at_goal:
            parked_nodes.add(board.curr)
        else:
            movers.append(aid)

    def vacated(state) -> bool:
        taken = set(state.values()) | parked_nodes | {n0}
        return any(n not in taken for n in layout.adjacency(n0))

    initial = {aid: snapshot.boards[aid].curr for aid in movers}
    frontier = [initial]
    seen = {tuple(sorted(initial.items()))}
    if vacated(initial):
        return False
    for _ in range(max(p - 1, 0)):
        nxt = []
        for state in frontier:
            taken = set(state.values()) | parked_nodes | {n0}
            for aid in movers:
                for target in layout.adjacency(state[aid]):
                    if target not in subnodes or target in taken:
                        continue
                    moved = dict(state)
                    moved[aid] = target
                    key = tuple(sorted(moved.items()))
                    if key in seen:
                        continue
                    seen.add(key)
                    if vacated(moved):
                        return False
                    nxt.append(moved)
        frontier = nxt
        if not frontier:
            break
    return True


# -- scenario admission --------------------------------------------------------


@dataclass
class Diagnostics:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def validate_scenario_bounds(layout: LayoutGraph, agents) -> Diagnostics:
    """Admission checks for a fleet on a layout.

    Errors: colliding starts or goals, a goal inside a critical area, or
    more agents than the smallest room can absorb (one less than its size).
    Warnings: any agent whose sampling period is too slow for its speed.
    """
    diag = Diagnostics()
    agents = list(agents)
    starts: dict[int, int] = {}
    goals: dict[int, int] = {}
    for spec in agents:
        for label, node in (("start", spec.start), ("goal", spec.goal)):
            if node not in layout.nodes:
                diag.errors.append(f"agent {spec.id}: {label} node {node} does not exist")
    for spec in agents:
        if spec.start in starts:
            diag.errors.append(
                f"agents {starts[spec.start]} and {spec.id} share start node {spec.start}"
            )
        starts.setdefault(spec.start, spec.id)
        if spec.goal in goals:
            diag.errors.append(
                f"agents {goals[spec.goal]} and {spec.id} share goal node {spec.goal}"
            )
        goals.setdefault(spec.goal, spec.id)
        for name, ids in layout.criticals.items():
            if spec.goal in ids:
                diag.errors.append(
                    f"agent {spec.id}: goal {spec.goal} lies in critical area {name!r}"
                )
    if not layout.rooms:
        if agents:
            diag.errors.append("layout declares no rooms; the fleet bound is undefined")
    else:
        bound = max_agents(layout)
        if len(agents) > bound:
            diag.errors.append(f"agent count {len(agents)} exceeds bound {bound}")
    for spec in agents:
        if not check_sampling_constraint(spec.max_speed, layout.d, spec.period):
            diag.warnings.append(
                f"agent {spec.id}: period {spec.period} too slow for speed "
                f"{spec.max_speed} at node spacing {layout.d} "
                f"(needs <= {(layout.d / 2) / (2 * spec.max_speed):.6g})"
            )
    return diag


def format_depth_report(report: DeadlockReport) -> str:
    """Human-readable dump of the expansion in the customary notation."""
    lines = [f"p = {report.p}", f"agent {report.agent}"]
    for chain, members in report.levels:
        label = "N_0" if chain == (0,) else f"N_{len(chain) - 1}({', '.join(map(str, chain))})"
        lines.append(f"{label} = {{{', '.join(map(str, sorted(members)))}}}")
    lines.append(f"G = {{{', '.join(map(str, sorted(report.parked)))}}}")
    lines.append(f"N_O = {{{', '.join(map(str, sorted(report.surrounded)))}}}")
    lines.append(f"F = {{{', '.join(map(str, sorted(report.free)))}}}")
    if report.vacatable:
        lines.append(
            f"unexplored active nodes at depth cap: "
            f"{{{', '.join(map(str, sorted(report.vacatable)))}}}"
        )
    lines.append("deadlocked" if report.deadlocked else "no deadlock")
    return "\n".join(lines)
