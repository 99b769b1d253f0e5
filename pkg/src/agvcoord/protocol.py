"""Per-agent cooperation manager.

Each agent cycles through four maneuvers: request the next node (Req), wait
for it (W), move onto it (M), or replan the path (Rep).  Decisions use only
the agent's own board and the boards read from neighbours in range, so the
whole protocol is decentralized.  Critical areas (doors, one-lane corridors)
are arbitrated as a unit with a waiting-time counter; everything else is
arbitrated per node on static priorities with agent id as tie-break.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .layout import LayoutGraph, WeightedAdjacency, shortest_path, path_cost
from .signboard import FsmState, Lecture, SignBoard

__all__ = [
    "ManagerState",
    "CompetitionOutcome",
    "RequestOutcome",
    "resolve_priority",
    "request_step",
    "wait_step",
    "move_step",
    "speed_update",
    "replan",
    "signboard_commit",
]


@dataclass(frozen=True)
class ManagerState:
    """Internal state of the cooperation manager (never published).

    ``t_rep`` counts ticks spent blocked on a non-critical node; once it
    exceeds ``replan_threshold`` the wait escalates to a replan.  ``timer``
    mirrors the board's critical-resource waiting counter.
    """

    fsm: FsmState = FsmState.REQ
    t_rep: int = 0
    replan_threshold: int = 10
    timer: int = 0

    def reset_counters(self) -> "ManagerState":
        return replace(self, t_rep=0, timer=0)


@dataclass(frozen=True)
class CompetitionOutcome:
    winner: int
    basis: str  # "priority" | "id-tiebreak" | "timer"
    competitors: tuple[int, ...] = ()
    node: int | None = None


@dataclass(frozen=True)
class RequestOutcome:
    state: FsmState
    mgr: ManagerState
    competition: CompetitionOutcome | None = None


def resolve_priority(competitors) -> CompetitionOutcome:
    """Winner among (agent-id, priority) pairs: max priority, then min id."""
    competitors = list(competitors)
    if not competitors:
        raise ValueError("competition needs at least one competitor")
    top = max(pr for _, pr in competitors)
    tied = sorted(aid for aid, pr in competitors if pr == top)
    basis = "priority" if len(tied) == 1 else "id-tiebreak"
    return CompetitionOutcome(
        winner=tied[0], basis=basis, competitors=tuple(sorted(a for a, _ in competitors))
    )


def _entry_requesters(lect: Lecture, region) -> list[SignBoard]:
    """Boards whose published next node lies in the given node set."""
    return [b for b in lect.boards if b.next is not None and b.next in region]


def request_step(
    board: SignBoard, mgr: ManagerState, lect: Lecture, layout: LayoutGraph
) -> RequestOutcome:
    """Decide the next maneuver while requesting the next node.

    Non-critical node: a goal-parked occupant forces a replan, an active
    occupant forces a wait, otherwise the node is contended on priority with
    every in-range agent publishing the same next node.  Critical node: the
    whole critical region is contended; occupancy forces a wait, otherwise
    priorities decide while all waiting timers are zero and the largest
    timer decides once any is running (ties fall back to priority then id).

    Waits on a non-critical node advance t_rep whether they come from a lost
    competition or an occupied node: without the occupied case counting,
    mutual waits between active agents would never escalate to replanning
    and the fleet could freeze.
    """
    if mgr.fsm is not FsmState.REQ:
        raise ValueError(f"request_step requires Req, got {mgr.fsm}")
    if board.next is None:
        raise ValueError("request_step requires a next node")

    target = board.next
    region = layout.critical_region(target)

    if not region:
        occupant = lect.occupant_of(target)
        if occupant is not None:
            if occupant.at_goal:
                # Parked forever: waiting is pointless, find another way.
                return RequestOutcome(FsmState.REP, replace(mgr, fsm=FsmState.REP))
            return RequestOutcome(
                FsmState.W, replace(mgr, fsm=FsmState.W, t_rep=mgr.t_rep + 1)
            )
        rivals = [(b.id, b.pr) for b in lect.boards if b.next == target]
        if not rivals:
            return RequestOutcome(FsmState.M, replace(mgr, fsm=FsmState.M, t_rep=0))
        outcome = resolve_priority(rivals + [(board.id, board.pr)])
        outcome = replace(outcome, node=target)
        if outcome.winner == board.id:
            return RequestOutcome(
                FsmState.M, replace(mgr, fsm=FsmState.M, t_rep=0), outcome
            )
        return RequestOutcome(
            FsmState.W, replace(mgr, fsm=FsmState.W, t_rep=mgr.t_rep + 1), outcome
        )

    # Critical region: arbitrate entry to the whole node set.  A winner's
    # timer stays published until it physically enters the region (the node
    # entry resets it); wiping it at the grant would let a later reader see
    # an all-zero field and issue itself a second, conflicting grant.
    if board.curr in region:
        # Moving within a region already held: outsiders cannot contest it
        # (their entry is barred while any node of the region is occupied).
        return RequestOutcome(FsmState.M, replace(mgr, fsm=FsmState.M, t_rep=0))
    sharers = [b for b in lect.boards if set(b.nodes) & region]
    if not sharers:
        return RequestOutcome(FsmState.M, replace(mgr, fsm=FsmState.M, t_rep=0))
    taken = any(
        b.curr in region
        or (b.status is FsmState.M and b.next is not None and b.next in region)
        for b in sharers
    )
    if taken:
        return RequestOutcome(
            FsmState.W, replace(mgr, fsm=FsmState.W, timer=mgr.timer + 1)
        )
    requesters = _entry_requesters(lect, region)
    if all(b.timer == 0 for b in sharers) and mgr.timer == 0:
        outcome = resolve_priority(
            [(b.id, b.pr) for b in requesters] + [(board.id, board.pr)]
        )
        outcome = replace(outcome, node=target)
        if outcome.winner == board.id:
            return RequestOutcome(
                FsmState.M, replace(mgr, fsm=FsmState.M, t_rep=0), outcome
            )
        return RequestOutcome(
            FsmState.W, replace(mgr, fsm=FsmState.W, timer=mgr.timer + 1), outcome
        )
    # Timer competition: longest wait first, then priority, then id.
    entries = [(b.timer, b.pr, b.id) for b in requesters]
    entries.append((mgr.timer, board.pr, board.id))
    best = max(entries, key=lambda e: (e[0], e[1], -e[2]))
    outcome = CompetitionOutcome(
        winner=best[2],
        basis="timer",
        competitors=tuple(sorted(e[2] for e in entries)),
        node=target,
    )
    if best[2] == board.id:
        return RequestOutcome(
            FsmState.M, replace(mgr, fsm=FsmState.M, t_rep=0), outcome
        )
    return RequestOutcome(
        FsmState.W, replace(mgr, fsm=FsmState.W, timer=mgr.timer + 1), outcome
    )


def wait_step(mgr: ManagerState) -> FsmState:
    """Leave W: back to Req, or escalate to Rep once t_rep runs too long."""
    if mgr.fsm is not FsmState.W:
        raise ValueError(f"wait_step requires W, got {mgr.fsm}")
    if mgr.t_rep > mgr.replan_threshold:
        return FsmState.REP
    return FsmState.REQ


def move_step(pose, board: SignBoard, layout: LayoutGraph, lect: Lecture) -> FsmState:
    """Return Req exactly when the agent has entered its next node's area.

    Entry is deferred while another board still publishes that node as its
    current one: committing the entry then would put two agents on the same
    node.  The deferral can only last the occupant's exit (the speed law
    already holds the incomer at the occupant's published speed).
    """
    if board.status is not FsmState.M:
        raise ValueError("move_step requires an M-status board")
    if board.next is None:
        return FsmState.REQ
    target = layout.position(board.next)
    if math.hypot(pose[0] - target[0], pose[1] - target[1]) > layout.d / 2:
        return FsmState.M
    occupant = lect.occupant_of(board.next)
    if occupant is not None and occupant.id != board.id:
        return FsmState.M
    return FsmState.REQ


def speed_update(
    state: FsmState,
    direction,
    lect: Lecture,
    next_node: int | None,
    next_pos,
    d: float,
    u_max: float,
    prev_vel,
) -> tuple[float, float]:
    """Velocity for the new state.

    Waiting and replanning stop the vehicle; a re-request keeps the previous
    velocity so a rolling agent does not brake between grants.  While moving,
    the speed is the maximum unless the won node is not yet clear: an agent
    still physically inside its area caps the speed at that agent's published
    speed (zero if the node is still the occupant's current node), which is
    what keeps the follower gap from closing.
    """
    if state in (FsmState.W, FsmState.REP):
        return (0.0, 0.0)
    if state is FsmState.REQ:
        return (float(prev_vel[0]), float(prev_vel[1]))

    magnitude = u_max
    if next_node is not None:
        holder = lect.occupant_of(next_node)
        if holder is not None:
            magnitude = 0.0
        else:
            inside = [
                v.board.speed
                for v in lect.views
                if math.hypot(v.pose[0] - next_pos[0], v.pose[1] - next_pos[1]) <= d / 2
            ]
            if inside:
                magnitude = min(u_max, min(inside))
    return (magnitude * float(direction[0]), magnitude * float(direction[1]))


def _penalized_weights(
    layout: LayoutGraph, curr: int, lect: Lecture
) -> WeightedAdjacency:
    """Private weight copy with neighbours-of-curr on foreign paths made dear.

    For a neighbour lying on an in-range agent's remaining path, every arc of
    that path from the neighbour to its end gains weight, largest at the
    neighbour and shrinking linearly to 1 at the path's end.
    """
    weights = WeightedAdjacency.defaults(layout).copy()
    for n in sorted(layout.adjacency(curr)):
        for b in lect.boards:
            nodes = list(b.nodes)
            if n not in nodes:
                continue
            tail = nodes[nodes.index(n):]
            arcs = list(zip(tail, tail[1:]))
            span = len(arcs)
            for k, (a, c) in enumerate(arcs, start=1):
                weights.add(a, c, span - k + 1)
    return weights


def replan(
    layout: LayoutGraph, curr: int, goal: int, lect: Lecture
) -> list[int] | None:
    """New path from curr to goal dodging the neighbourhood's traffic.

    Free neighbours are tried first; only when every neighbour is occupied
    are paths routed through occupied ones.  Candidates are compared on the
    penalized weights, ties broken to the lexicographically smallest node
    sequence.  None means the goal is unreachable through every neighbour.
    """
    if curr == goal:
        raise ValueError("replan requires curr != goal")
    occupied_by = {b.curr for b in lect.boards}
    nbrs = sorted(layout.adjacency(curr))
    if not nbrs:
        return None
    free = [n for n in nbrs if n not in occupied_by]
    pool = free if free else nbrs
    weights = _penalized_weights(layout, curr, lect)

    best: tuple[float, tuple[int, ...]] | None = None
    for n in pool:
        tail = shortest_path(layout, weights, n, goal)
        if tail is None:
            continue
        candidate = [curr] + tail
        cost = weights.weight(curr, n) + path_cost(weights, tail)
        key = (cost, tuple(candidate))
        if best is None or key < best:
            best = key
    if best is None:
        return None
    return list(best[1])


def signboard_commit(
    state: FsmState,
    board: SignBoard,
    mgr: ManagerState,
    velocity,
    replanned=None,
    entered: bool = False,
) -> SignBoard:
    """Publish the decoder's result on the agent's board.

    Req only refreshes the status; W and Rep stop the vehicle, with Rep also
    swapping in the freshly planned path; M publishes the commanded velocity
    and, on entering the next node's area, shifts the path left by one so the
    previous node is released.
    """
    vel = (float(velocity[0]), float(velocity[1]))
    if state is FsmState.REQ:
        if entered:
            # The move ended on the next node: release the previous one.
            nodes = board.nodes[1:]
            return replace(
                board,
                status=FsmState.REQ,
                vel=vel,
                nodes=nodes,
                prev=board.curr,
                curr=nodes[0],
                next=nodes[1] if len(nodes) > 1 else None,
                timer=0,
            )
        return board.with_status(FsmState.REQ, vel=vel, timer=mgr.timer)
    if state is FsmState.W:
        return board.with_status(FsmState.W, vel=(0.0, 0.0), timer=mgr.timer)
    if state is FsmState.REP:
        if replanned is None:
            raise ValueError("Rep commit requires the replanned path")
        nodes = tuple(replanned)
        return replace(
            board,
            status=FsmState.REP,
            vel=(0.0, 0.0),
            nodes=nodes,
            curr=nodes[0],
            next=nodes[1] if len(nodes) > 1 else None,
            timer=mgr.timer,
        )
    return board.with_status(FsmState.M, vel=vel, timer=mgr.timer)
