"""Per-agent sign-boards: the only channel agents communicate through.

Each agent owns exactly one board and republishes it at every protocol
tick; any agent within the communication radius can read a frozen copy.
There is no other shared memory and no synchronized clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

__all__ = ["FsmState", "SignBoard", "NeighbourView", "Lecture", "publish", "read_neighbours"]


class FsmState(Enum):
    REQ = "Req"
    W = "W"
    M = "M"
    REP = "Rep"


@dataclass(frozen=True)
class SignBoard:
    """Published record of one agent (field names follow the wire format).

    ``nodes`` is the remaining path, so ``curr`` is its first element and
    ``next`` its second (None once the agent sits on its final node).
    ``timer`` counts protocol ticks spent waiting on a critical resource.
    """

    id: int
    pr: int
    status: FsmState
    vel: tuple[float, float]
    nodes: tuple[int, ...]
    curr: int
    next: int | None
    prev: int | None
    timer: int

    def __post_init__(self):
        if self.nodes:
            if self.curr != self.nodes[0]:
                raise ValueError(f"board {self.id}: curr must equal nodes[0]")
            expected_next = self.nodes[1] if len(self.nodes) > 1 else None
            if self.next != expected_next:
                raise ValueError(f"board {self.id}: next must equal nodes[1]")
        if self.timer < 0:
            raise ValueError(f"board {self.id}: timer must be non-negative")

    @property
    def goal(self) -> int:
        """Final node of the published path."""
        return self.nodes[-1]

    @property
    def at_goal(self) -> bool:
        return self.next is None

    @property
    def speed(self) -> float:
        return math.hypot(self.vel[0], self.vel[1])

    def with_status(self, status: FsmState, **changes) -> "SignBoard":
        return replace(self, status=status, **changes)


@dataclass(frozen=True)
class NeighbourView:
    """One neighbour as seen at read time: its pose and its board copy."""

    pose: tuple[float, float]
    board: SignBoard


@dataclass(frozen=True)
class Lecture:
    """Snapshot of all boards readable by one agent at one instant."""

    reader: int
    time: float
    views: tuple[NeighbourView, ...]

    @property
    def boards(self) -> tuple[SignBoard, ...]:
        return tuple(v.board for v in self.views)

    def board_of(self, agent: int) -> SignBoard | None:
        for v in self.views:
            if v.board.id == agent:
                return v.board
        return None

    def occupant_of(self, node: int) -> SignBoard | None:
        """Board of the agent whose current node is ``node``, if visible."""
        for v in self.views:
            if v.board.curr == node:
                return v.board
        return None


def publish(agent) -> SignBoard:
    """Frozen snapshot of an agent's board.

    ``agent`` is anything carrying a ``board`` attribute (the simulator's
    runtime does); boards are immutable so the snapshot is just the value.
    """
    board = agent.board if hasattr(agent, "board") else agent
    if not isinstance(board, SignBoard):
        raise TypeError("publish expects a SignBoard or an object with one")
    return board


def read_neighbours(world, reader: int, radius: float, time: float | None = None) -> Lecture:
    """Boards of every agent strictly closer than ``radius`` to the reader.

    ``world`` maps agent id -> (pose, SignBoard).  Boards at exactly the
    radius are out of range.  The reader's own board is never included.
    """
    if reader not in world:
        raise KeyError(f"unknown reader agent {reader}")
    rx, ry = world[reader][0]
    t = 0.0 if time is None else time
    views = []
    for aid in sorted(world):
        if aid == reader:
            continue
        (x, y), board = world[aid]
        if math.hypot(x - rx, y - ry) < radius:
            views.append(NeighbourView((x, y), board))
    return Lecture(reader=reader, time=t, views=tuple(views))
