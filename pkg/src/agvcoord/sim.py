"""Deterministic, seedable discrete-event simulator.

Agents move as single integrators along the polyline of their path while an
event loop fires each agent's protocol tick at its own period (plus seeded
phase and jitter, so no two clocks are synchronized).  Between events every
velocity is constant, so poses integrate in closed form: there is no solver
error to confuse the safety checks.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .layout import LayoutGraph, WeightedAdjacency, shortest_path
from .protocol import ManagerState, replan, request_step, signboard_commit, speed_update, wait_step, move_step
from .scenario import AgentSpec, Scenario
from .signboard import FsmState, Lecture, SignBoard, read_neighbours
from .trace import Trace

__all__ = ["AgentRuntime", "WorldSnapshot", "Simulation", "run", "node_area_contains", "SimulationError"]

EPS = 1e-12


class SimulationError(ValueError):
    pass


def node_area_contains(node, pose, d: float) -> bool:
    """Disc model of a node's area: within d/2 of the center, boundary in."""
    pos = node.position if hasattr(node, "position") else node
    return math.hypot(pose[0] - pos[0], pose[1] - pos[1]) <= d / 2


@dataclass(frozen=True)
class WorldSnapshot:
    """Frozen view of every agent at one instant."""

    time: float
    poses: dict[int, tuple[float, float]]
    boards: dict[int, SignBoard]

    def view(self) -> dict[int, tuple[tuple[float, float], SignBoard]]:
        return {aid: (self.poses[aid], self.boards[aid]) for aid in self.boards}


class AgentRuntime:
    """Mutable per-agent state owned by the simulator.

    The pose always lies on the polyline of the remaining path; ``seg_a`` and
    ``seg_b`` are the node ids bracketing the current segment and ``s`` the
    distance travelled from seg_a's center.
    """

    def __init__(self, spec: AgentSpec, layout: LayoutGraph, path, threshold: int):
        self.spec = spec
        self.id = spec.id
        self.layout = layout
        nodes = tuple(path)
        self.board = SignBoard(
            id=spec.id,
            pr=spec.priority,
            status=FsmState.REQ,
            vel=(0.0, 0.0),
            nodes=nodes,
            curr=nodes[0],
            next=nodes[1] if len(nodes) > 1 else None,
            prev=None,
            timer=0,
        )
        self.mgr = ManagerState(replan_threshold=threshold)
        self.velocity = (0.0, 0.0)
        self.seg_a = nodes[0]
        self.seg_b = nodes[1] if len(nodes) > 1 else None
        self.s = 0.0
        start = layout.position(nodes[0])
        self.pose = (float(start[0]), float(start[1]))
        self.arrival_time: float | None = None
        if self.seg_b is None:
            self.arrival_time = 0.0

    @property
    def arrived(self) -> bool:
        return self.arrival_time is not None

    def seg_length(self) -> float:
        a = self.layout.position(self.seg_a)
        b = self.layout.position(self.seg_b)
        return math.hypot(b[0] - a[0], b[1] - a[1])

    def direction(self) -> tuple[float, float]:
        if self.seg_b is None:
            return (0.0, 0.0)
        a = self.layout.position(self.seg_a)
        b = self.layout.position(self.seg_b)
        length = math.hypot(b[0] - a[0], b[1] - a[1])
        if length < EPS:
            return (0.0, 0.0)
        return ((b[0] - a[0]) / length, (b[1] - a[1]) / length)

    def refresh_pose(self) -> None:
        if self.seg_b is None:
            pos = self.layout.position(self.seg_a)
            self.pose = (float(pos[0]), float(pos[1]))
            return
        a = self.layout.position(self.seg_a)
        b = self.layout.position(self.seg_b)
        length = self.seg_length()
        f = 0.0 if length < EPS else self.s / length
        self.pose = (float(a[0] + f * (b[0] - a[0])), float(a[1] + f * (b[1] - a[1])))

    def at_center_of_curr(self) -> bool:
        pos = self.layout.position(self.board.curr)
        return math.hypot(self.pose[0] - pos[0], self.pose[1] - pos[1]) <= 1e-9

    def aim_at_next(self) -> None:
        """Point the segment at the freshly won next node when standing on
        the current node's center (mid-segment poses keep their heading and
        turn at the center during the advance)."""
        if self.board.next is None:
            return
        if self.seg_a == self.board.curr and self.seg_b == self.board.next:
            return
        if self.at_center_of_curr():
            self.seg_a = self.board.curr
            self.seg_b = self.board.next
            self.s = 0.0
            self.refresh_pose()

    def advance(self, dt: float, now: float) -> None:
        """Move along the polyline at the current speed for dt seconds.

        Turns at node centers happen only with an M grant for the node
        beyond; otherwise the vehicle pins at the center and its velocity
        drops to zero (it has nowhere granted to go).
        """
        speed = math.hypot(self.velocity[0], self.velocity[1])
        if speed < EPS or self.seg_b is None:
            return
        remaining = speed * dt
        total = remaining
        while remaining > EPS:
            length = self.seg_length()
            room = length - self.s
            if remaining < room - EPS:
                self.s += remaining
                remaining = 0.0
                break
            remaining -= room
            self.s = length
            board = self.board
            if (
                board.status is FsmState.M
                and board.curr == self.seg_b
                and board.next is not None
            ):
                self.seg_a = self.seg_b
                self.seg_b = board.next
                self.s = 0.0
                continue
            # Pinned at the node center without a grant to continue.
            if board.at_goal and board.curr == self.seg_b and not self.arrived:
                consumed = (total - remaining) / speed
                self.arrival_time = now + consumed
            self.velocity = (0.0, 0.0)
            remaining = 0.0
        self.refresh_pose()


class Simulation:
    """Event loop executing one scenario; deterministic for a fixed seed."""

    def __init__(self, scenario: Scenario, seed: int | None = None, horizon: float | None = None):
        from .safety import validate_scenario_bounds

        self.scenario = scenario
        self.layout = scenario.layout
        self.params = scenario.sim
        self.seed = scenario.sim.seed if seed is None else int(seed)
        self.horizon = scenario.sim.horizon if horizon is None else float(horizon)
        if self.horizon <= 0:
            raise SimulationError("horizon must be positive")

        diagnostics = validate_scenario_bounds(self.layout, scenario.agents)
        if diagnostics.errors:
            raise SimulationError("; ".join(diagnostics.errors))

        self.max_priority = 1 + max((a.priority for a in scenario.agents), default=0)
        threshold = (
            scenario.sim.replan_threshold if scenario.sim.replanning else 10**9
        )
        weights = WeightedAdjacency.defaults(self.layout)
        self.agents: dict[int, AgentRuntime] = {}
        for spec in scenario.agents:
            path = shortest_path(self.layout, weights, spec.start, spec.goal)
            if path is None:
                raise SimulationError(
                    f"agent {spec.id}: goal {spec.goal} unreachable from start {spec.start}"
                )
            rt = AgentRuntime(spec, self.layout, path, threshold)
            self.agents[spec.id] = rt
            rt.board = self._escalate(rt.board)

        self.trace = Trace()
        self.time = 0.0
        self._rngs = {
            spec.id: np.random.default_rng([self.seed, spec.id]) for spec in scenario.agents
        }
        self._heap: list[tuple[float, int]] = []
        for spec in scenario.agents:
            rt = self.agents[spec.id]
            if rt.arrived:
                continue
            phase = (
                spec.phase
                if spec.phase is not None
                else float(self._rngs[spec.id].uniform(0.0, spec.period))
            )
            heapq.heappush(self._heap, (phase, spec.id))
        self.online_detection = False

    # -- helpers --------------------------------------------------------------

    def _escalate(self, board: SignBoard) -> SignBoard:
        """Publish maximum priority while standing inside a critical area."""
        base = self.agents[board.id].spec.priority if board.id in self.agents else board.pr
        wanted = self.max_priority if self.layout.is_critical(board.curr) else base
        if board.pr != wanted:
            return replace(board, pr=wanted)
        return board

    def world_view(self) -> dict[int, tuple[tuple[float, float], SignBoard]]:
        return {aid: (rt.pose, rt.board) for aid, rt in sorted(self.agents.items())}

    def snapshot(self) -> WorldSnapshot:
        return WorldSnapshot(
            time=self.time,
            poses={aid: rt.pose for aid, rt in sorted(self.agents.items())},
            boards={aid: rt.board for aid, rt in sorted(self.agents.items())},
        )

    def all_arrived(self) -> bool:
        return all(rt.arrived for rt in self.agents.values())

    def _advance_world(self, dt: float, now: float) -> None:
        if dt <= 0:
            return
        for aid in sorted(self.agents):
            self.agents[aid].advance(dt, now)

    # -- the protocol tick -----------------------------------------------------

    def step_agent(self, rt: AgentRuntime, t: float) -> None:
        lect = read_neighbours(self.world_view(), rt.id, self.params.radius, t)
        self.trace.pose(t, rt.id, rt.pose[0], rt.pose[1])

        if rt.board.at_goal:
            # Parked (or rolling onto the goal center); just republish.
            vel = rt.velocity
            rt.board = self._escalate(
                rt.board.with_status(rt.board.status, vel=(float(vel[0]), float(vel[1])))
            )
            self.trace.board(t, rt.id, rt.board)
            return

        old = rt.mgr.fsm
        state = old
        mgr = rt.mgr
        competition = None
        entered = False
        replanned = None

        if old is FsmState.REQ:
            out = request_step(rt.board, rt.mgr, lect, self.layout)
            state, mgr, competition = out.state, out.mgr, out.competition
            if state is FsmState.REP and not self.params.replanning:
                state = FsmState.W
                mgr = replace(mgr, fsm=FsmState.W)
        elif old is FsmState.W:
            state = wait_step(rt.mgr)
            mgr = replace(rt.mgr, fsm=state)
        elif old is FsmState.M:
            state = move_step(rt.pose, rt.board, self.layout, lect)
            if state is FsmState.REQ:
                entered = True
                mgr = replace(rt.mgr, fsm=FsmState.REQ, timer=0, t_rep=0)
        else:
            raise SimulationError(f"agent {rt.id} ticked in unexpected state {old}")

        if state is FsmState.REP:
            goal = rt.board.goal
            replanned = replan(self.layout, rt.board.curr, goal, lect)
            if replanned is None:
                # Nowhere to go through any neighbour; keep waiting instead.
                state = FsmState.W
                mgr = replace(mgr, fsm=FsmState.W, t_rep=0)
                replanned = None
            else:
                mgr = replace(mgr, fsm=FsmState.REP, t_rep=0)

        if state is FsmState.M:
            rt.aim_at_next()

        velocity = speed_update(
            state,
            rt.direction(),
            lect,
            rt.board.next,
            self.layout.position(rt.board.next) if rt.board.next is not None else (0.0, 0.0),
            self.layout.d,
            rt.spec.max_speed,
            rt.velocity,
        )

        board = signboard_commit(state, rt.board, mgr, velocity, replanned, entered)
        board = self._escalate(board)

        if old is not state:
            self.trace.fsm(t, rt.id, old, state)
        if competition is not None and len(competition.competitors) > 1:
            self.trace.competition(
                t, rt.id, competition.node, competition.winner, competition.basis, competition.competitors
            )
        if entered:
            self.trace.entry(t, rt.id, board.curr)
        if state is FsmState.REP:
            self.trace.replan(t, rt.id, replanned)
            # The decoder hands control straight back to the requester.
            mgr = replace(mgr, fsm=FsmState.REQ)
            self.trace.fsm(t, rt.id, FsmState.REP, FsmState.REQ)
            # A fresh path needs a fresh heading once a grant arrives.
        rt.board = board
        rt.velocity = velocity
        rt.mgr = mgr

        if self.online_detection:
            from .safety import detect_local_deadlock, detect_local_livelock

            report = detect_local_deadlock(
                self.snapshot(), rt.id, self.params.radius, self.layout, d=self.layout.d
            )
            safe = detect_local_livelock(
                self.snapshot(), rt.id, self.params.radius, self.layout, d=self.layout.d
            )
            self.trace.detect(t, rt.id, report.deadlocked, sorted(report.free), len(safe.paths))

        self.trace.board(t, rt.id, rt.board)

    # -- run loops --------------------------------------------------------------

    def run_until(self, limit: float) -> None:
        """Advance the event loop to ``limit`` seconds (or full arrival)."""
        while self._heap:
            te, aid = self._heap[0]
            if te > limit:
                break
            heapq.heappop(self._heap)
            self._advance_world(te - self.time, self.time)
            self.time = te
            rt = self.agents[aid]
            self.step_agent(rt, te)
            if not rt.arrived:
                rng = self._rngs[aid]
                jitter = self.params.jitter
                factor = 1.0 + (jitter * float(rng.uniform(-1.0, 1.0)) if jitter > 0 else 0.0)
                heapq.heappush(self._heap, (te + rt.spec.period * factor, aid))
            if self.all_arrived():
                break
        if self.time < limit and not self.all_arrived():
            self._advance_world(limit - self.time, self.time)
            self.time = limit

    def run(self) -> Trace:
        self.run_until(self.horizon)
        end = self.time
        for aid in sorted(self.agents):
            rt = self.agents[aid]
            self.trace.pose(end, aid, rt.pose[0], rt.pose[1])
            self.trace.board(end, aid, rt.board)
        return self.trace


def run(scenario: Scenario, seed: int | None = None, horizon: float | None = None,
        online_detection: bool = False) -> tuple[Trace, Simulation]:
    """Execute a scenario; returns the trace and the finished simulation."""
    sim = Simulation(scenario, seed=seed, horizon=horizon)
    sim.online_detection = online_detection
    sim.run()
    return sim.trace, sim
