"""Scenario documents: plant layout, fleet and simulation parameters.

One YAML document describes a run.  Field names are fixed by
docs/scenario-format.md; everything numeric is a plain decimal and node
references are integer ids.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from .layout import LayoutError, LayoutGraph, Node

__all__ = ["AgentSpec", "SimParams", "Scenario", "parse_scenario_text", "load_scenario"]


@dataclass
class AgentSpec:
    id: int
    priority: int
    start: int
    goal: int
    max_speed: float
    period: float
    footprint: float
    phase: float | None = None  # seconds; None = drawn from the run seed

    def validate(self):
        if self.id < 0:
            raise LayoutError(f"agent id {self.id} must be non-negative")
        if self.priority < 0:
            raise LayoutError(f"agent {self.id}: priority must be non-negative")
        for name in ("max_speed", "period", "footprint"):
            v = getattr(self, name)
            if v <= 0:
                raise LayoutError(f"agent {self.id}: {name} must be positive")
        if self.phase is not None and self.phase < 0:
            raise LayoutError(f"agent {self.id}: phase must be non-negative")


@dataclass
class SimParams:
    radius: float = 3.0  # communication radius R, meters
    horizon: float = 60.0  # seconds
    seed: int = 0
    jitter: float = 0.1  # fraction of the period, uniform per tick
    replan_threshold: int = 10  # ticks of t_rep before W escalates to Rep
    replanning: bool = True  # False freezes paths (no Rep transitions)

    def validate(self):
        if self.radius <= 0:
            raise LayoutError("sim.radius must be positive")
        if self.horizon <= 0:
            raise LayoutError("sim.horizon must be positive")
        if not 0 <= self.jitter < 1:
            raise LayoutError("sim.jitter must lie in [0, 1)")
        if self.replan_threshold < 0:
            raise LayoutError("sim.replan_threshold must be non-negative")


@dataclass
class Scenario:
    name: str
    layout: LayoutGraph
    agents: list[AgentSpec] = field(default_factory=list)
    sim: SimParams = field(default_factory=SimParams)


def _require(mapping, key, where):
    if key not in mapping:
        raise LayoutError(f"{where}: missing required field {key!r}")
    return mapping[key]


def parse_scenario_text(text: str, require_agents: bool = True) -> Scenario:
    """Parse a scenario document; validates the layout invariants on load."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise LayoutError(f"scenario parse error: {exc}") from exc
    if not isinstance(doc, dict):
        raise LayoutError("scenario document must be a mapping")

    raw_nodes = _require(doc, "nodes", "scenario")
    nodes = []
    for nid, pos in raw_nodes.items():
        try:
            nid = int(nid)
        except (TypeError, ValueError):
            raise LayoutError(f"node id {nid!r} is not an integer") from None
        if not isinstance(pos, (list, tuple)) or len(pos) != 2:
            raise LayoutError(f"node {nid}: position must be [x, y]")
        nodes.append(Node(nid, [float(pos[0]), float(pos[1])]))

    raw_arcs = doc.get("arcs", [])
    arcs = []
    for pair in raw_arcs:
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise LayoutError(f"arc {pair!r} must be a pair of node ids")
        arcs.append((int(pair[0]), int(pair[1])))

    rooms = {str(k): [int(n) for n in v] for k, v in (doc.get("rooms") or {}).items()}
    criticals = {
        str(k): [int(n) for n in v] for k, v in (doc.get("criticals") or {}).items()
    }
    layout = LayoutGraph(nodes, arcs, rooms, criticals, d=doc.get("d"))

    agents = []
    seen_ids = set()
    for entry in doc.get("agents") or []:
        spec = AgentSpec(
            id=int(_require(entry, "id", "agent")),
            priority=int(_require(entry, "priority", "agent")),
            start=int(_require(entry, "start", "agent")),
            goal=int(_require(entry, "goal", "agent")),
            max_speed=float(_require(entry, "max_speed", "agent")),
            period=float(_require(entry, "period", "agent")),
            footprint=float(_require(entry, "footprint", "agent")),
            phase=None if entry.get("phase") is None else float(entry["phase"]),
        )
        spec.validate()
        if spec.id in seen_ids:
            raise LayoutError(f"duplicate agent id {spec.id}")
        seen_ids.add(spec.id)
        for label, node in (("start", spec.start), ("goal", spec.goal)):
            if node not in layout.nodes:
                raise LayoutError(f"agent {spec.id}: {label} node {node} does not exist")
        agents.append(spec)
    if require_agents and not agents:
        raise LayoutError("scenario declares no agents")

    raw_sim = doc.get("sim") or {}
    threshold = raw_sim.get("replan_threshold", 10)
    if threshold in ("inf", ".inf", None):
        threshold = 10**9
    sim = SimParams(
        radius=float(raw_sim.get("radius", 3.0)),
        horizon=float(raw_sim.get("horizon", 60.0)),
        seed=int(raw_sim.get("seed", 0)),
        jitter=float(raw_sim.get("jitter", 0.1)),
        replan_threshold=int(threshold),
        replanning=bool(raw_sim.get("replanning", True)),
    )
    sim.validate()

    return Scenario(name=str(doc.get("name", "scenario")), layout=layout, agents=agents, sim=sim)


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario_text(fh.read())
