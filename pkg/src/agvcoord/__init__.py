"""Decentralized sign-board coordination of AGV fleets on graph layouts."""

from .layout import (
    LayoutError,
    LayoutGraph,
    Node,
    WeightedAdjacency,
    load_layout,
    max_agents,
    min_room_size,
    neighbours,
    shortest_path,
)
from .protocol import (
    CompetitionOutcome,
    ManagerState,
    replan,
    request_step,
    resolve_priority,
    signboard_commit,
    speed_update,
    wait_step,
)
from .resources import (
    AgentConfiguration,
    EncounterKind,
    MacroResource,
    agent_configuration,
    classify_encounter,
    macro_resources,
    shared_micro,
)
from .safety import (
    DeadlockReport,
    Diagnostics,
    SafePathSet,
    assert_mutual_exclusion,
    assert_no_geometric_collision,
    check_sampling_constraint,
    deadlock_oracle,
    detect_local_deadlock,
    detect_local_livelock,
    validate_scenario_bounds,
)
from .scenario import AgentSpec, Scenario, SimParams, load_scenario, parse_scenario_text
from .signboard import FsmState, Lecture, NeighbourView, SignBoard, publish, read_neighbours
from .sim import AgentRuntime, Simulation, SimulationError, WorldSnapshot, node_area_contains, run
from .trace import Trace, TraceError, TraceEvent

__version__ = "0.1.0"
