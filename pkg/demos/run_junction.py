"""Four AGVs contest one junction node; the two losers replan around it.

Agents start on the four arms of a plus-shaped grid, every initial path
runs through the central node, and priorities decide the order of access.
Watch for: the top-priority agent crossing first, the others replanning
detours, and a clean arrival for the whole fleet.

Run from the repository root:  python demos/run_junction.py
"""

from pathlib import Path

from agvcoord import assert_mutual_exclusion, assert_no_geometric_collision, load_scenario, run

scenario = load_scenario(Path(__file__).resolve().parent.parent / "scenarios" / "crossroad.yaml")

print("initial paths:")
for agent in scenario.agents:
    print(f"  agent {agent.id} (priority {agent.priority}): {agent.start} -> {agent.goal}")

trace, sim = run(scenario)

print("\ncompetitions for the junction (node 56):")
for event in trace.of_kind("competition"):
    node, winner, basis, competitors = event.payload
    if node == 56:
        print(f"  t={event.time:5.2f}  agents {competitors} -> winner {winner} ({basis})")
        break  # the first one tells the story; the rest repeat it

print("\nreplanned detours:")
for event in trace.of_kind("replan"):
    print(f"  t={event.time:5.2f}  agent {event.agent}: {list(event.payload[0])}")

print("\njunction crossings:")
for event in trace.of_kind("entry"):
    if event.payload[0] == 56:
        print(f"  t={event.time:5.2f}  agent {event.agent} enters node 56")

print("\narrivals:")
for aid in sorted(sim.agents):
    print(f"  agent {aid}: {sim.agents[aid].arrival_time:.2f}s")

print(f"\nmutual-exclusion violations: {len(assert_mutual_exclusion(trace))}")
print(f"geometric violations:        {len(assert_no_geometric_collision(trace, 0.1))}")
