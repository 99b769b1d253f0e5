"""A fast vehicle tailing a slow one: speed matching while a node clears.

The follower is granted the next node as soon as the leader's board stops
claiming it, but the leader is still physically inside the node's area for
a moment.  During that window the follower caps its speed at the leader's
published speed, so it advances without ever closing the gap.

Run from the repository root:  python demos/follower_speeds.py
"""

import math
from pathlib import Path

from agvcoord import load_scenario, run

scenario = load_scenario(Path(__file__).resolve().parent.parent / "scenarios" / "follower.yaml")
leader, follower = scenario.agents[0], scenario.agents[1]
print(f"leader  max speed: {leader.max_speed} m/s")
print(f"follower max speed: {follower.max_speed} m/s")

trace, sim = run(scenario)

print("\nfollower speed while moving (capped at the leader's speed until the")
print("leader physically clears each node):")
for event in trace.of_kind("board"):
    if event.agent != follower.id:
        continue
    pr, status, vx, vy, *_ = event.payload
    if status == "M":
        print(f"  t={event.time:5.2f}  |v| = {math.hypot(vx, vy):.3f}")

print("\narrivals:")
for aid in sorted(sim.agents):
    print(f"  agent {aid}: {sim.agents[aid].arrival_time:.2f}s")
