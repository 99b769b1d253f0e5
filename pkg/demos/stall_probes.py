"""Local deadlock and livelock probes on two crowded-yard snapshots.

A ring of parked vehicles can wedge an agent completely, or leave escape
corridors.  The probes expand the agent's neighbourhood level by level
(bounded by the communication radius) and either find a free node that the
surrounding traffic can cascade into, or certify safe paths of full depth.

Run from the repository root:  python demos/stall_probes.py
"""

from pathlib import Path

from agvcoord import Simulation, deadlock_oracle, detect_local_deadlock, detect_local_livelock, load_scenario
from agvcoord.safety import format_depth_report

scenarios = Path(__file__).resolve().parent.parent / "scenarios"

print("=" * 60)
print("nearly surrounded: one free node two moves away")
print("=" * 60)
scenario = load_scenario(scenarios / "surrounded.yaml")
snapshot = Simulation(scenario).snapshot()
report = detect_local_deadlock(snapshot, agent=1, radius=scenario.sim.radius,
                               layout=scenario.layout)
print(format_depth_report(report))
print(f"brute-force oracle agrees: deadlocked={deadlock_oracle(snapshot, 1, scenario.sim.radius, scenario.layout)}")

print()
print("=" * 60)
print("lighter traffic: two full-depth safe paths remain")
print("=" * 60)
scenario = load_scenario(scenarios / "safe-paths.yaml")
snapshot = Simulation(scenario).snapshot()
safe = detect_local_livelock(snapshot, agent=1, radius=scenario.sim.radius,
                             layout=scenario.layout)
for path in safe.paths:
    print(f"  safe path: {list(path)}")
print(f"certifies full-depth progress: {safe.certifies}")
