"""Batch front door: validate scenarios, run them, check traces, analyze stalls.

Exit codes are stable: 0 success, 1 validation or safety failure, 2 usage
or I/O trouble.
"""

from __future__ import annotations

import argparse
import sys
import time as _time
from pathlib import Path

from .layout import LayoutError
from .safety import (
    assert_mutual_exclusion,
    assert_no_geometric_collision,
    detect_local_deadlock,
    detect_local_livelock,
    format_depth_report,
    validate_scenario_bounds,
)
from .scenario import load_scenario
from .sim import Simulation, SimulationError
from .trace import Trace, TraceError

__all__ = ["main", "cmd_validate", "cmd_run", "cmd_check", "cmd_analyze"]


def _load(path: str):
    try:
        return load_scenario(path)
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(2) from None
    except LayoutError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(1) from None


def cmd_validate(args) -> int:
    scenario = _load(args.scenario)
    diag = validate_scenario_bounds(scenario.layout, scenario.agents)
    for msg in diag.errors:
        print(f"error: {msg}", file=sys.stderr)
    for msg in diag.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    if diag.ok:
        print(f"{scenario.name}: ok ({len(scenario.agents)} agents, "
              f"{len(scenario.layout.nodes)} nodes)")
        return 0
    return 1


def _write_plot_csvs(trace: Trace, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    status: dict[int, str] = {}
    rows: dict[int, list[str]] = {}
    for event in trace.events:
        if event.kind == "board":
            status[event.agent] = event.payload[1]
        elif event.kind == "pose":
            rows.setdefault(event.agent, []).append(
                f"{event.time:.6f},{event.payload[0]:.6f},{event.payload[1]:.6f},"
                f"{status.get(event.agent, 'Req')}"
            )
    for agent in sorted(rows):
        path = out_dir / f"agent_{agent}.csv"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("time,x,y,state\n")
            fh.write("\n".join(rows[agent]) + "\n")


def cmd_run(args) -> int:
    scenario = _load(args.scenario)
    t0 = _time.perf_counter()
    try:
        sim = Simulation(scenario, seed=args.seed, horizon=args.horizon)
        sim.online_detection = args.online_detection
        trace = sim.run()
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    wall = _time.perf_counter() - t0

    if args.trace_out:
        trace.write(args.trace_out)
    if args.plot_out:
        _write_plot_csvs(trace, Path(args.plot_out))

    exclusion = assert_mutual_exclusion(trace)
    footprint = max(a.footprint for a in scenario.agents)
    collisions = assert_no_geometric_collision(trace, footprint)

    replans = len(trace.of_kind("replan"))
    competitions = len(trace.of_kind("competition"))
    w_ticks = sum(1 for e in trace.of_kind("board") if e.payload[1] == "W")

    print(f"scenario {scenario.name}  seed {sim.seed}  wall {wall:.3f}s  "
          f"sim-end {sim.time:.3f}s")
    all_arrived = True
    for aid in sorted(sim.agents):
        rt = sim.agents[aid]
        if rt.arrived:
            print(f"  agent {aid}: arrived at {rt.arrival_time:.3f}s")
        else:
            all_arrived = False
            print(f"  agent {aid}: DNF (at node {rt.board.curr})")
    print(f"  replans {replans}  competitions {competitions}  wait-ticks {w_ticks}")
    print(f"  mutual-exclusion violations: {len(exclusion)}")
    print(f"  geometric violations (footprint {footprint}): {len(collisions)}")
    return 0 if all_arrived and not exclusion and not collisions else 1


def cmd_check(args) -> int:
    try:
        trace = Trace.read(args.trace)
    except OSError as exc:
        print(f"error: cannot read {args.trace}: {exc}", file=sys.stderr)
        return 2
    except TraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not trace.events:
        print("warning: empty trace", file=sys.stderr)
        print("violations: 0")
        return 0
    exclusion = assert_mutual_exclusion(trace)
    collisions = assert_no_geometric_collision(trace, args.footprint)
    for t, node, agents in exclusion:
        print(f"exclusion violation at {t:.6f}: node {node} held by {agents}")
    for t, pair, dist in collisions:
        print(f"collision at {t:.6f}: agents {pair} at distance {dist:.6f}")
    print(f"violations: {len(exclusion) + len(collisions)}")
    return 0 if not exclusion and not collisions else 1


def cmd_analyze(args) -> int:
    scenario = _load(args.scenario)
    try:
        sim = Simulation(scenario, seed=args.seed)
        if args.snapshot_time > 0:
            sim.run_until(args.snapshot_time)
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    snapshot = sim.snapshot()
    agents = [args.agent] if args.agent is not None else sorted(sim.agents)
    for aid in agents:
        if aid not in sim.agents:
            print(f"error: unknown agent {aid}", file=sys.stderr)
            return 2
        report = detect_local_deadlock(snapshot, aid, scenario.sim.radius, scenario.layout)
        print(format_depth_report(report))
        safe = detect_local_livelock(snapshot, aid, scenario.sim.radius, scenario.layout)
        if not safe.applicable:
            print("P_safe: not applicable (agent parked at its goal)")
        else:
            shown = ", ".join("{" + ", ".join(map(str, p)) + "}" for p in safe.paths)
            print(f"P_safe = {{{shown}}}")
        print()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agvcoord",
        description="Sign-board AGV coordination: scenario runner and safety checker",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="simulate a scenario")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--trace-out", default=None)
    p.add_argument("--plot-out", default=None)
    p.add_argument("--online-detection", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="verify safety properties of a trace file")
    p.add_argument("trace")
    p.add_argument("--footprint", type=float, default=0.15)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("analyze", help="local deadlock/livelock probe on a snapshot")
    p.add_argument("scenario")
    p.add_argument("--snapshot-time", type=float, default=0.0)
    p.add_argument("--agent", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2


if __name__ == "__main__":
    sys.exit(main())
