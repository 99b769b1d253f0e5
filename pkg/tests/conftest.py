import math
from pathlib import Path

import pytest

from agvcoord.layout import LayoutGraph, Node
from agvcoord.signboard import FsmState, SignBoard
from agvcoord.sim import WorldSnapshot

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture(scope="session")
def scenario_dir() -> Path:
    return SCENARIOS


def line_layout(n=3, spacing=1.0) -> LayoutGraph:
    nodes = [Node(i, [spacing * (i - 1), 0.0]) for i in range(1, n + 1)]
    arcs = [(i, i + 1) for i in range(1, n)]
    return LayoutGraph(nodes, arcs, {"lane": list(range(1, n + 1))}, {})


def grid_layout(rows, cols, spacing=1.0) -> LayoutGraph:
    nodes = []
    arcs = []
    def nid(r, c):
        return r * cols + c + 1
    for r in range(rows):
        for c in range(cols):
            nodes.append(Node(nid(r, c), [spacing * c, spacing * r]))
            if c + 1 < cols:
                arcs.append((nid(r, c), nid(r, c + 1)))
            if r + 1 < rows:
                arcs.append((nid(r, c), nid(r + 1, c)))
    ids = [n.id for n in nodes]
    return LayoutGraph(nodes, arcs, {"floor": ids}, {})


def board(aid, nodes, pr=1, status=FsmState.REQ, vel=(0.0, 0.0), timer=0, prev=None):
    nodes = tuple(nodes)
    return SignBoard(
        id=aid, pr=pr, status=status, vel=vel, nodes=nodes,
        curr=nodes[0], next=nodes[1] if len(nodes) > 1 else None,
        prev=prev, timer=timer,
    )


def snapshot_from_boards(layout, boards, time=0.0) -> WorldSnapshot:
    poses = {}
    for aid, b in boards.items():
        pos = layout.position(b.curr)
        poses[aid] = (float(pos[0]), float(pos[1]))
    return WorldSnapshot(time=time, poses=poses, boards=dict(boards))


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    verdict = "PASS" if report.passed else "FAIL"
    print(f"\n[ACCEPTANCE] {name}: {verdict}")
