"""Timestamped run records and their line-oriented file format.

One event per line: ``time<TAB>agent<TAB>kind<TAB>field...`` with times at
fixed 6-decimal precision so reruns of the same seed diff byte-for-byte.

Field order per kind:
  pose         x y
  board        pr status vx vy curr next prev timer nodes(comma-separated)
  fsm          from to
  competition  node winner basis competitors(comma-separated)
  entry        node
  replan       path(comma-separated)
  detect       deadlocked(0|1) free(comma-separated) safe_paths(count)
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .signboard import FsmState, SignBoard

__all__ = ["TraceEvent", "Trace", "TraceError"]

KINDS = ("pose", "board", "fsm", "competition", "entry", "replan", "detect")


class TraceError(ValueError):
    """Raised when a trace file cannot be parsed."""


@dataclass(frozen=True)
class TraceEvent:
    time: float
    agent: int
    kind: str
    payload: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise TraceError(f"unknown trace record kind {self.kind!r}")


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _opt(n) -> str:
    return "-" if n is None else str(n)


def _parse_opt(s: str):
    return None if s == "-" else int(s)


def _ids(csv: str) -> tuple[int, ...]:
    return tuple(int(x) for x in csv.split(",")) if csv else ()


class Trace:
    """Ordered event log of one simulation run."""

    def __init__(self, events=None):
        self.events: list[TraceEvent] = list(events) if events else []

    def append(self, event: TraceEvent) -> None:
        if self.events and event.time < self.events[-1].time - 1e-12:
            raise TraceError("trace times must be non-decreasing")
        self.events.append(event)

    def of_kind(self, kind: str):
        return [e for e in self.events if e.kind == kind]

    # -- record constructors used by the simulator ---------------------------

    def pose(self, t, agent, x, y):
        self.append(TraceEvent(t, agent, "pose", (x, y)))

    def board(self, t, agent, b: SignBoard):
        self.append(
            TraceEvent(
                t,
                agent,
                "board",
                (b.pr, b.status.value, b.vel[0], b.vel[1], b.curr, b.next, b.prev, b.timer, b.nodes),
            )
        )

    def fsm(self, t, agent, src: FsmState, dst: FsmState):
        self.append(TraceEvent(t, agent, "fsm", (src.value, dst.value)))

    def competition(self, t, agent, node, winner, basis, competitors):
        self.append(
            TraceEvent(t, agent, "competition", (node, winner, basis, tuple(competitors)))
        )

    def entry(self, t, agent, node):
        self.append(TraceEvent(t, agent, "entry", (node,)))

    def replan(self, t, agent, path):
        self.append(TraceEvent(t, agent, "replan", (tuple(path),)))

    def detect(self, t, agent, deadlocked, free_nodes, safe_paths):
        self.append(
            TraceEvent(t, agent, "detect", (bool(deadlocked), tuple(free_nodes), int(safe_paths)))
        )

    # -- serialization --------------------------------------------------------

    def to_lines(self):
        for e in self.events:
            head = f"{_fmt(e.time)}\t{e.agent}\t{e.kind}"
            p = e.payload
            if e.kind == "pose":
                body = f"{_fmt(p[0])}\t{_fmt(p[1])}"
            elif e.kind == "board":
                nodes = ",".join(str(n) for n in p[8])
                body = (
                    f"{p[0]}\t{p[1]}\t{_fmt(p[2])}\t{_fmt(p[3])}\t{p[4]}\t"
                    f"{_opt(p[5])}\t{_opt(p[6])}\t{p[7]}\t{nodes}"
                )
            elif e.kind == "fsm":
                body = f"{p[0]}\t{p[1]}"
            elif e.kind == "competition":
                body = f"{p[0]}\t{p[1]}\t{p[2]}\t" + ",".join(str(c) for c in p[3])
            elif e.kind == "entry":
                body = str(p[0])
            elif e.kind == "replan":
                body = ",".join(str(n) for n in p[0])
            else:  # detect
                body = f"{int(p[0])}\t" + ",".join(str(n) for n in p[1]) + f"\t{p[2]}"
            yield f"{head}\t{body}"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for line in self.to_lines():
                fh.write(line + "\n")

    @classmethod
    def read(cls, path) -> "Trace":
        trace = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                raw = raw.rstrip("\n")
                if not raw:
                    continue
                try:
                    trace.append(cls._parse_line(raw))
                except (TraceError, ValueError, IndexError) as exc:
                    raise TraceError(f"{path}:{lineno}: malformed record: {exc}") from None
        return trace

    @staticmethod
    def _parse_line(raw: str) -> TraceEvent:
        parts = raw.split("\t")
        t, agent, kind = float(parts[0]), int(parts[1]), parts[2]
        body = parts[3:]
        if kind == "pose":
            payload = (float(body[0]), float(body[1]))
        elif kind == "board":
            payload = (
                int(body[0]),
                body[1],
                float(body[2]),
                float(body[3]),
                int(body[4]),
                _parse_opt(body[5]),
                _parse_opt(body[6]),
                int(body[7]),
                _ids(body[8]),
            )
        elif kind == "fsm":
            payload = (body[0], body[1])
        elif kind == "competition":
            payload = (int(body[0]), int(body[1]), body[2], _ids(body[3]))
        elif kind == "entry":
            payload = (int(body[0]),)
        elif kind == "replan":
            payload = (_ids(body[0]),)
        elif kind == "detect":
            payload = (bool(int(body[0])), _ids(body[1]), int(body[2]))
        else:
            raise TraceError(f"unknown kind {kind!r}")
        return TraceEvent(t, agent, kind, payload)
