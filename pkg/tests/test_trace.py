import pytest

from agvcoord.scenario import load_scenario
from agvcoord.sim import run
from agvcoord.trace import Trace, TraceError, TraceEvent


def test_round_trip_preserves_every_event(tmp_path, scenario_dir):
    trace, _ = run(load_scenario(scenario_dir / "crossroad.yaml"))
    path = tmp_path / "run.trace"
    trace.write(path)
    back = Trace.read(path)
    assert len(back.events) == len(trace.events)
    for a, b in zip(trace.events, back.events):
        assert a.kind == b.kind and a.agent == b.agent
        assert a.time == pytest.approx(b.time, abs=1e-6)
    # Rewriting the parsed trace is byte-stable.
    path2 = tmp_path / "again.trace"
    back.write(path2)
    assert path.read_bytes() == path2.read_bytes()


def test_times_must_not_decrease():
    trace = Trace()
    trace.pose(1.0, 1, 0.0, 0.0)
    with pytest.raises(TraceError):
        trace.pose(0.5, 1, 0.0, 0.0)


def test_unknown_kind_rejected():
    with pytest.raises(TraceError):
        TraceEvent(0.0, 1, "bogus", ())


def test_malformed_line_reports_location(tmp_path):
    path = tmp_path / "bad.trace"
    path.write_text("0.000000\t1\tpose\tnot-a-number\toops\n")
    with pytest.raises(TraceError, match="bad.trace:1"):
        Trace.read(path)
