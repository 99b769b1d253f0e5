import dataclasses
import math

import pytest

from agvcoord.signboard import FsmState, SignBoard, publish, read_neighbours

from conftest import board


def world(*entries):
    return {aid: (pose, b) for aid, pose, b in entries}


def test_board_field_consistency():
    b = board(1, [55, 56, 57], pr=1, status=FsmState.M)
    assert b.curr == 55 and b.next == 56 and b.goal == 57
    with pytest.raises(ValueError, match="curr must equal"):
        SignBoard(id=1, pr=1, status=FsmState.REQ, vel=(0, 0), nodes=(55, 56),
                  curr=56, next=56, prev=None, timer=0)
    with pytest.raises(ValueError, match="next must equal"):
        SignBoard(id=1, pr=1, status=FsmState.REQ, vel=(0, 0), nodes=(55, 56),
                  curr=55, next=57, prev=None, timer=0)


def test_publish_snapshot_fields():
    b = board(1, [55, 56, 57], pr=1, status=FsmState.M, vel=(1.0, 0.0))
    assert publish(b) == b

    class Carrier:
        pass

    c = Carrier()
    c.board = b
    assert publish(c) is b


def test_parked_board():
    b = board(2, [7], vel=(0.0, 0.0))
    assert b.at_goal and b.next is None and b.vel == (0.0, 0.0)


def test_waiting_board_timer():
    b = board(3, [10, 11], status=FsmState.W, timer=4)
    assert b.timer == 4


def test_read_neighbours_within_radius():
    a = board(1, [1, 2])
    b = board(2, [3, 4])
    w = world((1, (0.0, 0.0), a), (2, (0.5, 0.0), b))
    lect1 = read_neighbours(w, 1, 3.0)
    lect2 = read_neighbours(w, 2, 3.0)
    assert [v.board.id for v in lect1.views] == [2]
    assert [v.board.id for v in lect2.views] == [1]


def test_read_neighbours_boundary_excluded():
    w = world((1, (0.0, 0.0), board(1, [1, 2])), (2, (3.0, 0.0), board(2, [3, 4])))
    lect = read_neighbours(w, 1, 3.0)
    assert lect.views == ()


def test_read_neighbours_unknown_reader():
    with pytest.raises(KeyError):
        read_neighbours({}, 9, 1.0)


def test_read_neighbours_radius_three_grid():
    # Reader at the origin of a unit grid sees everything strictly inside 3m.
    entries = [(1, (0.0, 0.0), board(1, [1]))]
    entries.append((2, (1.0, 0.0), board(2, [2])))
    entries.append((3, (2.0, 2.0), board(3, [3])))   # dist ~2.83 < 3
    entries.append((4, (3.0, 0.0), board(4, [4])))   # dist 3, out
    lect = read_neighbours(world(*entries), 1, 3.0)
    assert {v.board.id for v in lect.views} == {2, 3}


def test_lecture_never_contains_reader_and_no_duplicates():
    entries = [(i, (0.1 * i, 0.0), board(i, [i])) for i in range(1, 6)]
    lect = read_neighbours(world(*entries), 3, 10.0)
    ids = [v.board.id for v in lect.views]
    assert 3 not in ids
    assert len(ids) == len(set(ids)) == 4


def test_neighbour_relation_symmetric():
    entries = [(i, (0.7 * i, 0.3 * i), board(i, [i])) for i in range(1, 7)]
    w = world(*entries)
    for i in range(1, 7):
        li = {v.board.id for v in read_neighbours(w, i, 2.0).views}
        for j in li:
            lj = {v.board.id for v in read_neighbours(w, j, 2.0).views}
            assert i in lj


def test_lecture_is_frozen_snapshot():
    b = board(2, [3, 4], vel=(1.0, 0.0))
    w = world((1, (0.0, 0.0), board(1, [1, 2])), (2, (1.0, 0.0), b))
    lect = read_neighbours(w, 1, 5.0)
    # The owner republishing (a new value) must not alter the taken lecture.
    w[2] = ((1.0, 0.0), dataclasses.replace(b, vel=(0.0, 0.0), status=FsmState.W))
    assert lect.board_of(2).vel == (1.0, 0.0)
    assert lect.board_of(2).status is FsmState.REQ


def test_lecture_lookup_helpers():
    w = world((1, (0.0, 0.0), board(1, [1, 2])), (2, (1.0, 0.0), board(2, [3, 4])))
    lect = read_neighbours(w, 1, 5.0)
    assert lect.board_of(2).id == 2
    assert lect.board_of(7) is None
    assert lect.occupant_of(3).id == 2
    assert lect.occupant_of(9) is None
