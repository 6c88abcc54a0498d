import math
import random

import pytest

from growshapes.core import Record, check_schedule, make_instance, touch_time
from growshapes.naive import SIMULATION_MAX_N, solve_naive, solve_simulation


def _random_disks(n, rng, lo=0.5, hi=2.0):
    pts = set()
    while len(pts) < n:
        pts.add((rng.random(), rng.random()))
    return make_instance("disk_l2", sorted(pts), [rng.uniform(lo, hi) for _ in range(n)])


def test_three_disk_example():
    inst = make_instance("disk_l2", [(0.0, 0.0), (4.0, 0.0), (1.0, 0.0)], [1.0] * 3)
    sched = solve_naive(inst)
    assert sched.records == (Record(3, 1, 0.5), Record(2, 1, 2.0))
    assert sched.survivor == 1
    assert solve_simulation(inst) == sched


def test_single_shape():
    inst = make_instance("disk_l2", [(0.0, 0.0)], [1.0])
    sched = solve_naive(inst)
    assert sched.records == () and sched.survivor == 1


def test_two_row_reduction_instance():
    # bottom disks 1..2 at rate 1, top disks above them with rates 2 and 3
    inst = make_instance(
        "disk_l2",
        [(2.0, 0.0), (4.0, 0.0), (2.0, 1.0), (4.0, 1.0)],
        [1.0, 1.0, 2.0, 3.0],
    )
    sched = solve_naive(inst)
    by_victim = {r.victim: r for r in sched.records}
    assert by_victim[3].eliminator == 1
    assert math.isclose(by_victim[3].time, 1 / 3, rel_tol=1e-15)
    assert by_victim[4].eliminator == 2
    assert by_victim[4].time == 0.25


def test_simulation_two_disks():
    inst = make_instance("disk_l2", [(0.0, 0.0), (3.0, 0.0)], [1.0, 2.0])
    assert solve_simulation(inst).records == (Record(2, 1, 1.0),)


def test_oracles_agree_on_random_disks():
    inst = _random_disks(200, random.Random(7))
    assert solve_naive(inst) == solve_simulation(inst)


def test_oracles_agree_on_squares_and_rectangles():
    rng = random.Random(3)
    pts = sorted({(rng.random(), rng.random()) for _ in range(80)})
    sq = make_instance("square_linf", pts, [rng.uniform(0.5, 2) for _ in pts])
    assert solve_naive(sq) == solve_simulation(sq)
    rect = make_instance(
        "rectangle", pts, [(rng.uniform(0.5, 2), rng.uniform(0.5, 2)) for _ in pts]
    )
    assert solve_naive(rect) == solve_simulation(rect)


def test_oracles_agree_on_balls_3d():
    rng = random.Random(5)
    pts = sorted({(rng.random(), rng.random(), rng.random()) for _ in range(60)})
    inst = make_instance("ball_d", pts, [rng.uniform(0.5, 2) for _ in pts])
    assert solve_naive(inst) == solve_simulation(inst)


def test_simulation_size_limit():
    n = SIMULATION_MAX_N + 1
    pts = [(float(i), 0.0) for i in range(n)]
    inst = make_instance("disk_l2", pts, [1.0] * n)
    with pytest.raises(ValueError):
        solve_simulation(inst)


def test_eliminator_was_alive_property():
    # for each victim i and every j < i touching earlier than t_i,
    # j must itself have died before that touch
    inst = _random_disks(60, random.Random(11))
    sched = solve_naive(inst)
    check_schedule(inst, sched)
    t = {1: math.inf}
    for r in sched.records:
        t[r.victim] = r.time
    for i in range(2, inst.n + 1):
        for j in range(1, i):
            tij = touch_time(inst, i, j)
            if tij < t[i]:
                assert t[j] < tij


def test_appending_lowest_priority_shape_is_stable():
    rng = random.Random(13)
    inst = _random_disks(50, rng)
    bigger = make_instance(
        "disk_l2",
        list(inst.centers) + [(0.5, 0.123456)],
        [r[0] for r in inst.rates] + [1.5],
    )
    small = {r.victim: r for r in solve_naive(inst).records}
    big = {r.victim: r for r in solve_naive(bigger).records}
    for v, r in small.items():
        assert big[v] == r
