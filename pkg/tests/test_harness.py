import json
import math
import random

import pytest

from growshapes.core import EliminationSchedule, Record, make_instance
from growshapes.cli import main
from growshapes.harness import (
    bench,
    compatible_algorithms,
    generate,
    parse_instance,
    parse_schedule,
    read_instance,
    read_schedule,
    run_solver,
    schedules_equal,
    serialize_instance,
    serialize_schedule,
    sortlb_check,
    verify,
    write_instance,
    write_schedule,
)
from growshapes.naive import solve_naive

INF = math.inf


def test_instance_round_trip_bit_exact():
    rng = random.Random(9)
    pts = sorted({(rng.random() * 7 - 3, rng.random() * 7 - 3) for _ in range(40)})
    inst = make_instance("disk_l2", pts, [rng.uniform(0.001, 900.0) for _ in pts])
    back = parse_instance(serialize_instance(inst))
    assert back == inst


def test_instance_round_trip_rect_per_axis():
    inst = make_instance(
        "rectangle", [(0.0, 0.0), (1.5, 2.25)], [(1.0, 2.0), (0.25, 3.0)]
    )
    text = serialize_instance(inst)
    assert text.splitlines()[0] == "rect 2 2"
    assert parse_instance(text) == inst


def test_instance_round_trip_ball_3d(tmp_path):
    inst = make_instance(
        "ball_d", [(0.0, 0.0, 0.0), (1.0, 2.0, 3.0)], [1.0, 0.5], dimension=3
    )
    path = str(tmp_path / "b.inst")
    write_instance(inst, path)
    assert read_instance(path) == inst


def test_parse_instance_rejects_garbage():
    with pytest.raises(ValueError):
        parse_instance("")
    with pytest.raises(ValueError):
        parse_instance("pentagon 2 1\n0 0 1\n")
    with pytest.raises(ValueError):
        parse_instance("disk 2 3\n0 0 1\n")
    with pytest.raises(ValueError):
        parse_instance("disk 2 1\n0 0\n")


def test_schedule_round_trip_with_inf(tmp_path):
    sched = EliminationSchedule(
        records=(Record(3, 1, 0.1), Record(2, 1, INF)), survivor=1
    )
    back = parse_schedule(serialize_schedule(sched))
    assert back == sched
    path = str(tmp_path / "s.sched")
    write_schedule(sched, path)
    assert read_schedule(path) == sched


def test_schedule_json_output(tmp_path):
    sched = EliminationSchedule(records=(Record(2, 1, 0.5),), survivor=1)
    path = str(tmp_path / "s.json")
    write_schedule(sched, path, as_json=True)
    with open(path) as f:
        data = json.load(f)
    assert data["survivor"] == 1
    assert data["records"] == [{"victim": 2, "eliminator": 1, "time": 0.5}]


def test_parse_schedule_rejects_bad_input():
    with pytest.raises(ValueError):
        parse_schedule("2 1 0.5\n")  # no survivor line
    with pytest.raises(ValueError):
        parse_schedule("2 1 0.5\n3 1 0.25\nsurvivor 1\n")  # out of order


def test_generate_deterministic_and_distinct():
    a = generate("uniform", 64, 42, 0.5, 2.0)
    b = generate("uniform", 64, 42, 0.5, 2.0)
    assert serialize_instance(a) == serialize_instance(b)
    assert a != generate("uniform", 64, 43, 0.5, 2.0)
    assert len(set(a.centers)) == 64


def test_generate_kinds_basic():
    for kind in ("uniform", "grid", "cluster"):
        inst = generate(kind, 30, 1, 1.0, 4.0, shape="square")
        assert inst.n == 30 and inst.shape_kind == "square_linf"
        assert all(1.0 <= r[0] <= 4.0 for r in inst.rates)
    one = generate("uniform", 1, 0)
    assert one.n == 1


def test_generate_sortlb_structure():
    n = 12
    inst = generate("sortlb", n, 7)
    assert inst.n == 2 * n
    for i in range(1, n + 1):
        assert inst.centers[i - 1] == (2.0 * i, 0.0)
        assert inst.centers[n + i - 1] == (2.0 * i, 1.0)
        assert inst.rate_scalar(i) == 1.0
    top = [inst.rate_scalar(n + i) for i in range(1, n + 1)]
    assert all(v > 1.0 for v in top)
    assert len(set(top)) == n


def test_generate_rejects_bad_args():
    with pytest.raises(ValueError):
        generate("spiral", 10, 0)
    with pytest.raises(ValueError):
        generate("uniform", 0, 0)
    with pytest.raises(ValueError):
        generate("uniform", 10, 0, rate_min=2.0, rate_max=1.0)


def test_compatible_algorithms():
    disk = generate("uniform", 4, 0)
    assert compatible_algorithms(disk) == ("naive", "sim", "quadtree", "cquadtree")
    square = generate("uniform", 4, 0, shape="square")
    assert compatible_algorithms(square) == ("naive", "sim", "squares")
    ball = make_instance("ball_d", [(0.0, 0.0, 0.0)], [1.0], dimension=3)
    assert compatible_algorithms(ball) == ("naive", "sim")
    with pytest.raises(ValueError):
        run_solver("squares", disk)
    with pytest.raises(ValueError):
        run_solver("magic", disk)


def test_schedules_equal_tolerance():
    a = EliminationSchedule(records=(Record(2, 1, 1.0),), survivor=1)
    b = EliminationSchedule(records=(Record(2, 1, 1.0 + 1e-12),), survivor=1)
    c = EliminationSchedule(records=(Record(2, 1, 1.001),), survivor=1)
    assert schedules_equal(a, b) is None
    assert schedules_equal(a, c) == 0
    d = EliminationSchedule(records=(), survivor=2)
    assert schedules_equal(a, d) == 0


def test_verify_agreement_and_divergence():
    inst = generate("uniform", 96, 3, 1.0, 8.0)
    report = verify(inst, ("naive", "sim", "quadtree", "cquadtree"))
    assert report.ok and report.divergence is None

    sq = generate("uniform", 48, 5, 0.5, 2.0, shape="square")
    assert verify(sq, ("naive", "squares"), strict=True).ok

    # corrupt one record and make sure the comparison pinpoints it
    good = solve_naive(inst)
    bad_rec = Record(good.records[4].victim, good.records[4].eliminator,
                     good.records[4].time * 1.5)
    bad = EliminationSchedule(
        records=good.records[:4] + (bad_rec,) + good.records[5:],
        survivor=good.survivor,
    )
    assert schedules_equal(good, bad) == 4


def test_verify_needs_two_algorithms():
    with pytest.raises(ValueError):
        verify(generate("uniform", 4, 0), ("naive",))


def test_bench_smoke():
    report = bench([64, 128], ["naive", "cquadtree"], seed=1, repeats=1)
    data = json.loads(report.to_json())
    assert len(data["runs"]) == 4
    for run in data["runs"]:
        assert run["seconds"] >= 0.0
        if run["algorithm"] == "cquadtree":
            assert run["node_count"] > 0 and run["pair_count"] > 0
    assert [n for n, _ in data["ratios"]["naive"]] == [64]
    assert "ratio" in report.table()


def test_sortlb_check_small():
    result = sortlb_check(32, seed=2, algos=("naive",))
    assert result.ok, result.message
    with pytest.raises(ValueError):
        sortlb_check(1)


def test_cli_gen_solve_verify(tmp_path):
    inst_path = str(tmp_path / "u.inst")
    out_path = str(tmp_path / "u.sched")
    assert main(["gen", "--kind", "uniform", "--n", "32", "--seed", "4",
                 "--rate-min", "1", "--rate-max", "4", "--out", inst_path]) == 0
    assert main(["solve", "--algo", "cquadtree", "--in", inst_path,
                 "--out", out_path]) == 0
    sched = read_schedule(out_path)
    assert sched == solve_naive(read_instance(inst_path))
    assert main(["verify", "--algo", "naive", "--algo", "quadtree",
                 "--in", inst_path]) == 0


def test_cli_error_paths(tmp_path):
    inst_path = str(tmp_path / "u.inst")
    main(["gen", "--n", "8", "--out", inst_path])
    # squares solver on a disk instance is a usage error
    assert main(["solve", "--algo", "squares", "--in", inst_path,
                 "--out", str(tmp_path / "x")]) == 2
    assert main(["solve", "--algo", "naive", "--in", str(tmp_path / "missing"),
                 "--out", str(tmp_path / "x")]) == 2


def test_cli_stats_and_sortlb(tmp_path, capsys):
    inst_path = str(tmp_path / "u.inst")
    main(["gen", "--n", "16", "--seed", "1", "--out", inst_path])
    capsys.readouterr()
    assert main(["stats", "--in", inst_path, "--exact-stats"]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["delta"] == 1.0 and stats["phi_exact"] >= 1.0
    assert main(["sortlb-check", "--n", "16", "--algo", "naive"]) == 0
