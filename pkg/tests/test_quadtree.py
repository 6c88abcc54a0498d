import math
import random

import numpy as np
import pytest

from growshapes.core import Record, make_instance
from growshapes.naive import solve_naive
from growshapes.quadtree import (
    build_quadtree,
    compute_cnp,
    nonempty_mask,
    normalize_points,
    pair_condition,
    solve_quadtree,
    tau,
)


def _uniform(n, seed, lo=1.0, hi=1.0):
    rng = random.Random(seed)
    pts = set()
    while len(pts) < n:
        pts.add((rng.random(), rng.random()))
    return make_instance("disk_l2", sorted(pts), [rng.uniform(lo, hi) for _ in range(n)])


def test_build_two_diagonal_points():
    tree = build_quadtree(np.array([(0.1, 0.1), (0.9, 0.9)]))
    # level-1 cells are diagonal neighbors inside two layers, so both
    # centers end up in level-2 leaves with index distance 3
    leaves = [
        (int(tree.level[w]), int(tree.cx[w]), int(tree.cy[w])) for w in tree.point_leaf
    ]
    assert sorted(leaves) == [(2, 0, 0), (2, 3, 3)]
    for w in tree.point_leaf:
        assert tree.is_leaf(int(w))


def test_build_single_point():
    tree = build_quadtree(np.array([(0.3, 0.7)]))
    assert tree.depth == 0
    assert tree.n_nodes == 1


def test_build_rejects_duplicates():
    with pytest.raises(ValueError):
        build_quadtree(np.array([(0.5, 0.5), (0.5, 0.5)]))


def test_two_empty_layers_rule_post_hoc():
    pts = np.array([(0.1, 0.5), (0.5, 0.5), (0.9, 0.5)])
    tree = build_quadtree(pts)
    occupied = {}
    for k, w in enumerate(tree.point_leaf):
        w = int(w)
        occupied.setdefault(int(tree.level[w]), set()).add(
            (int(tree.cx[w]), int(tree.cy[w]), k)
        )
    for lvl, cells in occupied.items():
        for cx, cy, k in cells:
            for ox, oy, ok in cells:
                if ok != k:
                    assert max(abs(ox - cx), abs(oy - cy)) > 2


def test_tau_values():
    tree = build_quadtree(np.array([(0.5, 0.5), (0.51, 0.51)]))
    leaf = int(tree.point_leaf[0])
    pt = (0.5, 0.5)
    assert tau(tree, leaf, pt, 1.0) == 0.0
    assert math.isclose(tau(tree, 0, pt, 1.0), math.sqrt(0.5), rel_tol=1e-15)


def test_tau_quarter_cell():
    # [0, 0.5]^2 from a tree over spread-out points; rate 2 halves the time
    tree = build_quadtree(np.array([(0.1, 0.1), (0.9, 0.9), (0.9, 0.1)]))
    node = tree.node_at(1, 0, 0)
    assert node is not None and not tree.is_leaf(node)
    got = tau(tree, node, (0.1, 0.1), 2.0)
    assert math.isclose(got, math.hypot(0.4, 0.4) / 2.0, rel_tol=1e-12)
    with pytest.raises(ValueError):
        tau(tree, node, (0.9, 0.9), 2.0)


def test_pair_condition_examples():
    # same-level edge neighbors: d = 0
    assert pair_condition(3, 2, 2, 3, 3, 2, 1.0)
    # far apart at the same level: d > 2(|a|+|b|)
    assert not pair_condition(3, 0, 0, 3, 7, 7, 1.0)
    # ancestors are never pair partners
    assert not pair_condition(3, 2, 2, 1, 0, 0, 1.0)
    assert not pair_condition(3, 2, 2, 3, 2, 2, 1.0)
    # size gap beyond 4*delta
    assert not pair_condition(4, 9, 2, 1, 1, 1, 1.0)


def test_cnp_matches_brute_force_on_64_points():
    inst = _uniform(64, 21)
    norm = normalize_points(inst.centers)
    tree = build_quadtree(norm.to_unit(inst.centers))
    got = compute_cnp(tree, 1.0).pairs()
    mask = nonempty_mask(tree)
    ids = [w for w in range(tree.n_nodes) if mask[w]]
    want = set()
    for a in ids:
        for b in ids:
            if a < b and pair_condition(
                int(tree.level[a]), int(tree.cx[a]), int(tree.cy[a]),
                int(tree.level[b]), int(tree.cx[b]), int(tree.cy[b]), 1.0,
            ):
                want.add((a, b))
    assert got == want


def test_solve_examples():
    inst = make_instance("disk_l2", [(0.0, 0.0), (4.0, 0.0), (1.0, 0.0)], [1.0] * 3)
    assert solve_quadtree(inst).records == (Record(3, 1, 0.5), Record(2, 1, 2.0))
    two = make_instance("disk_l2", [(0.0, 0.0), (3.0, 0.0)], [1.0, 2.0])
    assert solve_quadtree(two).records == (Record(2, 1, 1.0),)


def test_solve_matches_naive_256_uniform():
    inst = _uniform(256, 11, 1.0, 16.0)
    assert solve_quadtree(inst) == solve_naive(inst)


def test_solve_rejects_wrong_shape():
    inst = make_instance("square_linf", [(0.0, 0.0), (1.0, 0.0)], [1.0, 1.0])
    with pytest.raises(ValueError):
        solve_quadtree(inst)


def test_depth_tracks_spread():
    for seed, n in ((1, 64), (2, 200), (3, 500)):
        inst = _uniform(n, seed)
        from growshapes.core import compute_stats

        phi = compute_stats(inst, exact_phi=True).phi_exact
        norm = normalize_points(inst.centers)
        tree = build_quadtree(norm.to_unit(inst.centers))
        assert tree.depth <= math.log2(phi) + 4
