import math
import random

import numpy as np
import pytest

from growshapes.core import Record, make_instance
from growshapes.cquadtree import (
    build_compressed_direct,
    build_compressed_from_q,
    compute_cnp_c,
    resolve_occupant,
    solve_cquadtree,
)
from growshapes.naive import solve_naive
from growshapes.quadtree import (
    build_quadtree,
    compute_cnp,
    normalize_points,
    pair_condition,
    solve_quadtree,
)


def _uniform_points(n, seed):
    rng = random.Random(seed)
    pts = set()
    while len(pts) < n:
        pts.add((rng.random(), rng.random()))
    return sorted(pts)


def _uniform(n, seed, lo=1.0, hi=1.0):
    rng = random.Random(seed)
    pts = _uniform_points(n, seed)
    return make_instance("disk_l2", pts, [rng.uniform(lo, hi) for _ in range(n)])


def test_two_corner_points_structure():
    tree = build_quadtree(np.array([(0.1, 0.1), (0.9, 0.9)]))
    cq = build_compressed_from_q(tree)
    # root branches; its 4 level-1 children survive (2 of them heads of
    # compressed paths down to the level-2 leaves); plus 2 zero nodes
    assert cq.n_nodes == 9
    assert int(cq.branching.sum()) == 1 and cq.branching[0]
    for w in tree.point_leaf:
        w = int(w)
        assert cq.survive[w]
        head = int(cq.cparent[w])
        assert tree.level[head] == 1 and cq.single_child[head] == w
    assert cq.branching_cells() == frozenset({(0, 0, 0)})


def test_single_point_structure():
    tree = build_quadtree(np.array([(0.4, 0.6)]))
    cq = build_compressed_from_q(tree)
    # root -- compressed edge -- zero node
    assert cq.n_nodes == 2
    assert int(cq.single_child[0]) == tree.n_nodes  # the zero node id


def test_one_or_four_children():
    tree = build_quadtree(np.array(_uniform_points(64, 17)))
    cq = build_compressed_from_q(tree)
    internal = np.nonzero(cq.survive & (cq.child_count > 0))[0]
    for w in internal:
        assert cq.child_count[w] in (1, 4)


def test_node_budget():
    for seed, n in ((1, 64), (2, 512), (3, 2048)):
        tree = build_quadtree(np.array(_uniform_points(n, seed)))
        cq = build_compressed_from_q(tree)
        assert cq.n_nodes <= 10 * n + 2


def test_resolve_occupant():
    tree = build_quadtree(np.array([(0.1, 0.1), (0.9, 0.9)]))
    cq = build_compressed_from_q(tree)
    marks = [[] for _ in range(tree.n_nodes)]
    leaf = int(tree.point_leaf[1])
    # an unmarked leaf answers with its zero node's owner
    assert resolve_occupant(cq, marks, leaf) == 2
    marks[leaf].append(1)
    assert resolve_occupant(cq, marks, leaf) == 1
    # unmarked branching root: no single child to fall through
    assert resolve_occupant(cq, marks, 0) is None


def test_cnp_c_two_corner_points():
    tree = build_quadtree(np.array([(0.1, 0.1), (0.9, 0.9)]))
    cq = build_compressed_from_q(tree)
    got = compute_cnp_c(cq, 1.0).pairs()
    # brute force: pi-image of every nonempty unrelated cell pair that
    # passes the two conditions
    want = set()
    from growshapes.quadtree import nonempty_mask

    mask = nonempty_mask(tree)
    ids = [w for w in range(tree.n_nodes) if mask[w]]
    for a in ids:
        for b in ids:
            if a >= b:
                continue
            if pair_condition(
                int(tree.level[a]), int(tree.cx[a]), int(tree.cy[a]),
                int(tree.level[b]), int(tree.cx[b]), int(tree.cy[b]), 1.0,
            ):
                u, v = int(cq.pi[a]), int(cq.pi[b])
                if u != v:
                    want.add((min(u, v), max(u, v)))
    assert got == want
    # the two level-2 leaves: d = sqrt(8)/4 <= 2(|a|+|b|) = sqrt(2), a pair
    leaves = [int(w) for w in tree.point_leaf]
    assert (min(leaves), max(leaves)) in got


def test_cnp_c_single_point():
    tree = build_quadtree(np.array([(0.4, 0.6)]))
    cq = build_compressed_from_q(tree)
    assert compute_cnp_c(cq, 1.0).n_pairs == 0


def test_cnp_c_superset_of_pi_images():
    inst = _uniform(128, 29)
    norm = normalize_points(inst.centers)
    tree = build_quadtree(norm.to_unit(inst.centers))
    cq = build_compressed_from_q(tree)
    cnp = compute_cnp(tree, 1.0)
    cnp_c = compute_cnp_c(cq, 1.0).pairs()
    for a, b in cnp.pairs():
        u, v = int(cq.pi[a]), int(cq.pi[b])
        if u != v:
            assert (min(u, v), max(u, v)) in cnp_c


def test_parent_pairs_remain_pairs():
    # any stored pair with distinct parents still passes the conditions
    # one level up
    inst = _uniform(96, 31)
    norm = normalize_points(inst.centers)
    tree = build_quadtree(norm.to_unit(inst.centers))
    cnp = compute_cnp(tree, 1.0)
    for a, b in list(cnp.pairs())[:2000]:
        pa, pb = int(tree.parent[a]), int(tree.parent[b])
        if pa < 0 or pb < 0 or pa == pb:
            continue
        ra = (int(tree.level[pa]), int(tree.cx[pa]), int(tree.cy[pa]))
        rb = (int(tree.level[pb]), int(tree.cx[pb]), int(tree.cy[pb]))
        related = False
        if ra[0] >= rb[0]:
            s = ra[0] - rb[0]
            related = (ra[1] >> s, ra[2] >> s) == (rb[1], rb[2])
        else:
            s = rb[0] - ra[0]
            related = (rb[1] >> s, rb[2] >> s) == (ra[1], ra[2])
        if not related:
            assert pair_condition(*ra, *rb, 1.0)


def test_direct_build_matches_derived():
    for pts in ([(0.1, 0.1), (0.9, 0.9)], [(0.4, 0.6)], _uniform_points(1024, 3)):
        arr = np.array(pts)
        tree = build_quadtree(arr)
        cq = build_compressed_from_q(tree)
        direct = build_compressed_direct(arr)
        assert direct.branching_cells == cq.branching_cells()


def test_direct_build_rejects_coincident_points():
    with pytest.raises(ValueError):
        build_compressed_direct(np.array([(0.5, 0.5), (0.5, 0.5 + 1e-12)]))


def test_solve_examples():
    inst = make_instance("disk_l2", [(0.0, 0.0), (4.0, 0.0), (1.0, 0.0)], [1.0] * 3)
    assert solve_cquadtree(inst).records == (Record(3, 1, 0.5), Record(2, 1, 2.0))
    two = make_instance("disk_l2", [(0.0, 0.0), (3.0, 0.0)], [1.0, 2.0])
    assert solve_cquadtree(two).records == (Record(2, 1, 1.0),)


def test_solve_matches_other_solvers():
    inst = _uniform(512, 5, 1.0, 256.0)
    sched = solve_cquadtree(inst)
    assert sched == solve_naive(inst)
    assert sched == solve_quadtree(inst)


def test_solve_rejects_wrong_shape():
    inst = make_instance("square_linf", [(0.0, 0.0), (1.0, 0.0)], [1.0, 1.0])
    with pytest.raises(ValueError):
        solve_cquadtree(inst)
