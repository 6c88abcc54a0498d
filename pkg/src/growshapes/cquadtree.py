"""Compressed quadtree: singular paths collapse to one edge, every center
hangs as a zero-size leaf, and the solver walks the compressed paths.

Cell nodes reuse the underlying quadtree's ids; the zero node of center i
(1-based) gets the virtual id ``tree.n_nodes + i - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

import numpy as np

from .core import (
    EliminationSchedule,
    Instance,
    Record,
    validate_instance,
)
from .quadtree import (
    CandidatePairs,
    MAX_DEPTH,
    Quadtree,
    _pack,
    _probe_pairs,
    build_quadtree,
    nonempty_mask,
    normalize_points,
    _delta,
)


class CompressedQuadtree:
    """Surviving-node view over a quadtree.

    A node survives if it is the root, a branching node (two or more
    nonempty children), any child of a branching node, or a nonempty
    leaf. Interior nodes of a singular path (one nonempty child each)
    and their empty children are spliced out; the path's head keeps a
    single compressed child, the path's tail.
    """

    def __init__(self, tree: Quadtree):
        self.tree = tree
        n_q = tree.n_nodes
        mask = nonempty_mask(tree)
        internal = tree.first_child >= 0
        child_count = np.zeros(n_q, dtype=np.int64)
        fc = tree.first_child[internal]
        child_count[internal] = (
            mask[fc].astype(np.int64) + mask[fc + 1] + mask[fc + 2] + mask[fc + 3]
        )
        branching = internal & (child_count >= 2)
        survive = branching | (mask & ~internal)
        survive[0] = True
        par = tree.parent
        has_parent = par >= 0
        survive[has_parent] |= branching[par[has_parent]]

        # nearest surviving weak ancestor, resolved level by level
        pi = np.arange(n_q, dtype=np.int64)
        for lvl in sorted(tree.level_index):
            if lvl == 0:
                continue
            ids = tree.level_index[lvl][1]
            dead = ids[~survive[ids]]
            pi[dead] = pi[par[dead]]
        cparent = np.full(n_q, -1, dtype=np.int64)
        surv_ids = np.nonzero(survive)[0]
        nonroot = surv_ids[surv_ids != 0]
        cparent[nonroot] = pi[par[nonroot]]

        # compressed children per surviving cell node
        ccount = np.zeros(n_q, dtype=np.int64)
        np.add.at(ccount, cparent[nonroot], 1)
        single_child = np.full(n_q, -1, dtype=np.int64)
        only = ccount[cparent[nonroot]] == 1
        single_child[cparent[nonroot[only]]] = nonroot[only]
        # a nonempty leaf's single compressed child is its zero node
        n_pts = len(tree.point_leaf)
        leaf_owner = np.full(n_q, -1, dtype=np.int64)
        leaf_owner[tree.point_leaf] = np.arange(1, n_pts + 1)
        single_child[tree.point_leaf] = n_q + np.arange(n_pts)

        self.nonempty = mask
        self.branching = branching
        self.survive = survive
        self.pi = pi
        self.cparent = cparent
        self.child_count = ccount
        self.single_child = single_child
        self.leaf_owner = leaf_owner

    @property
    def n_points(self) -> int:
        return len(self.tree.point_leaf)

    @property
    def n_nodes(self) -> int:
        """Surviving cell nodes plus one zero node per center."""
        return int(self.survive.sum()) + self.n_points

    def branching_cells(self) -> FrozenSet[Tuple[int, int, int]]:
        tree = self.tree
        ids = np.nonzero(self.branching)[0]
        return frozenset(
            (int(tree.level[w]), int(tree.cx[w]), int(tree.cy[w])) for w in ids
        )


def build_compressed_from_q(tree: Quadtree) -> CompressedQuadtree:
    return CompressedQuadtree(tree)


def _morton(ix: int, iy: int, bits: int) -> int:
    code = 0
    for l in range(1, bits + 1):
        bx = (ix >> (bits - l)) & 1
        by = (iy >> (bits - l)) & 1
        code = (code << 2) | (bx << 1) | by
    return code


@dataclass(frozen=True)
class DirectCompressed:
    """Branching cells found by Morton-order divide and conquer."""

    branching_cells: FrozenSet[Tuple[int, int, int]]
    leaf_cells: FrozenSet[Tuple[int, int, int]]


def build_compressed_direct(points, max_depth: int = MAX_DEPTH) -> DirectCompressed:
    """Compressed-tree skeleton straight from the points: sort by Morton
    code, then recursively split each range at the deepest common-prefix
    cell of its first and last code."""
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    res = 1 << max_depth
    ix = np.minimum(np.floor(pts[:, 0] * res).astype(np.int64), res - 1)
    iy = np.minimum(np.floor(pts[:, 1] * res).astype(np.int64), res - 1)
    codes = sorted(
        (_morton(int(x), int(y), max_depth), int(x), int(y)) for x, y in zip(ix, iy)
    )
    if n >= 2 and any(codes[k][0] == codes[k + 1][0] for k in range(n - 1)):
        raise ValueError("points coincide at the fixed-point resolution")
    branching: Set[Tuple[int, int, int]] = set()
    leaves: Set[Tuple[int, int, int]] = set()

    def rec(lo: int, hi: int) -> None:
        if hi - lo == 1:
            c, x, y = codes[lo]
            leaves.add((max_depth, x, y))
            return
        a, b = codes[lo][0], codes[hi - 1][0]
        diff = a ^ b
        # deepest level at which all codes in the range share a cell
        k = max_depth - (diff.bit_length() + 1) // 2
        branching.add((k, codes[lo][1] >> (max_depth - k), codes[lo][2] >> (max_depth - k)))
        shift = 2 * (max_depth - k - 1)
        start = lo
        while start < hi:
            digit = (codes[start][0] >> shift) & 3
            end = start
            while end < hi and (codes[end][0] >> shift) & 3 == digit:
                end += 1
            rec(start, end)
            start = end

    if n >= 2:
        rec(0, n)
    elif n == 1:
        leaves.add((max_depth, int(ix[0]), int(iy[0])))
    return DirectCompressed(frozenset(branching), frozenset(leaves))


def compute_cnp_c(cq: CompressedQuadtree, delta: float) -> CandidatePairs:
    """Candidate pairs of the compressed tree.

    Each surviving nonempty cell node probes upward for comparable-size
    nonempty cells within the pair distance, exactly as in the full tree;
    every partner found is replaced by its nearest surviving ancestor.
    Any pair of unrelated nonempty tree cells maps this way onto a
    compressed pair, so the walk over the compressed tree sees every disk
    pair the full walk sees.
    """
    tree = cq.tree
    sources: Dict[int, Tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    targets: Dict[int, Tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    keep_src = cq.survive & cq.nonempty
    for lvl, (keys, ids) in tree.level_index.items():
        ne = cq.nonempty[ids]
        if ne.any():
            k, v = keys[ne], ids[ne]
            targets[lvl] = (k >> 32, k & 0xFFFFFFFF, v)
        sv = keep_src[ids]
        if sv.any():
            k, v = keys[sv], ids[sv]
            sources[lvl] = (k >> 32, k & 0xFFFFFFFF, v)
    raw = _probe_pairs(tree, delta, sources, targets=targets, half_same_level=False)
    if len(raw) == 0:
        return CandidatePairs(tree.n_nodes, raw)
    a = raw[:, 0]
    b = cq.pi[raw[:, 1]]
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    packed = np.unique(lo * np.int64(1 << 32) + hi)
    pairs = np.empty((len(packed), 2), dtype=np.int64)
    pairs[:, 0] = packed >> 32
    pairs[:, 1] = packed & 0xFFFFFFFF
    return CandidatePairs(tree.n_nodes, pairs)


def resolve_occupant(cq: CompressedQuadtree, marks: List[List[int]],
                     node: int) -> Optional[int]:
    """Occupant of a compressed-tree cell node during a solve.

    The node's own most recent mark wins; an unmarked node with a single
    compressed child answers with that child's occupant (a leaf answers
    with its center's zero node, which is always occupied by its owner).
    """
    if marks[node]:
        return marks[node][-1]
    c = int(cq.single_child[node])
    if c < 0:
        return None
    n_q = cq.tree.n_nodes
    if c >= n_q:
        return c - n_q + 1
    return marks[c][-1] if marks[c] else None


def solve_cquadtree(instance: Instance, collect_pairs: bool = False):
    """Compressed-tree elimination solver for growing disks in the plane.

    Disk i starts at its zero node and climbs compressed edges while its
    current bound is at least the cell cover time. A node's occupant list
    extends one compressed edge down (a path head answers for its tail, a
    leaf for its center), matching where marks can actually sit.
    """
    if instance.shape_kind != "disk_l2" or instance.dimension != 2:
        raise ValueError("compressed solver requires disk_l2 instances in the plane")
    rep = validate_instance(instance)
    if not rep.ok:
        raise ValueError("invalid instance: " + "; ".join(rep.structural_violations))
    n = instance.n
    norm = normalize_points(instance.centers)
    unit = norm.to_unit(instance.centers)
    tree = build_quadtree(unit)
    cq = build_compressed_from_q(tree)
    cnp = compute_cnp_c(cq, _delta(instance))
    indptr = cnp.indptr
    partners = cnp.partners

    centers = instance.centers
    rates = [r[0] for r in instance.rates]
    cparent = cq.cparent
    child_count = cq.child_count
    single_child = cq.single_child
    leaf_owner = cq.leaf_owner
    level = tree.level
    cx = tree.cx
    cy = tree.cy
    n_q = tree.n_nodes
    tx, ty = norm.translate
    S = norm.scale
    marks: List[List[int]] = [[] for _ in range(n_q)]
    t = [math.inf] * (n + 1)
    elim = [0] * (n + 1)
    examined: Set[Tuple[int, int]] = set()
    sqrt = math.sqrt

    def examine(node: int, i: int, px: float, py: float, vi: float,
                ti: float, ei: int) -> Tuple[float, int]:
        for other in partners[indptr[node]:indptr[node + 1]]:
            cand = marks[other]
            c = single_child[other]
            if c >= 0:
                if c >= n_q:
                    # zero node of center c - n_q + 1, marked once processed
                    owner = c - n_q + 1
                    cand = cand + [owner] if owner < i else cand
                else:
                    cand = cand + marks[c]
            for j in cand:
                if j == i:
                    continue
                if collect_pairs:
                    examined.add((j, i))
                qx, qy = centers[j - 1]
                ex = px - qx
                ey = py - qy
                tij = sqrt(ex * ex + ey * ey) / (vi + rates[j - 1])
                if t[j] >= tij and (tij < ti or (tij == ti and j < ei)):
                    ti = tij
                    ei = j
        return ti, ei

    for i in range(1, n + 1):
        px, py = centers[i - 1]
        vi = rates[i - 1]
        leaf = int(tree.point_leaf[i - 1])
        ti = math.inf
        ei = 0
        # the zero node is always marked; the leaf answers for it
        ti, ei = examine(leaf, i, px, py, vi, ti, ei)
        w = leaf
        while True:
            side = S * 0.5 ** int(level[w])
            x0 = tx + cx[w] * side
            y0 = ty + cy[w] * side
            ddx = px - x0
            ddy = py - y0
            mx = ddx if ddx > side - ddx else side - ddx
            my = ddy if ddy > side - ddy else side - ddy
            tau_w = sqrt(mx * mx + my * my) / vi
            if ti < tau_w:
                break
            marks[w].append(i)
            if w != leaf:
                ti, ei = examine(w, i, px, py, vi, ti, ei)
            h = int(cparent[w])
            if h < 0:
                break
            if child_count[h] == 1:
                # w's mark makes i the head's occupant right away
                ti, ei = examine(h, i, px, py, vi, ti, ei)
            if h == 0:
                break
            w = h
        t[i] = ti
        elim[i] = ei

    recs = [Record(victim=i, eliminator=elim[i], time=t[i]) for i in range(2, n + 1)]
    recs.sort(key=lambda r: (r.time, r.eliminator, r.victim))
    schedule = EliminationSchedule(records=tuple(recs), survivor=1)
    if collect_pairs:
        return schedule, examined
    return schedule
