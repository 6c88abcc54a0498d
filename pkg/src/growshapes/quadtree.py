"""Quadtree over normalized centers, candidate node pairs, and the
tree-walk elimination solver.

The tree is stored in flat arrays (one entry per node) built level by
level with vectorized integer arithmetic on fixed-point coordinates.
Cells are half-open dyadic squares; a point's cell index at level l is
an exact right-shift of its fixed-point coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Set, Tuple

import numpy as np

from .core import (
    EliminationSchedule,
    Instance,
    Record,
    touch_time,
    validate_instance,
)

MAX_DEPTH = 31  # fixed-point bits per axis; key packing needs 2*31 < 63

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Normalization:
    """Affine map from input coordinates to the unit square."""

    translate: Tuple[float, ...]
    scale: float

    def to_unit(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return (pts - np.asarray(self.translate)) / self.scale


def normalize_points(points) -> Normalization:
    pts = np.asarray(points, dtype=np.float64)
    lo = pts.min(axis=0)
    extent = float((pts.max(axis=0) - lo).max())
    if extent == 0.0:
        extent = 1.0
    # relative padding keeps extreme points strictly inside [0, 1)
    scale = extent * (1.0 + 1e-9)
    return Normalization(translate=tuple(lo), scale=scale)


class Quadtree:
    """Flat-array quadtree.

    Children of a split node occupy four consecutive ids starting at
    ``first_child`` in (dx, dy) order (0,0),(1,0),(0,1),(1,1).
    """

    def __init__(self):
        self.level: np.ndarray = np.zeros(0, dtype=np.int64)
        self.cx: np.ndarray = np.zeros(0, dtype=np.int64)
        self.cy: np.ndarray = np.zeros(0, dtype=np.int64)
        self.parent: np.ndarray = np.zeros(0, dtype=np.int64)
        self.first_child: np.ndarray = np.zeros(0, dtype=np.int64)
        self.point_leaf: np.ndarray = np.zeros(0, dtype=np.int64)
        self.point_ix: np.ndarray = np.zeros(0, dtype=np.int64)
        self.point_iy: np.ndarray = np.zeros(0, dtype=np.int64)
        # level -> (sorted packed keys, node ids in the same order)
        self.level_index: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}

    @property
    def n_nodes(self) -> int:
        return len(self.level)

    @property
    def depth(self) -> int:
        return int(self.level.max()) if self.n_nodes else 0

    def is_leaf(self, node: int) -> bool:
        return self.first_child[node] < 0

    def cell_box(self, node: int) -> Tuple[float, float, float, float]:
        """(x0, y0, x1, y1) of the node's cell in unit-square coordinates."""
        side = 0.5 ** int(self.level[node])
        x0 = self.cx[node] * side
        y0 = self.cy[node] * side
        return (x0, y0, x0 + side, y0 + side)

    def diameter(self, node: int) -> float:
        return _SQRT2 * 0.5 ** int(self.level[node])

    def node_at(self, level: int, cx: int, cy: int) -> Optional[int]:
        entry = self.level_index.get(level)
        if entry is None:
            return None
        keys, ids = entry
        k = (cx << 32) | cy
        pos = int(np.searchsorted(keys, k))
        if pos < len(keys) and keys[pos] == k:
            return int(ids[pos])
        return None


def _pack(cx: np.ndarray, cy: np.ndarray) -> np.ndarray:
    return (cx << 32) | cy


# 5x5 neighborhood minus the center cell
_NEIGHBOR_OFFSETS = np.array(
    [(dx, dy) for dx in range(-2, 3) for dy in range(-2, 3) if (dx, dy) != (0, 0)],
    dtype=np.int64,
)


def build_quadtree(points, max_depth: int = MAX_DEPTH) -> Quadtree:
    """Build the quadtree for distinct points in the unit square.

    Splitting rule: any cell with two or more centers splits; a cell with
    one center splits while another occupied cell exists in its 5x5
    same-level neighborhood. Empty children are materialized as leaves.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array")
    n = len(pts)
    if n == 0:
        raise ValueError("need at least one point")
    if pts.min() < 0.0 or pts.max() > 1.0:
        raise ValueError("points must lie in the unit square")
    L = max_depth
    res = 1 << L
    ix = np.minimum(np.floor(pts[:, 0] * res).astype(np.int64), res - 1)
    iy = np.minimum(np.floor(pts[:, 1] * res).astype(np.int64), res - 1)
    if n >= 2 and len(np.unique(_pack(ix, iy))) != n:
        raise ValueError(
            "points coincide at the fixed-point resolution (duplicate or "
            f"closer than 2^-{L} of the unit square)"
        )

    tree = Quadtree()
    levels: List[np.ndarray] = [np.zeros(1, dtype=np.int64)]
    cxs: List[np.ndarray] = [np.zeros(1, dtype=np.int64)]
    cys: List[np.ndarray] = [np.zeros(1, dtype=np.int64)]
    parents: List[np.ndarray] = [np.full(1, -1, dtype=np.int64)]
    first_child = [np.full(1, -1, dtype=np.int64)]
    tree.level_index[0] = (np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64))
    fc_pairs: List[Tuple[np.ndarray, np.ndarray]] = []
    n_created = 1
    point_leaf = np.zeros(n, dtype=np.int64)
    active = np.arange(n)

    lvl = 0
    while len(active):
        if lvl >= L:
            raise ValueError("points too close: exceeded maximum quadtree depth")
        shift = L - lvl
        pcx = ix[active] >> shift
        pcy = iy[active] >> shift
        pkeys = _pack(pcx, pcy)
        occ_keys, inverse, counts = np.unique(
            pkeys, return_inverse=True, return_counts=True
        )
        occ_cx = occ_keys >> 32
        occ_cy = occ_keys & 0xFFFFFFFF
        # neighborhood crowding: another occupied cell within Chebyshev 2
        nb_x = occ_cx[:, None] + _NEIGHBOR_OFFSETS[:, 0][None, :]
        nb_y = occ_cy[:, None] + _NEIGHBOR_OFFSETS[:, 1][None, :]
        side = 1 << lvl
        valid = (nb_x >= 0) & (nb_x < side) & (nb_y >= 0) & (nb_y < side)
        nb_keys = _pack(np.maximum(nb_x, 0), np.maximum(nb_y, 0))
        pos = np.searchsorted(occ_keys, nb_keys)
        pos = np.minimum(pos, len(occ_keys) - 1)
        hit = valid & (occ_keys[pos] == nb_keys)
        crowded = (counts >= 2) | hit.any(axis=1)

        lvl_keys, lvl_ids = tree.level_index[lvl]
        occ_pos = np.searchsorted(lvl_keys, occ_keys)
        occ_ids = lvl_ids[occ_pos]

        # settle points whose cell does not split
        settle_mask = ~crowded[inverse]
        if settle_mask.any():
            point_leaf[active[settle_mask]] = occ_ids[inverse[settle_mask]]

        split_ids = occ_ids[crowded]
        split_cx = occ_cx[crowded]
        split_cy = occ_cy[crowded]
        m = len(split_ids)
        if m == 0:
            break
        # four children per splitting cell, consecutive ids
        child_dx = np.array([0, 1, 0, 1], dtype=np.int64)
        child_dy = np.array([0, 0, 1, 1], dtype=np.int64)
        ccx = (split_cx[:, None] * 2 + child_dx[None, :]).ravel()
        ccy = (split_cy[:, None] * 2 + child_dy[None, :]).ravel()
        cparent = np.repeat(split_ids, 4)
        cids = np.arange(n_created, n_created + 4 * m, dtype=np.int64)
        fc_update = cids[::4]
        levels.append(np.full(4 * m, lvl + 1, dtype=np.int64))
        cxs.append(ccx)
        cys.append(ccy)
        parents.append(cparent)
        first_child.append(np.full(4 * m, -1, dtype=np.int64))
        fc_pairs.append((split_ids, fc_update))
        n_created += 4 * m

        ckeys = _pack(ccx, ccy)
        order = np.argsort(ckeys)
        tree.level_index[lvl + 1] = (ckeys[order], cids[order])

        active = active[~settle_mask]
        lvl += 1

    tree.level = np.concatenate(levels)
    tree.cx = np.concatenate(cxs)
    tree.cy = np.concatenate(cys)
    tree.parent = np.concatenate(parents)
    tree.first_child = np.concatenate(first_child)
    for split_ids, fc in fc_pairs:
        tree.first_child[split_ids] = fc
    tree.point_leaf = point_leaf
    tree.point_ix = ix
    tree.point_iy = iy
    return tree


def tau(tree: Quadtree, node: int, point, rate: float,
        norm: Optional[Normalization] = None) -> float:
    """First time the growing shape centered at ``point`` covers the cell.

    ``point`` is given in the same coordinates as the tree (unit square)
    unless ``norm`` is provided, in which case cell corners are mapped to
    input coordinates first. Zero for leaves.
    """
    x0, y0, x1, y1 = tree.cell_box(node)
    if norm is not None:
        tx, ty = norm.translate
        s = norm.scale
        x0, y0, x1, y1 = tx + s * x0, ty + s * y0, tx + s * x1, ty + s * y1
    px, py = point
    if not (x0 <= px <= x1 and y0 <= py <= y1):
        raise ValueError("point lies outside the node's cell")
    if tree.is_leaf(node):
        return 0.0
    dx = max(px - x0, x1 - px)
    dy = max(py - y0, y1 - py)
    return math.sqrt(dx * dx + dy * dy) / rate


def _offsets_for(s: int, half: bool) -> np.ndarray:
    """Integer offsets (dx, dy) at the partner level that can satisfy the
    pair distance condition for level gap s (partner 2^s times larger).

    Feasibility: the minimal gap over positions of the smaller cell inside
    its ancestor is max(|d|-1, 0) * 2^s per axis (in small-cell units), and
    the condition is gap^2 <= 8 * (1 + 2^s)^2.
    """
    bound = 8.0 * (1.0 + 2.0 ** (-s)) ** 2
    lim = int(math.isqrt(int(bound))) + 2
    out = []
    for dx in range(-lim, lim + 1):
        for dy in range(-lim, lim + 1):
            if dx == 0 and dy == 0:
                continue  # self (s=0) or ancestor (s>0): related either way
            gx = max(abs(dx) - 1, 0)
            gy = max(abs(dy) - 1, 0)
            if gx * gx + gy * gy <= bound:
                if half and (dy < 0 or (dy == 0 and dx < 0)):
                    continue
                out.append((dx, dy))
    return np.array(out, dtype=np.int64)


_OFFSET_CACHE: Dict[Tuple[int, bool], np.ndarray] = {}


def _offsets(s: int, half: bool) -> np.ndarray:
    key = (s, half)
    if key not in _OFFSET_CACHE:
        _OFFSET_CACHE[key] = _offsets_for(s, half)
    return _OFFSET_CACHE[key]


def pair_condition(level_a: int, cx_a: int, cy_a: int,
                   level_b: int, cx_b: int, cy_b: int, delta: float) -> bool:
    """Exact candidate-pair test for two cells (unrelated, comparable size,
    boxes within distance 2(|a|+|b|)). Integer arithmetic throughout."""
    if level_a < level_b:
        level_a, cx_a, cy_a, level_b, cx_b, cy_b = (
            level_b, cx_b, cy_b, level_a, cx_a, cy_a,
        )
    s = level_a - level_b
    if 2.0 ** s > 4.0 * delta:
        return False
    # related iff b is a's ancestor (or the same cell)
    if (cx_a >> s) == cx_b and (cy_a >> s) == cy_b:
        return False
    scale = 1 << s
    gx = max(cx_b * scale - cx_a - 1, cx_a - (cx_b + 1) * scale, 0)
    gy = max(cy_b * scale - cy_a - 1, cy_a - (cy_b + 1) * scale, 0)
    # d <= 2(|a|+|b|)  <=>  gx^2+gy^2 <= 8 (1+2^s)^2, everything integral
    return gx * gx + gy * gy <= 8 * (1 + scale) * (1 + scale)


class CandidatePairs:
    """Symmetric candidate-pair adjacency over tree node ids (CSR layout)."""

    def __init__(self, n_nodes: int, pair_array: np.ndarray):
        # pair_array: (m, 2) deduplicated unordered pairs
        self.pair_array = pair_array
        both = np.concatenate([pair_array, pair_array[:, ::-1]])
        order = np.argsort(both[:, 0], kind="stable")
        both = both[order]
        bounds = np.searchsorted(both[:, 0], np.arange(n_nodes + 1))
        self.indptr: List[int] = bounds.tolist()
        self.partners: List[int] = both[:, 1].tolist()

    def neighbors(self, node: int) -> List[int]:
        return self.partners[self.indptr[node]:self.indptr[node + 1]]

    @property
    def n_pairs(self) -> int:
        """Unordered pair count."""
        return len(self.pair_array)

    def pairs(self) -> Set[Tuple[int, int]]:
        return {
            (int(min(a, b)), int(max(a, b))) for a, b in self.pair_array
        }


def _probe_pairs(tree: Quadtree, delta: float,
                 source_levels, targets=None, half_same_level=True):
    """Find all candidate pairs (source node, partner >= its size).

    source_levels maps level -> (cx, cy, ids) arrays of source nodes.
    Partners are looked up in ``targets`` (level -> sorted (keys, ids)),
    defaulting to the full tree level index. Returns (m, 2) id pairs,
    deduplicated, including both same-level directions only once.
    """
    smax = 0
    while 2.0 ** (smax + 1) <= 4.0 * delta:
        smax += 1
    pairs_a: List[np.ndarray] = []
    pairs_b: List[np.ndarray] = []
    for lvl, (scx, scy, sids) in source_levels.items():
        for s in range(0, min(smax, lvl) + 1):
            if targets is None:
                tgt = tree.level_index.get(lvl - s)
            else:
                t = targets.get(lvl - s)
                tgt = None if t is None else (_pack(t[0], t[1]), t[2])
            if tgt is None:
                continue
            tkeys, tids = tgt
            offs = _offsets(s, half=(s == 0 and half_same_level))
            bx = (scx >> s)[:, None] + offs[:, 0][None, :]
            by = (scy >> s)[:, None] + offs[:, 1][None, :]
            side = 1 << (lvl - s)
            valid = (bx >= 0) & (bx < side) & (by >= 0) & (by < side)
            keys = _pack(np.maximum(bx, 0), np.maximum(by, 0))
            pos = np.searchsorted(tkeys, keys)
            pos = np.minimum(pos, len(tkeys) - 1)
            hit = valid & (tkeys[pos] == keys)
            if not hit.any():
                continue
            src_idx, off_idx = np.nonzero(hit)
            a_ids = sids[src_idx]
            b_ids = tids[pos[src_idx, off_idx]]
            # exact distance filter (the offset window is a superset)
            acx, acy = scx[src_idx], scy[src_idx]
            bcx = bx[src_idx, off_idx]
            bcy = by[src_idx, off_idx]
            scale = 1 << s
            gx = np.maximum(
                np.maximum(bcx * scale - acx - 1, acx - (bcx + 1) * scale), 0
            )
            gy = np.maximum(
                np.maximum(bcy * scale - acy - 1, acy - (bcy + 1) * scale), 0
            )
            ok = gx * gx + gy * gy <= 8 * (1 + scale) * (1 + scale)
            if ok.any():
                pairs_a.append(a_ids[ok])
                pairs_b.append(b_ids[ok])
    if not pairs_a:
        return np.zeros((0, 2), dtype=np.int64)
    a = np.concatenate(pairs_a)
    b = np.concatenate(pairs_b)
    packed = np.unique(a * np.int64(1 << 32) + b)
    out = np.empty((len(packed), 2), dtype=np.int64)
    out[:, 0] = packed >> 32
    out[:, 1] = packed & 0xFFFFFFFF
    return out


def nonempty_mask(tree: Quadtree) -> np.ndarray:
    """Boolean mask over node ids: cell contains at least one center."""
    mask = np.zeros(tree.n_nodes, dtype=bool)
    ids = np.unique(tree.point_leaf)
    while len(ids):
        mask[ids] = True
        ids = np.unique(tree.parent[ids])
        ids = ids[ids >= 0]
        ids = ids[~mask[ids]]
    return mask


def compute_cnp(tree: Quadtree, delta: float) -> CandidatePairs:
    """Candidate pairs over the nonempty nodes of the tree.

    Empty cells never hold an occupant, so pairs touching them can never
    witness an elimination; dropping them keeps the pair set linear in
    practice without changing any solver output.
    """
    mask = nonempty_mask(tree)
    sources: Dict[int, Tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    for lvl, (keys, ids) in tree.level_index.items():
        keep = mask[ids]
        if keep.any():
            k, v = keys[keep], ids[keep]
            sources[lvl] = (k >> 32, k & 0xFFFFFFFF, v)
    pair_array = _probe_pairs(tree, delta, sources, targets=sources)
    return CandidatePairs(tree.n_nodes, pair_array)


def _delta(instance: Instance) -> float:
    rates = [r[0] for r in instance.rates]
    return max(rates) / min(rates)


def solve_quadtree(instance: Instance, collect_pairs: bool = False):
    """Quadtree elimination solver for growing disks in the plane.

    With collect_pairs=True returns (schedule, examined-disk-pair set).
    """
    if instance.shape_kind != "disk_l2" or instance.dimension != 2:
        raise ValueError("quadtree solver requires disk_l2 instances in the plane")
    rep = validate_instance(instance)
    if not rep.ok:
        raise ValueError("invalid instance: " + "; ".join(rep.structural_violations))
    n = instance.n
    norm = normalize_points(instance.centers)
    unit = norm.to_unit(instance.centers)
    tree = build_quadtree(unit)
    cnp = compute_cnp(tree, _delta(instance))
    indptr = cnp.indptr
    partners = cnp.partners

    centers = instance.centers
    rates = [r[0] for r in instance.rates]
    parent = tree.parent
    level = tree.level
    cx = tree.cx
    cy = tree.cy
    tx, ty = norm.translate
    S = norm.scale
    marks: List[List[int]] = [[] for _ in range(tree.n_nodes)]
    t = [math.inf] * (n + 1)
    elim = [0] * (n + 1)
    examined: Set[Tuple[int, int]] = set()
    sqrt = math.sqrt

    for i in range(1, n + 1):
        px, py = centers[i - 1]
        vi = rates[i - 1]
        nu = int(tree.point_leaf[i - 1])
        ti = math.inf
        ei = 0
        first = True
        while nu != 0:
            if first:
                tau_nu = 0.0  # the starting node is the leaf holding p_i
                first = False
            else:
                side = S * 0.5 ** int(level[nu])
                x0 = tx + cx[nu] * side
                y0 = ty + cy[nu] * side
                ddx = px - x0
                ddy = py - y0
                mx = ddx if ddx > side - ddx else side - ddx
                my = ddy if ddy > side - ddy else side - ddy
                tau_nu = sqrt(mx * mx + my * my) / vi
            if ti < tau_nu:
                break
            marks[nu].append(i)
            for other in partners[indptr[nu]:indptr[nu + 1]]:
                for j in marks[other]:
                    if collect_pairs:
                        examined.add((j, i))
                    qx, qy = centers[j - 1]
                    ex = px - qx
                    ey = py - qy
                    tij = sqrt(ex * ex + ey * ey) / (vi + rates[j - 1])
                    if t[j] >= tij and (tij < ti or (tij == ti and j < ei)):
                        ti = tij
                        ei = j
            nu = int(parent[nu])
        t[i] = ti
        elim[i] = ei

    recs = [Record(victim=i, eliminator=elim[i], time=t[i]) for i in range(2, n + 1)]
    recs.sort(key=lambda r: (r.time, r.eliminator, r.victim))
    schedule = EliminationSchedule(records=tuple(recs), survivor=1)
    if collect_pairs:
        return schedule, examined
    return schedule
