"""Near-linear solver for growing squares in the plane.

Splits the neighbors of each square into four diagonal quadrants; inside
one quadrant the L-inf distance degenerates to a single coordinate, so
"first square to reach me" becomes a ray-shooting query against the lower
envelope of decreasing line segments. Range trees over the rotated
coordinates (u, w) = (x + y, y - x) select each quadrant, and a prefix
tree over priorities lets square i query exactly the structures built
over indices 1..i-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .core import (
    EliminationSchedule,
    Instance,
    Record,
    validate_instance,
)

INF = math.inf


@dataclass(frozen=True)
class EnvelopeSegment:
    """Moving boundary of one square along the query coordinate:
    value(t) = intercept + slope * t, alive for t in [0, domain_end]."""

    owner: int
    intercept: float
    slope: float
    domain_end: float

    def __post_init__(self):
        if self.slope >= 0:
            raise ValueError("segment slope must be negative")
        if self.domain_end <= 0:
            raise ValueError("segment domain must extend past t=0")

    def value(self, t: float) -> float:
        return self.intercept + self.slope * t


@dataclass
class Piece:
    """One linear piece of a lower envelope on [t_start, t_end)."""

    owner: int
    intercept: float
    slope: float
    t_start: float
    t_end: float

    def value(self, t: float) -> float:
        return self.intercept + self.slope * t


class _HullNode:
    """Interval-tree node over a contiguous run of envelope pieces.

    Stores the lower convex hull of the piece endpoints in its range, so
    "does the query ray dip under the envelope somewhere in this range"
    reduces to minimizing a linear functional over the hull.
    """

    __slots__ = ("lo", "hi", "left", "right", "ht", "hy", "has_inf")

    def __init__(self, lo: int, hi: int):
        self.lo = lo
        self.hi = hi
        self.left: Optional[_HullNode] = None
        self.right: Optional[_HullNode] = None
        self.ht: List[float] = []
        self.hy: List[float] = []
        self.has_inf = False


def _lower_hull(points: List[Tuple[float, float]]) -> Tuple[List[float], List[float]]:
    # points come sorted by t; on equal t keep the lower value
    filtered: List[Tuple[float, float]] = []
    for p in points:
        if filtered and filtered[-1][0] == p[0]:
            if p[1] < filtered[-1][1]:
                filtered[-1] = p
            continue
        filtered.append(p)
    hull: List[Tuple[float, float]] = []
    for p in filtered:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) <= (p[0] - x1) * (y2 - y1):
                hull.pop()
            else:
                break
        hull.append(p)
    return [p[0] for p in hull], [p[1] for p in hull]


def _hull_min(ht: List[float], hy: List[float], vq: float) -> float:
    """Minimum of y - vq*t over the hull vertices (convex in vertex order)."""
    lo, hi = 0, len(ht) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if hy[mid] - vq * ht[mid] <= hy[mid + 1] - vq * ht[mid + 1]:
            hi = mid
        else:
            lo = mid + 1
    return hy[lo] - vq * ht[lo]


@dataclass
class LowerEnvelope:
    """Lower envelope of decreasing segments, with the hull-augmented
    interval tree used for first-hit ray shooting."""

    pieces: List[Piece]
    root: _HullNode = field(repr=False, default=None)  # type: ignore[assignment]

    @property
    def n_pieces(self) -> int:
        return len(self.pieces)

    @property
    def horizon(self) -> float:
        return self.pieces[-1].t_end

    def value(self, t: float) -> float:
        """Envelope value at t (inf past the horizon).

        Segment domains are closed, so at a breakpoint the envelope is the
        lower of the two adjacent pieces.
        """
        lo, hi = 0, len(self.pieces) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.pieces[mid].t_start <= t:
                lo = mid
            else:
                hi = mid - 1
        p = self.pieces[lo]
        out = p.value(t) if t <= p.t_end else INF
        if t == p.t_start and lo > 0 and self.pieces[lo - 1].t_end == t:
            out = min(out, self.pieces[lo - 1].value(t))
        return out


def _emit(out: List[Piece], owner: int, intercept: float, slope: float,
          t0: float, t1: float) -> None:
    if t1 <= t0:
        return
    if out:
        last = out[-1]
        if (last.owner == owner and last.t_end == t0
                and last.intercept == intercept and last.slope == slope):
            last.t_end = t1
            return
    out.append(Piece(owner, intercept, slope, t0, t1))


def _merge(a: List[Piece], b: List[Piece]) -> List[Piece]:
    out: List[Piece] = []
    ia = ib = 0
    t = 0.0
    while ia < len(a) or ib < len(b):
        pa = a[ia] if ia < len(a) else None
        pb = b[ib] if ib < len(b) else None
        if pa is not None and pa.t_end <= t:
            ia += 1
            continue
        if pb is not None and pb.t_end <= t:
            ib += 1
            continue
        if pa is None or (pa is not None and pa.t_start > t):
            pa = None
        if pb is None or (pb is not None and pb.t_start > t):
            pb = None
        if pa is None and pb is None:
            break
        if pb is None:
            tn = a[ia].t_end
            _emit(out, a[ia].owner, a[ia].intercept, a[ia].slope, t, tn)
            t = tn
            continue
        if pa is None:
            tn = b[ib].t_end
            _emit(out, b[ib].owner, b[ib].intercept, b[ib].slope, t, tn)
            t = tn
            continue
        tn = min(pa.t_end, pb.t_end)
        d0 = pa.value(t) - pb.value(t)
        ds = pa.slope - pb.slope
        a_wins = d0 < 0 or (d0 == 0 and (ds < 0 or (ds == 0 and pa.owner < pb.owner)))
        win, lose = (pa, pb) if a_wins else (pb, pa)
        dw = -abs(d0)
        dsw = ds if a_wins else -ds
        tc = tn
        if dw < 0 and dsw > 0:
            cross = t + (-dw) / dsw
            if cross < tn:
                tc = cross
        _emit(out, win.owner, win.intercept, win.slope, t, tc)
        if tc < tn:
            _emit(out, lose.owner, lose.intercept, lose.slope, tc, tn)
        t = tn
    return out


def _build_hull_tree(pieces: List[Piece], lo: int, hi: int) -> _HullNode:
    node = _HullNode(lo, hi)
    pts: List[Tuple[float, float]] = []
    for k in range(lo, hi):
        p = pieces[k]
        pts.append((p.t_start, p.value(p.t_start)))
        if p.t_end == INF:
            node.has_inf = True
        else:
            pts.append((p.t_end, p.value(p.t_end)))
    node.ht, node.hy = _lower_hull(pts)
    if hi - lo > 1:
        mid = (lo + hi) // 2
        node.left = _build_hull_tree(pieces, lo, mid)
        node.right = _build_hull_tree(pieces, mid, hi)
    return node


def build_envelope(segments: Sequence[EnvelopeSegment]) -> LowerEnvelope:
    """Lower envelope by divide-and-conquer merging; at most 2m - 1 pieces."""
    if not segments:
        raise ValueError("cannot build an envelope of zero segments")

    def rec(lo: int, hi: int) -> List[Piece]:
        if hi - lo == 1:
            s = segments[lo]
            return [Piece(s.owner, s.intercept, s.slope, 0.0, s.domain_end)]
        mid = (lo + hi) // 2
        return _merge(rec(lo, mid), rec(mid, hi))

    pieces = rec(0, len(segments))
    return LowerEnvelope(pieces, _build_hull_tree(pieces, 0, len(pieces)))


def _crosses(node: _HullNode, yq: float, vq: float) -> bool:
    if node.has_inf:
        return True
    return _hull_min(node.ht, node.hy, vq) <= yq


def ray_shoot(env: LowerEnvelope, y_q: float, v_q: float) -> Optional[Tuple[int, float]]:
    """First t >= 0 where the upward ray y_q + v_q*t meets the envelope.

    Left-first descent: the first hit lies in the leftmost subtree whose
    piece endpoints dip under the ray. Returns (owner, time) or None.
    """
    node = env.root
    if not _crosses(node, y_q, v_q):
        return None
    while node.left is not None:
        node = node.left if _crosses(node.left, y_q, v_q) else node.right
    p = env.pieces[node.lo]
    t = (p.intercept - y_q) / (v_q - p.slope)
    return p.owner, t


# quadrant codes: conditions on (u, w) = (x + y, y - x) relative to the query
# and the coordinate whose gap equals the L-inf distance inside the quadrant
_QUADRANTS = (
    ("north", +1, +1),  # u >= u_q, w >= w_q; gap along +y
    ("south", -1, -1),  # u <= u_q, w <= w_q; gap along -y
    ("east", +1, -1),   # u >= u_q, w <= w_q; gap along +x
    ("west", -1, +1),   # u <= u_q, w >= w_q; gap along -x
)


def _quadrant_coord(name: str, x: float, y: float) -> float:
    if name == "north":
        return y
    if name == "south":
        return -y
    if name == "east":
        return x
    return -x


class _SecondaryTree:
    """Balanced tree over entries sorted by w; every node carries the
    lower envelope of its range's segments."""

    __slots__ = ("ws", "env", "left", "right")

    def __init__(self, ws: List[float], segs: List[EnvelopeSegment]):
        self.ws = ws
        self.left: Optional[_SecondaryTree] = None
        self.right: Optional[_SecondaryTree] = None
        if len(ws) > 1:
            mid = len(ws) // 2
            self.left = _SecondaryTree(ws[:mid], segs[:mid])
            self.right = _SecondaryTree(ws[mid:], segs[mid:])
            # reuse the children's envelopes instead of restarting from segments
            pieces = _merge(self.left.env.pieces, self.right.env.pieces)
        else:
            s = segs[0]
            pieces = [Piece(s.owner, s.intercept, s.slope, 0.0, s.domain_end)]
        self.env = LowerEnvelope(pieces, _build_hull_tree(pieces, 0, len(pieces)))

    def query(self, w_q: float, w_side: int, y_q: float, v_q: float,
              best: Tuple[float, int]) -> Tuple[float, int]:
        # canonical decomposition of {w >= w_q} or {w <= w_q}
        if w_side > 0:
            inside = self.ws[0] >= w_q
            outside = self.ws[-1] < w_q
        else:
            inside = self.ws[-1] <= w_q
            outside = self.ws[0] > w_q
        if outside:
            return best
        if inside:
            hit = ray_shoot(self.env, y_q, v_q)
            if hit is not None:
                owner, t = hit
                if (t, owner) < best:
                    best = (t, owner)
            return best
        best = self.left.query(w_q, w_side, y_q, v_q, best)
        return self.right.query(w_q, w_side, y_q, v_q, best)


class _PrimaryTree:
    """Balanced tree over entries sorted by u; a node fully inside the
    u-range hands off to its secondary tree on w."""

    __slots__ = ("us", "secondary", "left", "right")

    def __init__(self, us: List[float], entries: List[Tuple[float, EnvelopeSegment]]):
        self.us = us
        order = sorted(range(len(entries)), key=lambda k: entries[k][0])
        ws = [entries[k][0] for k in order]
        segs = [entries[k][1] for k in order]
        self.secondary = _SecondaryTree(ws, segs)
        self.left: Optional[_PrimaryTree] = None
        self.right: Optional[_PrimaryTree] = None
        if len(us) > 1:
            mid = len(us) // 2
            self.left = _PrimaryTree(us[:mid], entries[:mid])
            self.right = _PrimaryTree(us[mid:], entries[mid:])

    def query(self, u_q: float, u_side: int, w_q: float, w_side: int,
              y_q: float, v_q: float, best: Tuple[float, int]) -> Tuple[float, int]:
        if u_side > 0:
            inside = self.us[0] >= u_q
            outside = self.us[-1] < u_q
        else:
            inside = self.us[-1] <= u_q
            outside = self.us[0] > u_q
        if outside:
            return best
        if inside:
            return self.secondary.query(w_q, w_side, y_q, v_q, best)
        best = self.left.query(u_q, u_side, w_q, w_side, y_q, v_q, best)
        return self.right.query(u_q, u_side, w_q, w_side, y_q, v_q, best)


@dataclass(frozen=True)
class QEntry:
    """One square known to the structure: 1-based owner index, center,
    growth rate, and its final elimination time (inf if it survives)."""

    owner: int
    center: Tuple[float, float]
    rate: float
    t_final: float


class QuadrantStructure:
    """Four rotated range trees answering: among the stored squares in a
    given quadrant of q, which one does q touch first while that square
    is still alive?"""

    def __init__(self, entries: Sequence[QEntry]):
        self.trees = {}
        for name, _, _ in _QUADRANTS:
            items = []
            for e in entries:
                x, y = e.center
                coord = _quadrant_coord(name, x, y)
                seg = EnvelopeSegment(e.owner, coord, -e.rate, e.t_final)
                items.append((x + y, y - x, seg))
            items.sort(key=lambda it: it[0])
            us = [it[0] for it in items]
            sub = [(it[1], it[2]) for it in items]
            self.trees[name] = _PrimaryTree(us, sub)

    def query_quadrant(self, name: str, center: Tuple[float, float],
                       rate: float) -> Optional[Tuple[int, float]]:
        x, y = center
        u_q, w_q = x + y, y - x
        y_q = _quadrant_coord(name, x, y)
        u_side = next(s for nm, s, _ in _QUADRANTS if nm == name)
        w_side = next(s for nm, _, s in _QUADRANTS if nm == name)
        best = self.trees[name].query(u_q, u_side, w_q, w_side, y_q, rate, (INF, 0))
        if best[1] == 0:
            return None
        return best[1], best[0]

    def query(self, center: Tuple[float, float], rate: float) -> Optional[Tuple[int, float]]:
        best = (INF, 0)
        for name, u_side, w_side in _QUADRANTS:
            x, y = center
            y_q = _quadrant_coord(name, x, y)
            got = self.trees[name].query(x + y, u_side, y - x, w_side, y_q, rate, best)
            if got < best:
                best = got
        if best[1] == 0:
            return None
        return best[1], best[0]


def build_quadrant_structure(entries: Sequence[QEntry]) -> QuadrantStructure:
    return QuadrantStructure(entries)


@dataclass
class _PrefixNode:
    lo: int  # 1-based, inclusive
    hi: int  # inclusive
    left: Optional["_PrefixNode"]
    right: Optional["_PrefixNode"]
    structure: Optional[QuadrantStructure] = None


class PrefixTree:
    """Balanced tree over indices 1..n; a node's structure is built once,
    at the step its last index becomes final, so any prefix [1, i-1]
    decomposes into O(log n) already-built nodes."""

    def __init__(self, n: int):
        self.n = n
        self.completes: List[List[_PrefixNode]] = [[] for _ in range(n + 1)]
        self.root = self._build(1, n)

    def _build(self, lo: int, hi: int) -> _PrefixNode:
        if lo == hi:
            node = _PrefixNode(lo, hi, None, None)
        else:
            mid = (lo + hi) // 2
            node = _PrefixNode(lo, hi, self._build(lo, mid), self._build(mid + 1, hi))
        if hi < self.n:  # the full range is never a proper prefix
            self.completes[hi].append(node)
        return node

    def prefix_nodes(self, end: int) -> List[_PrefixNode]:
        """Maximal built nodes tiling [1, end]."""
        out: List[_PrefixNode] = []

        def rec(node: _PrefixNode) -> None:
            if node.hi <= end:
                out.append(node)
                return
            if node.lo > end:
                return
            rec(node.left)
            rec(node.right)

        if end >= 1:
            rec(self.root)
        return out


def solve_squares(instance: Instance) -> EliminationSchedule:
    """Elimination order of growing squares via quadrant ray shooting.

    Processes squares in priority order; each queries the quadrant
    structures of the O(log n) prefix nodes covering 1..i-1, then the
    nodes whose range just completed are built with final times.
    """
    if instance.shape_kind != "square_linf" or instance.dimension != 2:
        raise ValueError("squares solver requires square_linf instances in the plane")
    rep = validate_instance(instance)
    if not rep.ok:
        raise ValueError("invalid instance: " + "; ".join(rep.structural_violations))
    n = instance.n
    centers = instance.centers
    rates = [r[0] for r in instance.rates]
    t = [INF] * (n + 1)
    elim = [0] * (n + 1)
    tree = PrefixTree(n)
    for i in range(1, n + 1):
        if i > 1:
            best = (INF, 0)
            for node in tree.prefix_nodes(i - 1):
                got = node.structure.query(centers[i - 1], rates[i - 1])
                if got is not None and (got[1], got[0]) < best:
                    best = (got[1], got[0])
            t[i] = best[0]
            elim[i] = best[1]
        for node in tree.completes[i]:
            entries = [
                QEntry(j, centers[j - 1], rates[j - 1], t[j])
                for j in range(node.lo, node.hi + 1)
            ]
            node.structure = build_quadrant_structure(entries)
    recs = [Record(victim=i, eliminator=elim[i], time=t[i]) for i in range(2, n + 1)]
    recs.sort(key=lambda r: (r.time, r.eliminator, r.victim))
    return EliminationSchedule(records=tuple(recs), survivor=1)
