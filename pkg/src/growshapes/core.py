"""Shape definitions, touching times, schedules, and instance statistics.

All solvers share the touch-time formulas defined here so their results
are bit-for-bit comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

INF = math.inf

SHAPE_KINDS = ("disk_l2", "square_linf", "rectangle", "ball_d", "box_d")

# shapes whose growth parameter is a single scalar
_SCALAR_RATE_KINDS = ("disk_l2", "square_linf", "ball_d", "box_d")


@dataclass(frozen=True)
class Instance:
    """An ordered set of growing shapes; index order is priority order.

    Index 0 in storage is shape 1 (highest priority).  ``rates[i]`` is a
    tuple: length 1 for disks/squares/balls/boxes (a single growth rate),
    length ``dimension`` for rectangles/boxes with per-axis half-extent
    rates.
    """

    shape_kind: str
    dimension: int
    centers: Tuple[Tuple[float, ...], ...]
    rates: Tuple[Tuple[float, ...], ...]

    @property
    def n(self) -> int:
        return len(self.centers)

    def rate_scalar(self, i: int) -> float:
        """Growth rate of shape i (1-based) for scalar-rate shapes."""
        return self.rates[i - 1][0]

    def center(self, i: int) -> Tuple[float, ...]:
        return self.centers[i - 1]


def make_instance(
    shape_kind: str,
    centers: Sequence[Sequence[float]],
    rates: Sequence,
    dimension: Optional[int] = None,
) -> Instance:
    """Build an Instance, normalizing rates to tuples and checking structure."""
    if shape_kind not in SHAPE_KINDS:
        raise ValueError(f"unknown shape kind {shape_kind!r}")
    if not centers:
        raise ValueError("instance needs at least one shape")
    if dimension is None:
        dimension = len(centers[0])
    ctrs = tuple(tuple(float(c) for c in p) for p in centers)
    norm_rates: List[Tuple[float, ...]] = []
    for r in rates:
        if isinstance(r, (int, float)):
            norm_rates.append((float(r),))
        else:
            norm_rates.append(tuple(float(x) for x in r))
    inst = Instance(shape_kind, dimension, ctrs, tuple(norm_rates))
    report = validate_instance(inst)
    if report.structural_violations:
        raise ValueError("invalid instance: " + "; ".join(report.structural_violations))
    return inst


@dataclass(frozen=True)
class Record:
    victim: int
    eliminator: int
    time: float


@dataclass(frozen=True)
class EliminationSchedule:
    """n-1 elimination events sorted by time plus the surviving shape."""

    records: Tuple[Record, ...]
    survivor: int = 1

    def times(self) -> List[float]:
        return [r.time for r in self.records]


def check_schedule(instance: Instance, schedule: EliminationSchedule) -> None:
    """Assert the structural schedule invariants; raises AssertionError."""
    n = instance.n
    assert schedule.survivor == 1
    assert len(schedule.records) == n - 1
    victims = [r.victim for r in schedule.records]
    assert sorted(victims) == list(range(2, n + 1))
    elim_time = {1: INF}
    for r in schedule.records:
        elim_time[r.victim] = r.time
    prev = -INF
    for r in schedule.records:
        assert r.eliminator < r.victim
        assert r.time >= prev
        prev = r.time
        assert elim_time.get(r.eliminator, INF) >= r.time


def touch_time(instance: Instance, i: int, j: int) -> float:
    """First time shapes i and j (1-based) intersect, ignoring all others."""
    n = instance.n
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"shape index out of range: {i}, {j} (n={n})")
    if i == j:
        raise ValueError("touch_time needs two distinct shapes")
    pi, pj = instance.centers[i - 1], instance.centers[j - 1]
    ri, rj = instance.rates[i - 1], instance.rates[j - 1]
    kind = instance.shape_kind
    if kind in ("disk_l2", "ball_d"):
        # plain sqrt-of-squares (not math.dist) so every solver, including
        # vectorized ones, computes bit-identical times
        dist = math.sqrt(sum((a - b) * (a - b) for a, b in zip(pi, pj)))
        return dist / (ri[0] + rj[0])
    if kind == "square_linf":
        dist = max(abs(a - b) for a, b in zip(pi, pj))
        return dist / (ri[0] + rj[0])
    # rectangle/box: all axis intervals must overlap; the first such time is
    # the max over axes of the per-axis touching time
    if len(ri) == 1:
        ri = ri * instance.dimension
    if len(rj) == 1:
        rj = rj * instance.dimension
    return max(
        abs(a - b) / (ra + rb) for a, b, ra, rb in zip(pi, pj, ri, rj)
    )


@dataclass
class ValidationReport:
    structural_violations: List[str] = field(default_factory=list)
    general_position_ties: List[Tuple[Tuple[int, int], Tuple[int, int]]] = field(
        default_factory=list
    )

    @property
    def ok(self) -> bool:
        return not self.structural_violations

    @property
    def general_position(self) -> bool:
        return not self.general_position_ties


def _exact_touch_key(instance: Instance, i: int, j: int):
    """Exact comparable key for t(i,j) when coordinates are representable.

    For disks/balls returns |p_ip_j|^2 / (v_i+v_j)^2 as a Fraction (the
    square of the time, monotone since times are nonnegative); for L-inf
    and rectangles returns the time itself as a Fraction.
    """
    pi, pj = instance.centers[i - 1], instance.centers[j - 1]
    ri, rj = instance.rates[i - 1], instance.rates[j - 1]
    kind = instance.shape_kind
    if kind in ("disk_l2", "ball_d"):
        d2 = sum((Fraction(a) - Fraction(b)) ** 2 for a, b in zip(pi, pj))
        return d2 / (Fraction(ri[0]) + Fraction(rj[0])) ** 2
    if kind == "square_linf":
        d = max(abs(Fraction(a) - Fraction(b)) for a, b in zip(pi, pj))
        return d / (Fraction(ri[0]) + Fraction(rj[0]))
    ri_f = ri if len(ri) > 1 else ri * instance.dimension
    rj_f = rj if len(rj) > 1 else rj * instance.dimension
    return max(
        abs(Fraction(a) - Fraction(b)) / (Fraction(ra) + Fraction(rb))
        for a, b, ra, rb in zip(pi, pj, ri_f, rj_f)
    )


def validate_instance(instance: Instance, strict: bool = False) -> ValidationReport:
    """Structural checks; with strict=True also an O(n^2) general-position scan."""
    rep = ValidationReport()
    n = instance.n
    d = instance.dimension
    kind = instance.shape_kind
    if kind not in SHAPE_KINDS:
        rep.structural_violations.append(f"unknown shape kind {kind!r}")
        return rep
    if kind in ("disk_l2", "square_linf", "rectangle") and d != 2:
        rep.structural_violations.append(f"{kind} requires dimension 2, got {d}")
    if d < 1:
        rep.structural_violations.append(f"dimension must be >= 1, got {d}")
    for idx, p in enumerate(instance.centers, start=1):
        if len(p) != d:
            rep.structural_violations.append(
                f"center {idx} has {len(p)} coordinates, expected {d}"
            )
    for idx, r in enumerate(instance.rates, start=1):
        want = 1 if kind in _SCALAR_RATE_KINDS else d
        if len(r) not in (1, d) or (kind in _SCALAR_RATE_KINDS and len(r) != 1):
            if len(r) != want:
                rep.structural_violations.append(
                    f"rate {idx} has {len(r)} components, expected {want}"
                )
        if any(v <= 0 for v in r):
            rep.structural_violations.append(f"nonpositive rate at index {idx}")
    if len(instance.rates) != n:
        rep.structural_violations.append("rates and centers differ in length")
    seen = {}
    for idx, p in enumerate(instance.centers, start=1):
        if p in seen:
            rep.structural_violations.append(
                f"duplicate centers at indices {seen[p]} and {idx}"
            )
        else:
            seen[p] = idx
    if strict and rep.ok and n >= 2:
        keys = {}
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                k = _exact_touch_key(instance, i, j)
                if k in keys:
                    rep.general_position_ties.append((keys[k], (i, j)))
                else:
                    keys[k] = (i, j)
    return rep


@dataclass(frozen=True)
class InstanceStats:
    delta: float
    phi_approx: float
    alpha: float
    phi_exact: Optional[float] = None


def _morton_key(x: float, y: float, lo: Tuple[float, float], scale: float) -> int:
    bits = 21
    ix = min(int((x - lo[0]) / scale * ((1 << bits) - 1)), (1 << bits) - 1)
    iy = min(int((y - lo[1]) / scale * ((1 << bits) - 1)), (1 << bits) - 1)
    key = 0
    for b in range(bits):
        key |= ((ix >> b) & 1) << (2 * b) | ((iy >> b) & 1) << (2 * b + 1)
    return key


def _min_pairwise_distance_exact(centers: Sequence[Tuple[float, ...]]) -> float:
    best = INF
    n = len(centers)
    for i in range(n):
        for j in range(i + 1, n):
            d = math.dist(centers[i], centers[j])
            if d < best:
                best = d
    return best


def _min_pairwise_distance_approx(centers: Sequence[Tuple[float, ...]]) -> float:
    """Morton-sorted window scan, refined by a uniform-grid pass."""
    n = len(centers)
    if n == 2:
        return math.dist(centers[0], centers[1])
    if len(centers[0]) != 2:
        # higher dimensions: window scan over lexicographic sort
        pts = sorted(centers)
        best = INF
        for i in range(n):
            for j in range(i + 1, min(i + 17, n)):
                best = min(best, math.dist(pts[i], pts[j]))
        return best
    xs = [p[0] for p in centers]
    ys = [p[1] for p in centers]
    lo = (min(xs), min(ys))
    scale = max(max(xs) - lo[0], max(ys) - lo[1]) or 1.0
    pts = sorted(centers, key=lambda p: _morton_key(p[0], p[1], lo, scale))
    best = INF
    for i in range(n):
        for j in range(i + 1, min(i + 17, n)):
            best = min(best, math.dist(pts[i], pts[j]))
    # grid refinement: bucket at the candidate distance and check neighbors
    cell = best
    if cell > 0 and math.isfinite(cell):
        grid = {}
        for p in centers:
            key = (int(p[0] // cell), int(p[1] // cell))
            grid.setdefault(key, []).append(p)
        for (gx, gy), bucket in grid.items():
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    other = grid.get((gx + dx, gy + dy))
                    if not other:
                        continue
                    for p in bucket:
                        for q in other:
                            if p is q:
                                continue
                            d = math.dist(p, q)
                            if d < best:
                                best = d
    return best


def compute_stats(instance: Instance, exact_phi: bool = False) -> InstanceStats:
    """Rate ratio (exact) and spread (approximate, or exact for n <= 4096)."""
    n = instance.n
    if n < 2:
        raise ValueError("stats need at least 2 shapes")
    all_rates = [v for r in instance.rates for v in r]
    delta = max(all_rates) / min(all_rates)
    centers = instance.centers
    mins = [min(p[a] for p in centers) for a in range(instance.dimension)]
    maxs = [max(p[a] for p in centers) for a in range(instance.dimension)]
    diag = math.sqrt(sum((hi - lo) ** 2 for lo, hi in zip(mins, maxs)))
    phi_exact = None
    if exact_phi:
        if n > 4096:
            raise ValueError("exact spread limited to n <= 4096")
        dmin = _min_pairwise_distance_exact(centers)
        dmax = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                dmax = max(dmax, math.dist(centers[i], centers[j]))
        phi_exact = dmax / dmin
        phi = phi_exact
    else:
        dmin = _min_pairwise_distance_approx(centers)
        phi = diag / dmin if dmin > 0 else INF
    phi = max(phi, 1.0)
    alpha = min(math.log2(phi) if phi > 0 else 0.0, math.log2(max(delta, 1.0)))
    return InstanceStats(delta=delta, phi_approx=phi, alpha=max(alpha, 0.0), phi_exact=phi_exact)


def better_event(t_new: float, pair_new: Tuple[int, int], t_old: float, pair_old: Optional[Tuple[int, int]]) -> bool:
    """Shared tie-break: strictly earlier wins; on exact tie the
    lexicographically smaller (eliminator, victim) pair wins."""
    if t_new < t_old:
        return True
    if t_new == t_old and pair_old is not None and pair_new < pair_old:
        return True
    return t_new == t_old and pair_old is None
