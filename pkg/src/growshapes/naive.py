"""Reference solvers: quadratic priority sweep and priority-queue simulation.

Both are trusted oracles for the tree-based solvers; they share the
touch-time formulas so agreement is bit-exact.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from .core import (
    EliminationSchedule,
    Instance,
    Record,
    touch_time,
    validate_instance,
)

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

SIMULATION_MAX_N = 20_000

# metric codes for the compiled sweep
_METRIC_L2 = 0
_METRIC_LINF = 1


def _sweep(coords, rates, metric):
    """Lemma-style quadratic sweep over scalar-rate shapes.

    coords: (n, d) array; rates: (n,) array. Returns (times, eliminators)
    with 0-based eliminator indices (-1 for the survivor).
    """
    n = coords.shape[0]
    d = coords.shape[1]
    t = np.full(n, np.inf)
    elim = np.full(n, -1, dtype=np.int64)
    for i in range(1, n):
        vi = rates[i]
        best = np.inf
        bj = -1
        for j in range(i):
            if metric == 0:
                s = 0.0
                for a in range(d):
                    dx = coords[j, a] - coords[i, a]
                    s += dx * dx
                tij = math.sqrt(s) / (rates[j] + vi)
            else:
                m = 0.0
                for a in range(d):
                    dx = abs(coords[j, a] - coords[i, a])
                    if dx > m:
                        m = dx
                tij = m / (rates[j] + vi)
            # strict < keeps the smallest eliminator index on exact ties
            if t[j] >= tij and tij < best:
                best = tij
                bj = j
        t[i] = best
        elim[i] = bj
    return t, elim


if _HAVE_NUMBA:
    _sweep_compiled = njit(cache=True)(_sweep)
else:  # pragma: no cover
    _sweep_compiled = _sweep


def _schedule_from_arrays(n, times, elims) -> EliminationSchedule:
    recs = [
        Record(victim=i + 1, eliminator=int(elims[i]) + 1, time=float(times[i]))
        for i in range(1, n)
    ]
    recs.sort(key=lambda r: (r.time, r.eliminator, r.victim))
    return EliminationSchedule(records=tuple(recs), survivor=1)


def solve_naive(instance: Instance) -> EliminationSchedule:
    """Iterative quadratic sweep: shape i dies at the earliest touch time
    with a higher-priority shape that is still alive then."""
    rep = validate_instance(instance)
    if not rep.ok:
        raise ValueError("invalid instance: " + "; ".join(rep.structural_violations))
    n = instance.n
    kind = instance.shape_kind
    if kind in ("disk_l2", "ball_d", "square_linf"):
        coords = np.asarray(instance.centers, dtype=np.float64)
        rates = np.asarray([r[0] for r in instance.rates], dtype=np.float64)
        metric = _METRIC_LINF if kind == "square_linf" else _METRIC_L2
        times, elims = _sweep_compiled(coords, rates, metric)
        return _schedule_from_arrays(n, times, elims)
    # rectangles/boxes: per-axis rates, plain loop
    t = [math.inf] * (n + 1)
    elim = [0] * (n + 1)
    for i in range(2, n + 1):
        for j in range(1, i):
            tij = touch_time(instance, i, j)
            if t[j] >= tij and tij < t[i]:
                t[i] = tij
                elim[i] = j
    recs = [Record(victim=i, eliminator=elim[i], time=t[i]) for i in range(2, n + 1)]
    recs.sort(key=lambda r: (r.time, r.eliminator, r.victim))
    return EliminationSchedule(records=tuple(recs), survivor=1)


def solve_simulation(instance: Instance) -> EliminationSchedule:
    """Event simulation: all C(n,2) touch events popped in time order,
    applied when both shapes are still alive (lazy deletion)."""
    rep = validate_instance(instance)
    if not rep.ok:
        raise ValueError("invalid instance: " + "; ".join(rep.structural_violations))
    n = instance.n
    if n > SIMULATION_MAX_N:
        raise ValueError(
            f"simulation materializes all pairs; n={n} exceeds limit {SIMULATION_MAX_N}"
        )
    events = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            events.append((touch_time(instance, i, j), i, j))
    heapq.heapify(events)
    alive = [True] * (n + 1)
    t = [math.inf] * (n + 1)
    elim = [0] * (n + 1)
    remaining = n - 1
    while events and remaining:
        tt, i, j = heapq.heappop(events)
        if not (alive[i] and alive[j]):
            continue
        alive[j] = False
        t[j] = tt
        elim[j] = i
        remaining -= 1
    recs = [Record(victim=i, eliminator=elim[i], time=t[i]) for i in range(2, n + 1)]
    recs.sort(key=lambda r: (r.time, r.eliminator, r.victim))
    return EliminationSchedule(records=tuple(recs), survivor=1)
