"""Instance/schedule file formats, generators, cross-verification, and
benchmark plumbing shared by the CLI and the test suite."""

from __future__ import annotations

import json
import math
import random
import statistics
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .core import (
    EliminationSchedule,
    Instance,
    Record,
    compute_stats,
    make_instance,
    validate_instance,
)
from .cquadtree import build_compressed_from_q, compute_cnp_c, solve_cquadtree
from .naive import solve_naive, solve_simulation
from .quadtree import _delta, build_quadtree, normalize_points, solve_quadtree
from .squares import solve_squares

INF = math.inf

# file header shape word <-> internal shape kind
_SHAPE_WORDS = {
    "disk": "disk_l2",
    "square": "square_linf",
    "rect": "rectangle",
    "ball": "ball_d",
    "box": "box_d",
}
_SHAPE_KINDS = {v: k for k, v in _SHAPE_WORDS.items()}

# shapes with one rate per axis instead of a single scalar
_PER_AXIS = ("rectangle", "box_d")

ALGORITHMS = ("naive", "sim", "quadtree", "cquadtree", "squares")


def _fmt(x: float) -> str:
    if x == INF:
        return "inf"
    return format(x, ".17g")


def serialize_instance(instance: Instance) -> str:
    """Text form: header "shape d n", then one line per shape with d
    coordinates and the rate scalar (or d rate components)."""
    word = _SHAPE_KINDS[instance.shape_kind]
    lines = [f"{word} {instance.dimension} {instance.n}"]
    for p, r in zip(instance.centers, instance.rates):
        lines.append(" ".join(_fmt(v) for v in (*p, *r)))
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> Instance:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise ValueError("empty instance file")
    head = rows[0]
    if len(head) != 3 or head[0] not in _SHAPE_WORDS:
        raise ValueError(f"bad header {' '.join(head)!r}; expected 'shape d n'")
    kind = _SHAPE_WORDS[head[0]]
    d, n = int(head[1]), int(head[2])
    n_rates = d if kind in _PER_AXIS else 1
    if len(rows) - 1 != n:
        raise ValueError(f"header says n={n} but file has {len(rows) - 1} shape lines")
    centers, rates = [], []
    for row in rows[1:]:
        if len(row) != d + n_rates:
            raise ValueError(f"expected {d + n_rates} fields per line, got {len(row)}")
        vals = [float(v) for v in row]
        centers.append(tuple(vals[:d]))
        rates.append(tuple(vals[d:]))
    return make_instance(kind, centers, rates, dimension=d)


def write_instance(instance: Instance, path: str) -> None:
    with open(path, "w") as f:
        f.write(serialize_instance(instance))


def read_instance(path: str) -> Instance:
    with open(path) as f:
        return parse_instance(f.read())


def serialize_schedule(schedule: EliminationSchedule) -> str:
    lines = [f"{r.victim} {r.eliminator} {_fmt(r.time)}" for r in schedule.records]
    lines.append(f"survivor {schedule.survivor}")
    return "\n".join(lines) + "\n"


def parse_schedule(text: str) -> EliminationSchedule:
    records: List[Record] = []
    survivor = None
    for ln in text.splitlines():
        parts = ln.split()
        if not parts:
            continue
        if parts[0] == "survivor":
            survivor = int(parts[1])
            continue
        v, e, t = int(parts[0]), int(parts[1]), float(parts[2])
        records.append(Record(victim=v, eliminator=e, time=t))
    if survivor is None:
        raise ValueError("schedule file is missing the survivor line")
    prev = -INF
    for r in records:
        if r.time < prev:
            raise ValueError("schedule records are not sorted by time")
        prev = r.time
    return EliminationSchedule(records=tuple(records), survivor=survivor)


def write_schedule(schedule: EliminationSchedule, path: str, as_json: bool = False) -> None:
    with open(path, "w") as f:
        if as_json:
            json.dump(
                {
                    "records": [asdict(r) for r in schedule.records],
                    "survivor": schedule.survivor,
                },
                f,
                indent=2,
            )
            f.write("\n")
        else:
            f.write(serialize_schedule(schedule))


def read_schedule(path: str) -> EliminationSchedule:
    with open(path) as f:
        return parse_schedule(f.read())


GENERATOR_KINDS = ("uniform", "grid", "cluster", "sortlb")


def generate(
    kind: str,
    n: int,
    seed: int,
    rate_min: float = 1.0,
    rate_max: float = 1.0,
    shape: str = "disk",
    clusters: int = 8,
) -> Instance:
    """Seeded instance generator.

    uniform: i.i.d. centers in the unit square, log-uniform rates.
    grid: perturbed sqrt(n) x sqrt(n) lattice.
    cluster: tight Gaussian clusters (drives the spread up).
    sortlb: the sorting reduction; n bottom disks (2i, 0) at rate 1 and n
    top disks (2i, 1) with distinct seeded rates > 1, so the instance has
    2n disks and its elimination order sorts the top rates descending.
    """
    if kind not in GENERATOR_KINDS:
        raise ValueError(f"unknown generator kind {kind!r}")
    if n < 1:
        raise ValueError("n must be positive")
    if shape not in _SHAPE_WORDS:
        raise ValueError(f"unknown shape {shape!r}")
    if rate_min <= 0 or rate_max < rate_min:
        raise ValueError("need 0 < rate_min <= rate_max")
    rng = random.Random(seed)

    if kind == "sortlb":
        centers = [(2.0 * i, 0.0) for i in range(1, n + 1)]
        centers += [(2.0 * i, 1.0) for i in range(1, n + 1)]
        top: List[float] = []
        seen = {1.0}
        while len(top) < n:
            v = rng.uniform(1.0 + 1e-6, 100.0)
            if v not in seen:
                seen.add(v)
                top.append(v)
        return make_instance(_SHAPE_WORDS[shape], centers, [1.0] * n + top)

    shape_kind = _SHAPE_WORDS[shape]
    pts: List[Tuple[float, float]] = []
    taken = set()

    def push(x: float, y: float) -> None:
        if (x, y) not in taken:
            taken.add((x, y))
            pts.append((x, y))

    if kind == "uniform":
        while len(pts) < n:
            push(rng.random(), rng.random())
    elif kind == "grid":
        m = math.isqrt(n - 1) + 1
        cells = [(i, j) for i in range(m) for j in range(m)]
        rng.shuffle(cells)
        for i, j in cells[:n]:
            push((i + 0.5 + rng.uniform(-0.2, 0.2)) / m,
                 (j + 0.5 + rng.uniform(-0.2, 0.2)) / m)
        while len(pts) < n:
            push(rng.random(), rng.random())
    else:  # cluster
        k = max(1, min(clusters, n))
        hubs = [(rng.random(), rng.random()) for _ in range(k)]
        while len(pts) < n:
            hx, hy = hubs[rng.randrange(k)]
            push(hx + rng.gauss(0, 1e-3), hy + rng.gauss(0, 1e-3))

    def rate() -> float:
        if rate_min == rate_max:
            return rate_min
        return math.exp(rng.uniform(math.log(rate_min), math.log(rate_max)))

    if shape_kind in _PER_AXIS:
        rates = [(rate(), rate()) for _ in range(n)]
    else:
        rates = [rate() for _ in range(n)]
    return make_instance(shape_kind, pts, rates)


_SOLVERS = {
    "naive": solve_naive,
    "sim": solve_simulation,
    "quadtree": solve_quadtree,
    "cquadtree": solve_cquadtree,
    "squares": solve_squares,
}


def compatible_algorithms(instance: Instance) -> Tuple[str, ...]:
    algos = ["naive", "sim"]
    if instance.shape_kind == "disk_l2" and instance.dimension == 2:
        algos += ["quadtree", "cquadtree"]
    if instance.shape_kind == "square_linf" and instance.dimension == 2:
        algos.append("squares")
    return tuple(algos)


def run_solver(algo: str, instance: Instance) -> EliminationSchedule:
    if algo not in _SOLVERS:
        raise ValueError(f"unknown algorithm {algo!r}")
    if algo not in compatible_algorithms(instance):
        raise ValueError(
            f"algorithm {algo} does not support {instance.shape_kind} in d={instance.dimension}"
        )
    return _SOLVERS[algo](instance)


@dataclass
class Divergence:
    position: int
    algo_a: str
    algo_b: str
    record_a: Optional[Record]
    record_b: Optional[Record]

    def describe(self) -> str:
        return (
            f"schedules diverge at record {self.position}: "
            f"{self.algo_a} -> {self.record_a}, {self.algo_b} -> {self.record_b}"
        )


@dataclass
class VerifyReport:
    algorithms: Tuple[str, ...]
    ok: bool
    divergence: Optional[Divergence] = None
    general_position: bool = True
    warnings: List[str] = field(default_factory=list)


def schedules_equal(a: EliminationSchedule, b: EliminationSchedule,
                    rel_tol: float = 1e-9) -> Optional[int]:
    """Index of the first divergent record, or None if equal.

    Victims and eliminators must match exactly, times to rel_tol relative.
    """
    if a.survivor != b.survivor:
        return 0
    m = max(len(a.records), len(b.records))
    for k in range(m):
        ra = a.records[k] if k < len(a.records) else None
        rb = b.records[k] if k < len(b.records) else None
        if ra is None or rb is None:
            return k
        if ra.victim != rb.victim or ra.eliminator != rb.eliminator:
            return k
        if ra.time != rb.time and not math.isclose(ra.time, rb.time, rel_tol=rel_tol):
            return k
    return None


def verify(instance: Instance, algos: Sequence[str], strict: bool = False) -> VerifyReport:
    """Run every algorithm and compare the schedules pairwise against the
    first one; reports the first divergence."""
    algos = tuple(algos)
    if len(algos) < 2:
        raise ValueError("verify needs at least 2 algorithms")
    report = VerifyReport(algorithms=algos, ok=True)
    if strict:
        vrep = validate_instance(instance, strict=True)
        report.general_position = vrep.general_position
        if not vrep.general_position:
            report.warnings.append(
                "instance is not in strict general position; ties are broken by index"
            )
    base = run_solver(algos[0], instance)
    for other in algos[1:]:
        sched = run_solver(other, instance)
        pos = schedules_equal(base, sched)
        if pos is not None:
            ra = base.records[pos] if pos < len(base.records) else None
            rb = sched.records[pos] if pos < len(sched.records) else None
            report.ok = False
            report.divergence = Divergence(pos, algos[0], other, ra, rb)
            return report
    return report


@dataclass
class BenchRun:
    algorithm: str
    n: int
    seconds: float
    node_count: Optional[int] = None
    pair_count: Optional[int] = None
    delta: float = 1.0
    phi_approx: float = 1.0
    alpha: float = 0.0


@dataclass
class BenchReport:
    runs: List[BenchRun]
    ratios: Dict[str, List[Tuple[int, float]]]

    def to_json(self) -> str:
        return json.dumps(
            {
                "runs": [asdict(r) for r in self.runs],
                "ratios": {a: [[n, r] for n, r in rs] for a, rs in self.ratios.items()},
            },
            indent=2,
        )

    def table(self) -> str:
        lines = [f"{'algo':<10} {'n':>8} {'seconds':>10} {'nodes':>9} {'pairs':>10}"]
        for r in self.runs:
            nodes = "-" if r.node_count is None else str(r.node_count)
            pairs = "-" if r.pair_count is None else str(r.pair_count)
            lines.append(f"{r.algorithm:<10} {r.n:>8} {r.seconds:>10.3f} {nodes:>9} {pairs:>10}")
        for algo, rs in self.ratios.items():
            for n, ratio in rs:
                lines.append(f"ratio {algo}: time({2 * n})/time({n}) = {ratio:.2f}")
        return "\n".join(lines)


def _structure_counts(instance: Instance) -> Tuple[int, int]:
    norm = normalize_points(instance.centers)
    tree = build_quadtree(norm.to_unit(instance.centers))
    cq = build_compressed_from_q(tree)
    cnp = compute_cnp_c(cq, _delta(instance))
    return cq.n_nodes, cnp.n_pairs

def bench(
    n_list: Sequence[int],
    algos: Sequence[str],
    seed: int = 0,
    repeats: int = 3,
    kind: str = "uniform",
    rate_min: float = 1.0,
    rate_max: float = 1.0,
    shape: str = "disk",
) -> BenchReport:
    """Median wall time per (algorithm, n) plus structure counts and
    doubling ratios."""
    runs: List[BenchRun] = []
    ratios: Dict[str, List[Tuple[int, float]]] = {a: [] for a in algos}
    times: Dict[Tuple[str, int], float] = {}
    for n in n_list:
        instance = generate(kind, n, seed, rate_min, rate_max, shape)
        stats = compute_stats(instance)
        nodes = pairs = None
        if any(a in ("quadtree", "cquadtree") for a in algos):
            nodes, pairs = _structure_counts(instance)
        for algo in algos:
            samples = []
            for _ in range(max(1, repeats)):
                t0 = time.perf_counter()
                run_solver(algo, instance)
                samples.append(time.perf_counter() - t0)
            med = statistics.median(samples)
            times[(algo, n)] = med
            tree_algo = algo in ("quadtree", "cquadtree")
            runs.append(
                BenchRun(
                    algorithm=algo,
                    n=instance.n,
                    seconds=med,
                    node_count=nodes if tree_algo else None,
                    pair_count=pairs if tree_algo else None,
                    delta=stats.delta,
                    phi_approx=stats.phi_approx,
                    alpha=stats.alpha,
                )
            )
    for algo in algos:
        for n in n_list:
            if (algo, n) in times and (algo, 2 * n) in times and times[(algo, n)] > 0:
                ratios[algo].append((n, times[(algo, 2 * n)] / times[(algo, n)]))
    return BenchReport(runs=runs, ratios={a: r for a, r in ratios.items() if r})


@dataclass
class SortLBResult:
    ok: bool
    n: int
    message: str = ""


def sortlb_check(
    n: int,
    seed: int = 0,
    algos: Sequence[str] = ("naive", "cquadtree"),
    rel_tol: float = 1e-12,
) -> SortLBResult:
    """Sorting-reduction check: the first n eliminations must be the top
    row in decreasing rate order, each at time 1/(1+v), and all before
    any bottom-row disk dies."""
    if n < 2:
        raise ValueError("sortlb check needs n >= 2")
    instance = generate("sortlb", n, seed)
    top = [(instance.rate_scalar(n + i), n + i) for i in range(1, n + 1)]
    expected = sorted(top, key=lambda vr: -vr[0])
    for algo in algos:
        sched = run_solver(algo, instance)
        for k, (v, idx) in enumerate(expected):
            r = sched.records[k]
            want_t = 1.0 / (1.0 + v)
            if r.victim != idx:
                return SortLBResult(
                    False, n,
                    f"{algo}: record {k} eliminated {r.victim}, expected top disk {idx}; "
                    f"prefix {[x.victim for x in sched.records[:k + 1]]}",
                )
            if not math.isclose(r.time, want_t, rel_tol=rel_tol):
                return SortLBResult(
                    False, n,
                    f"{algo}: record {k} time {r.time!r} != 1/(1+v) = {want_t!r}",
                )
        last_top = sched.records[n - 1].time
        first_bottom = sched.records[n].time if len(sched.records) > n else INF
        if not last_top < first_bottom:
            return SortLBResult(
                False, n,
                f"{algo}: top row not finished ({last_top}) before bottom row ({first_bottom})",
            )
    return SortLBResult(True, n, f"top row sorted by decreasing rate under {', '.join(algos)}")
