"""Elimination order of growing prioritized shapes.

Shapes grow from their centers at fixed rates; whenever two touch, the
one with the larger index disappears. The package computes the full
elimination schedule with a quadratic sweep, an event simulation, full
and compressed quadtree walks (disks), and a quadrant ray-shooting
solver (squares).
"""

from .core import (
    EliminationSchedule,
    Instance,
    InstanceStats,
    Record,
    check_schedule,
    compute_stats,
    make_instance,
    touch_time,
    validate_instance,
)
from .cquadtree import build_compressed_direct, build_compressed_from_q, solve_cquadtree
from .harness import (
    bench,
    generate,
    parse_instance,
    parse_schedule,
    read_instance,
    read_schedule,
    run_solver,
    serialize_instance,
    serialize_schedule,
    sortlb_check,
    verify,
    write_instance,
    write_schedule,
)
from .naive import solve_naive, solve_simulation
from .quadtree import build_quadtree, compute_cnp, solve_quadtree
from .squares import (
    EnvelopeSegment,
    LowerEnvelope,
    build_envelope,
    build_quadrant_structure,
    ray_shoot,
    solve_squares,
)

__version__ = "0.1.0"

__all__ = [
    "EliminationSchedule",
    "EnvelopeSegment",
    "Instance",
    "InstanceStats",
    "LowerEnvelope",
    "Record",
    "bench",
    "build_compressed_direct",
    "build_compressed_from_q",
    "build_envelope",
    "build_quadrant_structure",
    "build_quadtree",
    "check_schedule",
    "compute_cnp",
    "compute_stats",
    "generate",
    "make_instance",
    "parse_instance",
    "parse_schedule",
    "ray_shoot",
    "read_instance",
    "read_schedule",
    "run_solver",
    "serialize_instance",
    "serialize_schedule",
    "solve_cquadtree",
    "solve_naive",
    "solve_quadtree",
    "solve_simulation",
    "solve_squares",
    "sortlb_check",
    "touch_time",
    "validate_instance",
    "verify",
    "write_instance",
    "write_schedule",
]
