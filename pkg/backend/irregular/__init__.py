from .gap import SEPARATION_TOLERANCE, spectrum_gap, top_sums
from .schedule import BlockStream, IrregularTarget, build_point, plan_schedule
from .witness import (
    STRICT_SLACK,
    Membership,
    certify_witness,
    on_membership,
    vector_oscillation,
    witness_membership,
)
from .pipeline import (
    ConstructionResult,
    construct,
    density_scan,
    density_scan_async,
    high_pesin_level,
    lift_to_li,
    resolve_target,
    scan_cylinders,
)

__all__ = [
    "SEPARATION_TOLERANCE",
    "spectrum_gap",
    "top_sums",
    "BlockStream",
    "IrregularTarget",
    "build_point",
    "plan_schedule",
    "STRICT_SLACK",
    "Membership",
    "certify_witness",
    "on_membership",
    "vector_oscillation",
    "witness_membership",
    "ConstructionResult",
    "construct",
    "density_scan",
    "density_scan_async",
    "high_pesin_level",
    "lift_to_li",
    "resolve_target",
    "scan_cylinders",
]
