"""Certification of irregular points and O_n membership checks."""

from __future__ import annotations

import logging
from typing import NamedTuple, Optional, Sequence

import numpy as np

from cocycles.matrix_cocycle import MatrixCocycle, log_norm_product, running_log_norms
from irregular.schedule import IrregularTarget
from lyapunov.spectrum import vector_log_growth
from models.errors import CertificationFailed
from models.schemas import (
    BlockSchedule,
    CylinderRecord,
    IrregularWitness,
    LevelRecord,
    VectorOscillation,
)
from services import settings
from symbolic.points import ShiftPoint

logger = logging.getLogger(__name__)

STRICT_SLACK = 1e-9


def certify_witness(
    cocycle: MatrixCocycle,
    y0: ShiftPoint,
    schedule: BlockSchedule,
    target: IrregularTarget,
    seed: int = 0,
    space_hash: str = "",
    cocycle_hash: str = "",
) -> IrregularWitness:
    """Re-evaluate every scheduled average and demand each comparison hold with slack."""
    cylinder = target.cylinder
    if not cylinder.contains(y0):
        raise CertificationFailed(0, f"constructed point leaves the cylinder {cylinder.label()}")

    records: list[LevelRecord] = []
    flags = list(zip(schedule.closed_form_high, schedule.closed_form_low))
    for k, (t_high, t_low) in enumerate(zip(schedule.high_times, schedule.low_times), start=1):
        high_avg = log_norm_product(cocycle, y0, t_high) / t_high
        if high_avg - target.high_threshold < STRICT_SLACK:
            raise CertificationFailed(
                k, f"average {high_avg:.9f} at n={t_high} does not exceed {target.high_threshold:.9f}"
            )
        low_avg = log_norm_product(cocycle, y0, t_low) / t_low
        if target.low_threshold - low_avg < STRICT_SLACK:
            raise CertificationFailed(
                k, f"average {low_avg:.9f} at n={t_low} is not below {target.low_threshold:.9f}"
            )
        records.append(
            LevelRecord(
                level=k,
                high_time=t_high,
                high_average=high_avg,
                high_threshold=target.high_threshold,
                low_time=t_low,
                low_average=low_avg,
                low_threshold=target.low_threshold,
                closed_form_high=flags[k - 1][0] if flags else None,
                closed_form_low=flags[k - 1][1] if flags else None,
            )
        )

    gap = min(r.high_average for r in records) - max(r.low_average for r in records) if records else 0.0
    i = target.exterior_index
    if i == 1:
        containment = ["y0 in MLI(A) on the tested levels"]
    else:
        containment = [
            f"y0 in MLI(wedge^{i} A) on the tested levels",
            f"MLI(wedge^{i} A) is contained in LI(A)",
        ]
    logger.info("certified %s levels, oscillation gap %.6f", len(records), gap)
    return IrregularWitness(
        space_hash=space_hash,
        cocycle_hash=cocycle_hash,
        exterior_index=i,
        high_word=list(target.high_word),
        low_word=list(target.low_word),
        high_exponent=target.high_exponent,
        low_exponent=target.low_exponent,
        tau=target.tau,
        cylinder=CylinderRecord(lo=cylinder.lo, hi=cylinder.hi, word=list(cylinder.word)),
        schedule=schedule,
        levels=records,
        oscillation_gap=gap,
        seed=seed,
        containment=containment,
    )


def witness_membership(witness: IrregularWitness, n: int) -> Optional[LevelRecord]:
    """First certified level whose two times both exceed n (a certificate of y0 in O_n)."""
    for record in witness.levels:
        if record.high_time > n and record.low_time > n:
            return record
    return None


class Membership(NamedTuple):
    found: bool
    high_time: Optional[int] = None
    low_time: Optional[int] = None


def on_membership(
    cocycle: MatrixCocycle,
    w: ShiftPoint,
    n: int,
    a: float,
    b: float,
    tau: float,
    horizon: int,
) -> Membership:
    """Search (n, horizon] for times witnessing w in O_n.

    A negative answer only means nothing was found up to the horizon.
    """
    if horizon < n:
        raise ValueError("horizon must be at least n")
    logs = running_log_norms(cocycle, w, horizon)
    times = np.arange(1, horizon + 1)
    averages = logs / times
    window = times > n
    high = np.flatnonzero(window & (averages > a - tau))
    low = np.flatnonzero(window & (averages < b + tau))
    if high.size == 0 or low.size == 0:
        return Membership(False)
    return Membership(True, int(times[high[0]]), int(times[low[0]]))


def vector_oscillation(
    cocycle: MatrixCocycle,
    y0: ShiftPoint,
    witness: IrregularWitness,
    cap: Optional[int] = None,
) -> list[VectorOscillation]:
    """Partial averages (1/t) log ‖A(y0, t) e_k‖ at the certified times below the cap."""
    cap = settings.stepwise_cap() if cap is None else cap
    times: Sequence[int] = sorted(
        t for r in witness.levels for t in (r.high_time, r.low_time) if t <= cap
    )
    out = []
    for k in range(cocycle.dimension):
        e_k = np.zeros(cocycle.dimension)
        e_k[k] = 1.0
        growth = vector_log_growth(cocycle, y0, e_k, times) if times else []
        averages = [g / t for g, t in zip(growth, times)]
        spread = max(averages) - min(averages) if averages else 0.0
        out.append(VectorOscillation(basis_index=k, averages=averages, spread=spread))
    return out
