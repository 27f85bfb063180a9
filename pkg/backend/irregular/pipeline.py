"""End-to-end construction: gap detection, planning, building and certification."""

from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass, replace
from typing import Literal, Optional, Sequence

from cocycles.exterior import exterior_power
from cocycles.matrix_cocycle import MatrixCocycle
from irregular.gap import SEPARATION_TOLERANCE, spectrum_gap
from irregular.schedule import IrregularTarget, build_point, plan_schedule
from irregular.witness import certify_witness, witness_membership
from lyapunov.metric import lyapunov_gram, pesin_certificate
from models.errors import AllSpectraEqual, CocycleToolkitError, NoGap
from models.schemas import BlockSchedule, IrregularWitness, ScanReport, ScanRow, SpectrumGapReport
from services import settings
from symbolic.points import Cylinder, ShiftPoint, cylinder_from_word
from symbolic.shift_space import ShiftSpace, Word, legal_words, word_to_text

logger = logging.getLogger(__name__)

Mode = Literal["auto", "direct", "lift"]


@dataclass(frozen=True, eq=False)
class ConstructionResult:
    target: IrregularTarget
    schedule: BlockSchedule
    point: ShiftPoint
    witness: IrregularWitness
    gap_report: Optional[SpectrumGapReport] = None


def resolve_target(
    cocycle: MatrixCocycle,
    measures: Sequence[Word],
    tau: float,
    cylinder: Cylinder,
    mode: Mode = "auto",
) -> tuple[IrregularTarget, SpectrumGapReport]:
    """Pick the exterior index and the high/low measures from the gap report."""
    report = spectrum_gap(cocycle, measures)
    if mode == "direct":
        first = report.indices[0]
        index = 1 if first.high - first.low > SEPARATION_TOLERANCE else None
        if index is None:
            raise NoGap("maximal exponents agree across the supplied measures")
    else:
        index = report.separating_index
        if index is None:
            raise AllSpectraEqual("all supplied measures have the same Lyapunov spectrum")
    by_label = {word_to_text(w): tuple(w) for w in measures}
    gap = report.indices[index - 1]
    target = IrregularTarget(
        cocycle=exterior_power(cocycle, index),
        high_word=by_label[gap.high_measure],
        low_word=by_label[gap.low_measure],
        high_exponent=gap.high,
        low_exponent=gap.low,
        tau=tau,
        cylinder=cylinder,
        exterior_index=index,
        base_cocycle=cocycle,
    )
    return target, report


def high_pesin_level(target: IrregularTarget, epsilon: Optional[float] = None) -> Optional[float]:
    """Pesin level of the high measure's orbit, or None when its Lyapunov metric cannot be built."""
    eps = target.tau / 4 if epsilon is None else epsilon
    try:
        certificate = pesin_certificate(lyapunov_gram(target.cocycle, target.high_word, eps))
    except ValueError as exc:
        logger.warning("no Pesin level for %s: %s", word_to_text(target.high_word), exc)
        return None
    return certificate.level


def construct(
    target: IrregularTarget,
    levels: int,
    epsilon: Optional[float] = None,
    margin: Optional[float] = None,
    min_time: int = 0,
    max_block: Optional[int] = None,
    seed: int = 0,
    space_hash: str = "",
    cocycle_hash: str = "",
    gap_report: Optional[SpectrumGapReport] = None,
    pesin_level: Optional[float] = None,
) -> ConstructionResult:
    schedule = plan_schedule(
        target,
        levels,
        epsilon=epsilon,
        margin=margin,
        min_time=min_time,
        max_block=max_block,
        pesin_level=pesin_level,
    )
    point = build_point(schedule, target.cylinder)
    witness = certify_witness(target.cocycle, point, schedule, target, seed, space_hash, cocycle_hash)
    return ConstructionResult(target, schedule, point, witness, gap_report)


def lift_to_li(
    cocycle: MatrixCocycle,
    measures: Sequence[Word],
    tau: float,
    cylinder: Cylinder,
    levels: int,
    **options,
) -> ConstructionResult:
    """Run the construction on the separating exterior power; its MLI points are LI for A."""
    target, report = resolve_target(cocycle, measures, tau, cylinder, mode="lift")
    logger.info("lifting through exterior power %s", target.exterior_index)
    return construct(target, levels, gap_report=report, **options)


def scan_cylinders(space: ShiftSpace, window: int) -> list[Cylinder]:
    """All cylinders fixing a legal word of the given length, centered at 0."""
    cap = settings.scan_window_cap()
    if window > cap:
        raise ValueError(f"window {window} exceeds the scan cap {cap}")
    return [cylinder_from_word(w, space) for w in legal_words(space, window)]


def _scan_one(target: IrregularTarget, n: int, levels: int, margin: Optional[float], max_block: Optional[int]) -> ScanRow:
    label = target.cylinder.label()
    try:
        result = construct(target, levels, margin=margin, min_time=n, max_block=max_block)
    except CocycleToolkitError as exc:
        logger.warning("scan of %s failed: %s", label, exc)
        return ScanRow(cylinder=label, certified=False, error=f"{type(exc).__name__}: {exc}")
    record = witness_membership(result.witness, n)
    if record is None:
        return ScanRow(cylinder=label, certified=False, error=f"no certified level beyond n={n}")
    return ScanRow(cylinder=label, certified=True, high_time=record.high_time, low_time=record.low_time)


async def density_scan_async(
    cocycle: MatrixCocycle,
    measures: Sequence[Word],
    tau: float,
    cylinders: Sequence[Cylinder],
    n: int,
    levels: int = 1,
    margin: Optional[float] = None,
    mode: Mode = "auto",
    max_block: Optional[int] = None,
) -> ScanReport:
    """Build and certify a point of O_n inside every cylinder, concurrently."""
    if not cylinders:
        raise ValueError("density scan needs at least one cylinder")
    base, _ = resolve_target(cocycle, measures, tau, cylinders[0], mode)
    targets = [replace(base, cylinder=c) for c in cylinders]
    rows = await asyncio.gather(
        *(asyncio.to_thread(_scan_one, t, n, levels, margin, max_block) for t in targets)
    )
    window = cylinders[0].hi - cylinders[0].lo + 1
    report = ScanReport(window=window, index=n, rows=list(rows))
    logger.info("density scan: %s/%s cylinders certified", report.certified, len(report.rows))
    return report


def density_scan(*args, **kwargs) -> ScanReport:
    return asyncio.run(density_scan_async(*args, **kwargs))
