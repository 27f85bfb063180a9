"""Block schedules for irregular points and the points they describe.

Layout after the cylinder prefix (coordinates up to ``prefix_hi``):

    bridge, H_1 high symbols, bridge, L_1 low symbols, bridge, H_2, ...

Every bridge is ``gap`` symbols long and every block is a whole number of
periods, so the three bridge words are fixed. Levels past the planned ones
continue lazily with doubling lengths.
"""

from __future__ import annotations

import bisect
import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from cocycles.matrix_cocycle import MatrixCocycle, RunEvaluator, ScaledMatrix
from models.errors import BudgetExceeded, GapTooSmall, NoGap
from models.schemas import BlockSchedule
from services import settings
from symbolic.points import Cylinder, Run, ShiftPoint, periodic_splice
from symbolic.shift_space import ShiftSpace, Word, bridge, word_to_text

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class IrregularTarget:
    """High/low periodic measures, gap parameter and the cylinder to hit.

    ``cocycle`` is the one the averages are taken for: A itself when
    ``exterior_index`` is 1, otherwise its exterior power.
    """

    cocycle: MatrixCocycle
    high_word: Word
    low_word: Word
    high_exponent: float
    low_exponent: float
    tau: float
    cylinder: Cylinder
    exterior_index: int = 1
    base_cocycle: Optional[MatrixCocycle] = field(default=None)

    def __post_init__(self) -> None:
        object.__setattr__(self, "high_word", tuple(self.high_word))
        object.__setattr__(self, "low_word", tuple(self.low_word))
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if not self.high_exponent - 2 * self.tau > self.low_exponent + 2 * self.tau:
            raise NoGap(
                f"a - 2τ = {self.high_exponent - 2 * self.tau:.6g} does not exceed "
                f"b + 2τ = {self.low_exponent + 2 * self.tau:.6g}"
            )
        space = self.cocycle.space
        space.check_word(self.high_word, cyclic=True)
        space.check_word(self.low_word, cyclic=True)
        dim = (self.base_cocycle or self.cocycle).dimension
        if not 1 <= self.exterior_index <= dim:
            raise ValueError(f"exterior index {self.exterior_index} outside 1..{dim}")

    @property
    def high_threshold(self) -> float:
        return self.high_exponent - self.tau

    @property
    def low_threshold(self) -> float:
        return self.low_exponent + self.tau


def _bridges(schedule: BlockSchedule, prefix_last: int, space: ShiftSpace) -> tuple[Word, Word, Word]:
    high, low, gap = tuple(schedule.high_word), tuple(schedule.low_word), schedule.gap
    return (
        bridge(prefix_last, high[0], gap, space),
        bridge(high[-1], low[0], gap, space),
        bridge(low[-1], high[0], gap, space),
    )


class BlockStream:
    """Right part of an irregular point, produced on demand.

    Offset 0 is the coordinate after the prefix. Pieces are appended under a
    lock, so one stream can back several points read from worker threads.
    """

    def __init__(self, schedule: BlockSchedule, prefix_last: int, space: ShiftSpace):
        self._schedule = schedule
        self._high = tuple(schedule.high_word)
        self._low = tuple(schedule.low_word)
        self._first, self._high_to_low, self._low_to_high = _bridges(schedule, prefix_last, space)
        self._starts: list[int] = []
        self._runs: list[Run] = []
        self._length = 0
        self._level = 0
        self._high_lengths = list(schedule.high_lengths)
        self._low_lengths = list(schedule.low_lengths)
        self._prefix_len = schedule.prefix_hi + 1
        self._last_low_time = schedule.prefix_hi + 1
        self._lock = threading.Lock()

    def _append(self, run: Run) -> None:
        self._starts.append(self._length)
        self._runs.append(run)
        self._length += run.length

    def _round_up(self, length: int, period: int) -> int:
        return max(period, -(-length // period) * period)

    def _extend_level(self) -> None:
        k = self._level
        if k < len(self._high_lengths):
            h, l = self._high_lengths[k], self._low_lengths[k]
        else:
            prev_h = self._high_lengths[-1] if self._high_lengths else 0
            prev_l = self._low_lengths[-1] if self._low_lengths else 0
            h = self._round_up(max(2 * self._last_low_time, prev_h + 1), len(self._high))
            high_time = self._last_low_time + self._schedule.gap + h
            l = self._round_up(max(2 * high_time, prev_l + 1), len(self._low))
            self._high_lengths.append(h)
            self._low_lengths.append(l)
        self._append(Run(self._first if k == 0 else self._low_to_high, 0, self._schedule.gap))
        self._append(Run(self._high, 0, h))
        self._append(Run(self._high_to_low, 0, self._schedule.gap))
        self._append(Run(self._low, 0, l))
        self._last_low_time = self._prefix_len + self._length
        self._level += 1

    def _ensure(self, end: int) -> None:
        if end <= self._length:
            return
        with self._lock:
            while self._length < end:
                self._extend_level()

    def symbol(self, offset: int) -> int:
        self._ensure(offset + 1)
        idx = bisect.bisect_right(self._starts, offset) - 1
        run = self._runs[idx]
        j = offset - self._starts[idx]
        return run.word[(run.phase + j) % len(run.word)]

    def runs(self, offset: int, length: int) -> Iterator[Run]:
        if length <= 0:
            return
        end = offset + length
        self._ensure(end)
        idx = bisect.bisect_right(self._starts, offset) - 1
        pos = offset
        while pos < end:
            run = self._runs[idx]
            start = self._starts[idx]
            take = min(end, start + run.length) - pos
            if take > 0:
                yield Run(run.word, (run.phase + pos - start) % len(run.word), take)
                pos += take
            idx += 1


# ---------------------------------------------------------------------------
# Planning
# ---------------------------------------------------------------------------

def _grow_block(
    evaluator: RunEvaluator,
    acc: ScaledMatrix,
    word: Word,
    start_time: int,
    floor: int,
    accept: Callable[[float], bool],
    cap: int,
    level: int,
    kind: str,
) -> tuple[int, ScaledMatrix, float]:
    """Least whole-period length (found by doubling then bisection) whose average is accepted."""
    p = len(word)
    floor = max(p, -(-floor // p) * p)

    def trial(length: int) -> tuple[ScaledMatrix, float]:
        out = evaluator.apply_run(acc, Run(word, 0, length))
        return out, out.log_norm() / (start_time + length)

    failing = floor - p
    length = floor
    average = math.nan
    while True:
        if length > cap:
            logger.warning("[planner-diag] level=%s %s block passed the cap %s", level, kind, cap)
            raise BudgetExceeded(level, kind, length, cap, average)
        result, average = trial(length)
        if accept(average):
            break
        failing = length
        length *= 2
    passing = length
    while passing - failing > p:
        mid = failing + ((passing - failing) // (2 * p)) * p
        if mid <= failing:
            break
        mid_result, mid_average = trial(mid)
        if accept(mid_average):
            passing, result, average = mid, mid_result, mid_average
        else:
            failing = mid
    logger.info("[planner-diag] level=%s %s_length=%s avg=%.6f", level, kind, passing, average)
    return passing, result, average


def _closed_form(target: IrregularTarget, level: float, epsilon: float, gap: int,
                 high: int, low: int) -> tuple[bool, bool]:
    """The sufficient H/L inequalities for a Pesin level (log form)."""
    a, b, tau = target.high_exponent, target.low_exponent, target.tau
    log_c = math.log(target.cocycle.bound)
    high_ok = -math.log(math.sqrt(2) * level) + high * (a - 2 * epsilon) > gap * log_c + (high + gap) * (a - tau)
    low_ok = (
        2 * math.log(level) + level + low * (b + epsilon) + (high + 2 * gap) * log_c
        < (b + tau) * (low + high + 2 * gap)
    )
    return high_ok, low_ok


def plan_schedule(
    target: IrregularTarget,
    levels: int,
    epsilon: Optional[float] = None,
    margin: Optional[float] = None,
    min_time: int = 0,
    max_block: Optional[int] = None,
    pesin_level: Optional[float] = None,
) -> BlockSchedule:
    """Grow H_k, L_k until the simulated averages cross a - τ + margin and b + τ - margin.

    With a Pesin level, each level also records whether the sufficient
    closed-form inequalities hold for the planned lengths.
    """
    if levels < 0:
        raise ValueError("levels must be >= 0")
    tau = target.tau
    eps = tau / 4 if epsilon is None else epsilon
    if not 0 < eps < tau / 2:
        raise ValueError("epsilon must lie in (0, tau/2)")
    margin = tau / 10 if margin is None else margin
    cap = settings.max_block_length() if max_block is None else max_block
    space = target.cocycle.space
    cylinder = target.cylinder
    prefix_hi = max(cylinder.hi, 0)
    schedule = BlockSchedule(
        prefix_lo=cylinder.lo,
        prefix_hi=prefix_hi,
        gap=space.spec_gap,
        high_word=list(target.high_word),
        low_word=list(target.low_word),
        margin=margin,
        pesin_level=pesin_level,
    )
    if levels == 0:
        return schedule

    base = cylinder.base_point
    first, high_to_low, low_to_high = _bridges(schedule, base.evaluate(prefix_hi), space)
    evaluator = RunEvaluator(target.cocycle)
    acc = evaluator.apply_runs(ScaledMatrix.identity(target.cocycle.dimension), base.runs(0, prefix_hi + 1))
    time = prefix_hi + 1
    high_above = target.high_threshold + margin
    low_below = target.low_threshold - margin
    gap = schedule.gap
    prev_h = prev_l = 0
    for k in range(1, levels + 1):
        acc = evaluator.apply_run(acc, Run(first if k == 1 else low_to_high, 0, gap))
        time += gap
        floor_h = max(prev_h + 1, min_time + 1 - time)
        h, acc, _ = _grow_block(evaluator, acc, target.high_word, time, floor_h,
                                lambda avg: avg > high_above, cap, k, "high")
        time += h
        schedule.high_lengths.append(h)
        schedule.high_times.append(time)

        acc = evaluator.apply_run(acc, Run(high_to_low, 0, gap))
        time += gap
        l, acc, _ = _grow_block(evaluator, acc, target.low_word, time, prev_l + 1,
                                lambda avg: avg < low_below, cap, k, "low")
        time += l
        schedule.low_lengths.append(l)
        schedule.low_times.append(time)
        prev_h, prev_l = h, l
        if pesin_level is not None:
            high_ok, low_ok = _closed_form(target, pesin_level, eps, gap, h, l)
            schedule.closed_form_high.append(high_ok)
            schedule.closed_form_low.append(low_ok)
            logger.info("[planner-diag] level=%s closed_form high=%s low=%s", k, high_ok, low_ok)
    logger.info(
        "[planner-diag] planned %s levels for %s/%s, last time %s",
        levels, word_to_text(target.high_word), word_to_text(target.low_word), time,
    )
    return BlockSchedule.model_validate(schedule.model_dump())


def build_point(schedule: BlockSchedule, cylinder: Cylinder) -> ShiftPoint:
    """y_0: the cylinder base up to the prefix, then the scheduled blocks (lazy past them)."""
    base = cylinder.base_point
    space = base.space
    if schedule.gap + 1 < space.spec_gap:
        raise GapTooSmall(0, schedule.gap + 1, space.spec_gap)
    if schedule.levels == 0:
        return periodic_splice([(base, cylinder.lo, cylinder.hi)], space)
    start = min(base.start, cylinder.lo)
    prefix_hi = schedule.prefix_hi
    stream = BlockStream(schedule, base.evaluate(prefix_hi), space)
    return ShiftPoint(
        space,
        base.left_tail_from(start),
        base.window(start, prefix_hi),
        start,
        stream,
    )
