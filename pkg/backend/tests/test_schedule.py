import math
from concurrent.futures import ThreadPoolExecutor

import pytest
from pydantic import ValidationError

from irregular.schedule import BlockStream, IrregularTarget, build_point, plan_schedule
from models.errors import BudgetExceeded, GapTooSmall, NoGap
from models.schemas import BlockSchedule
from symbolic.points import cylinder_from_word
from symbolic.shift_space import bridge
from tests.fixtures import diagonal_cocycle, expand_runs, full_shift, golden_cocycle, golden_shift

LOG2 = math.log(2)


@pytest.fixture
def diagonal_target(diagonal_cocycle, full_shift) -> IrregularTarget:
    return IrregularTarget(
        cocycle=diagonal_cocycle,
        high_word=(0,),
        low_word=(1,),
        high_exponent=LOG2,
        low_exponent=0.0,
        tau=0.05,
        cylinder=cylinder_from_word((0, 1, 0), full_shift),
    )


@pytest.fixture
def golden_target(golden_cocycle, golden_shift) -> IrregularTarget:
    return IrregularTarget(
        cocycle=golden_cocycle,
        high_word=(0,),
        low_word=(0, 1),
        high_exponent=LOG2,
        low_exponent=LOG2 / 2,
        tau=0.05,
        cylinder=cylinder_from_word((1, 0, 1), golden_shift),
    )


def test_target_requires_a_wide_enough_gap(diagonal_target):
    assert diagonal_target.high_threshold == pytest.approx(LOG2 - 0.05)
    assert diagonal_target.low_threshold == pytest.approx(0.05)
    with pytest.raises(NoGap):
        IrregularTarget(
            cocycle=diagonal_target.cocycle,
            high_word=(0,),
            low_word=(1,),
            high_exponent=LOG2,
            low_exponent=0.0,
            tau=0.2,
            cylinder=diagonal_target.cylinder,
        )


def test_plan_schedule_grows_blocks(diagonal_target):
    schedule = plan_schedule(diagonal_target, 3)
    assert schedule.levels == 3
    assert schedule.gap == 1
    assert (schedule.prefix_lo, schedule.prefix_hi) == (-1, 1)
    assert all(b > a for a, b in zip(schedule.high_lengths, schedule.high_lengths[1:]))
    assert all(b > a for a, b in zip(schedule.low_lengths, schedule.low_lengths[1:]))
    assert schedule.margin == pytest.approx(0.005)
    first_high = schedule.prefix_hi + 1 + schedule.gap + schedule.high_lengths[0]
    assert schedule.high_times[0] == first_high
    assert schedule.low_times[0] == first_high + schedule.gap + schedule.low_lengths[0]


def test_replanning_the_same_target_is_deterministic(diagonal_target):
    first = plan_schedule(diagonal_target, 3)
    second = plan_schedule(diagonal_target, 3)
    assert second == first
    assert (second.high_times, second.low_times) == (first.high_times, first.low_times)
    end = first.low_times[-1] + 20
    left = build_point(first, diagonal_target.cylinder)
    right = build_point(second, diagonal_target.cylinder)
    assert left.window(first.prefix_lo, end) == right.window(first.prefix_lo, end)


def test_pesin_level_adds_one_closed_form_flag_per_level(diagonal_target):
    plain = plan_schedule(diagonal_target, 2)
    assert plain.pesin_level is None
    assert plain.closed_form_high == plain.closed_form_low == []
    flagged = plan_schedule(diagonal_target, 2, pesin_level=1e6)
    assert flagged.pesin_level == 1e6
    assert flagged.high_times == plain.high_times
    assert len(flagged.closed_form_high) == 2
    # a huge level swamps the low-block inequality
    assert flagged.closed_form_low == [False, False]
    broken = flagged.model_dump() | {"closed_form_low": [False]}
    with pytest.raises(ValidationError):
        BlockSchedule.model_validate(broken)


def test_plan_schedule_respects_a_minimum_time(diagonal_target):
    schedule = plan_schedule(diagonal_target, 1, min_time=500)
    assert schedule.high_times[0] > 500


def test_zero_levels_gives_an_empty_schedule(diagonal_target):
    schedule = plan_schedule(diagonal_target, 0)
    assert schedule.levels == 0
    point = build_point(schedule, diagonal_target.cylinder)
    assert point.is_finite
    assert diagonal_target.cylinder.contains(point)


def test_plan_schedule_rejects_bad_parameters(diagonal_target):
    with pytest.raises(ValueError):
        plan_schedule(diagonal_target, -1)
    with pytest.raises(ValueError):
        plan_schedule(diagonal_target, 1, epsilon=0.03)


def test_budget_exceeded_reports_the_level(diagonal_target):
    with pytest.raises(BudgetExceeded) as info:
        plan_schedule(diagonal_target, 2, max_block=8)
    assert info.value.cap == 8
    assert info.value.level in (1, 2)


def test_built_point_follows_the_layout(diagonal_target):
    schedule = plan_schedule(diagonal_target, 2)
    point = build_point(schedule, diagonal_target.cylinder)
    assert diagonal_target.cylinder.contains(point)
    t = schedule.prefix_hi + 1
    assert point.window(t, t + schedule.gap - 1) == bridge(point.evaluate(t - 1), 0, schedule.gap, point.space)
    t += schedule.gap
    h1 = schedule.high_lengths[0]
    assert point.window(t, t + h1 - 1) == (0,) * h1
    t += h1 + schedule.gap
    l1 = schedule.low_lengths[0]
    assert point.window(t, t + l1 - 1) == (1,) * l1
    assert t + l1 == schedule.low_times[0]


def test_golden_mean_point_is_legal(golden_target, golden_shift):
    schedule = plan_schedule(golden_target, 2)
    assert schedule.gap == 2
    point = build_point(schedule, golden_target.cylinder)
    golden_shift.check_word(point.window(-10, schedule.low_times[-1] + 50))


def test_stream_runs_match_symbols_past_the_plan(diagonal_target, full_shift):
    schedule = plan_schedule(diagonal_target, 1)
    stream = BlockStream(schedule, 0, full_shift)
    length = schedule.low_times[0] * 40
    symbols = [stream.symbol(i) for i in range(length)]
    assert expand_runs(stream.runs(0, length)) == symbols
    assert expand_runs(stream.runs(17, 300)) == symbols[17:317]
    # lazily continued levels keep both kinds of block
    assert {0, 1} <= set(symbols[schedule.low_times[0]:])


def test_stream_is_safe_to_share_between_threads(diagonal_target, full_shift):
    schedule = plan_schedule(diagonal_target, 1)
    offsets = list(range(0, 200_000, 997))
    reference = BlockStream(schedule, 0, full_shift)
    expected = [reference.symbol(i) for i in offsets]
    shared = BlockStream(schedule, 0, full_shift)
    with ThreadPoolExecutor(max_workers=8) as pool:
        got = list(pool.map(shared.symbol, reversed(offsets)))
    assert got[::-1] == expected


def test_build_point_refuses_short_bridges(golden_target):
    schedule = plan_schedule(golden_target, 1)
    broken = schedule.model_copy(update={"gap": 0})
    with pytest.raises(GapTooSmall):
        build_point(broken, golden_target.cylinder)
