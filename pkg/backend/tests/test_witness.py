import math

import pytest

from cocycles.exterior import exterior_power
from irregular.schedule import IrregularTarget, build_point, plan_schedule
from irregular.witness import (
    STRICT_SLACK,
    certify_witness,
    on_membership,
    vector_oscillation,
    witness_membership,
)
from models.errors import CertificationFailed
from symbolic.points import cylinder_from_word, periodic_point, periodic_splice
from tests.fixtures import diagonal_cocycle, full_shift, lift_cocycle

LOG2 = math.log(2)
TAU = 0.05


def _target(cocycle, space, tau=TAU):
    return IrregularTarget(
        cocycle=cocycle,
        high_word=(0,),
        low_word=(1,),
        high_exponent=LOG2,
        low_exponent=0.0,
        tau=tau,
        cylinder=cylinder_from_word((0, 1, 0), space),
    )


def test_five_levels_certify_at_astronomical_times(diagonal_cocycle, full_shift):
    target = _target(diagonal_cocycle, full_shift)
    schedule = plan_schedule(target, 5)
    point = build_point(schedule, target.cylinder)
    witness = certify_witness(diagonal_cocycle, point, schedule, target, seed=3)
    assert len(witness.levels) == 5
    assert witness.levels[-1].low_time > 10**10
    for record in witness.levels:
        assert record.high_slack >= STRICT_SLACK
        assert record.low_slack >= STRICT_SLACK
    assert witness.oscillation_gap >= LOG2 - 2 * TAU
    assert witness.seed == 3
    assert witness.containment == ["y0 in MLI(A) on the tested levels"]
    assert witness.cylinder.word == [0, 1, 0]


def test_point_outside_the_cylinder_is_refused(diagonal_cocycle, full_shift):
    target = _target(diagonal_cocycle, full_shift)
    schedule = plan_schedule(target, 1)
    elsewhere = cylinder_from_word((1, 1, 1), full_shift)
    with pytest.raises(CertificationFailed) as info:
        certify_witness(diagonal_cocycle, build_point(schedule, elsewhere), schedule, target)
    assert info.value.level == 0


def test_point_without_oscillation_fails_certification(diagonal_cocycle, full_shift):
    target = _target(diagonal_cocycle, full_shift)
    schedule = plan_schedule(target, 2)
    cyl = target.cylinder
    periodic = periodic_splice([(cyl.base_point, cyl.lo, cyl.hi)], full_shift)
    with pytest.raises(CertificationFailed) as info:
        certify_witness(diagonal_cocycle, periodic, schedule, target)
    assert info.value.level == 1


def test_witness_membership(diagonal_cocycle, full_shift):
    target = _target(diagonal_cocycle, full_shift)
    schedule = plan_schedule(target, 3)
    witness = certify_witness(diagonal_cocycle, build_point(schedule, target.cylinder), schedule, target)
    first = witness.levels[0]
    assert witness_membership(witness, 0) == first
    record = witness_membership(witness, first.low_time)
    assert record is not None and record.level == 2
    assert witness_membership(witness, witness.levels[-1].low_time) is None


def test_on_membership_search(diagonal_cocycle, full_shift):
    target = _target(diagonal_cocycle, full_shift)
    schedule = plan_schedule(target, 1)
    point = build_point(schedule, target.cylinder)
    horizon = schedule.low_times[0] + 10
    found = on_membership(diagonal_cocycle, point, 5, LOG2, 0.0, TAU, horizon)
    assert found.found
    assert found.high_time > 5 and found.low_time > 5
    assert found.low_time <= schedule.low_times[0]

    never_low = on_membership(diagonal_cocycle, periodic_point((0,), full_shift), 5, LOG2, 0.0, TAU, 200)
    assert not never_low.found
    assert never_low.high_time is None
    with pytest.raises(ValueError):
        on_membership(diagonal_cocycle, point, 50, LOG2, 0.0, TAU, 10)


def test_fixed_point_never_joins_the_low_set(diagonal_cocycle, full_shift):
    fixed = periodic_point((0,), full_shift)
    result = on_membership(diagonal_cocycle, fixed, 5, LOG2, 0.0, TAU, 100_000)
    assert not result.found
    assert result.low_time is None


def test_vector_oscillation_of_a_direct_witness(diagonal_cocycle, full_shift):
    target = _target(diagonal_cocycle, full_shift)
    schedule = plan_schedule(target, 2)
    point = build_point(schedule, target.cylinder)
    witness = certify_witness(diagonal_cocycle, point, schedule, target)
    rows = vector_oscillation(diagonal_cocycle, point, witness)
    assert [r.basis_index for r in rows] == [0, 1]
    assert len(rows[0].averages) == 4
    assert rows[0].spread >= LOG2 - 2 * TAU


def test_lifted_witness_oscillates_in_a_single_vector(lift_cocycle, full_shift):
    # the top exponent agrees on both fixed points; only e2 tells them apart
    wedge = exterior_power(lift_cocycle, 2)
    tau = 0.1
    target = IrregularTarget(
        cocycle=wedge,
        high_word=(0,),
        low_word=(1,),
        high_exponent=0.0,
        low_exponent=-LOG2,
        tau=tau,
        cylinder=cylinder_from_word((0,), full_shift),
        exterior_index=2,
        base_cocycle=lift_cocycle,
    )
    schedule = plan_schedule(target, 2)
    assert schedule.low_times[-1] <= 200_000
    point = build_point(schedule, target.cylinder)
    witness = certify_witness(wedge, point, schedule, target)
    assert witness.exterior_index == 2
    assert len(witness.containment) == 2
    rows = vector_oscillation(lift_cocycle, point, witness)
    assert rows[1].spread >= tau
    assert rows[0].spread == pytest.approx(0.0, abs=1e-9)
