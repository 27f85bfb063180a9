import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from models.errors import GapTooSmall, IllegalWord
from symbolic.points import (
    Cylinder,
    ShiftPoint,
    cylinder_from_word,
    periodic_point,
    periodic_splice,
    random_point,
    shadowing_point,
    shift_metric,
    splice,
)
from symbolic.shift_space import ShiftSpace
from tests.fixtures import expand_runs, full_shift, golden_shift


def test_periodic_point_coordinates(full_shift):
    x = periodic_point((0, 1), full_shift)
    assert [x.evaluate(i) for i in range(-2, 3)] == [0, 1, 0, 1, 0]
    assert x[7] == 1


def test_periodic_point_rejects_illegal_cycles(golden_shift):
    with pytest.raises(IllegalWord):
        periodic_point((1,), golden_shift)
    with pytest.raises(ValueError):
        periodic_point((), golden_shift)


def test_shift_moves_coordinates(golden_shift):
    x = splice([(periodic_point((0,), golden_shift), 0, 4), (periodic_point((0, 1), golden_shift), 6, 11)], golden_shift)
    for k in (-3, 1, 5):
        shifted = x.shift(k)
        assert all(shifted.evaluate(i) == x.evaluate(i + k) for i in range(-10, 20))


def test_splice_copies_windows_exactly(full_shift):
    x = periodic_point((0,), full_shift)
    y = periodic_point((1,), full_shift)
    z = splice([(x, 0, 4), (y, 6, 9)], full_shift)
    assert z.window(0, 4) == (0,) * 5
    assert z.window(6, 9) == (1,) * 4
    assert z.evaluate(-10) == 0
    assert z.evaluate(25) == 1


def test_splice_on_golden_mean_is_legal(golden_shift):
    x = periodic_point((0,), golden_shift)
    y = periodic_point((0, 1), golden_shift)
    z = splice([(x, 0, 3), (y, 5, 8), (x, 10, 12)], golden_shift)
    assert z.window(5, 8) == y.window(5, 8)
    golden_shift.check_word(z.window(-5, 20))


def test_splice_needs_the_spec_gap(golden_shift):
    x = periodic_point((0,), golden_shift)
    y = periodic_point((0, 1), golden_shift)
    with pytest.raises(GapTooSmall) as info:
        splice([(x, 0, 4), (y, 5, 9)], golden_shift)
    assert info.value.required == 2


def test_periodic_splice_closes_the_window(golden_shift):
    x = periodic_point((0, 1), golden_shift)
    p = periodic_splice([(x, 0, 3)], golden_shift)
    assert p.window(0, 3) == (0, 1, 0, 1)
    assert p.is_finite
    assert all(p.evaluate(i) == p.evaluate(i + 6) for i in range(-12, 12))


def test_runs_cover_half_open_range(full_shift):
    x = splice([(periodic_point((0, 1), full_shift), -4, 2), (periodic_point((1,), full_shift), 4, 9)], full_shift)
    assert expand_runs(x.runs(-20, 30)) == list(x.window(-20, 29))
    assert list(x.runs(5, 5)) == []


def test_shift_metric_finds_first_disagreement(full_shift):
    x = periodic_point((0,), full_shift)
    y = shadowing_point(x, -2, 2, (1,))
    assert y.window(-2, 2) == (0,) * 5
    assert shift_metric(x, y, 10) == pytest.approx(math.exp(-3))
    assert shift_metric(y, x, 10) == shift_metric(x, y, 10)
    assert shift_metric(x, x.shift(1), 10) == 0.0


def test_shift_metric_beyond_horizon_is_an_upper_bound(full_shift):
    x = periodic_point((0,), full_shift)
    y = shadowing_point(x, -20, 20, (1,))
    assert shift_metric(x, y, 5) == pytest.approx(math.exp(-5))
    with pytest.raises(ValueError):
        shift_metric(x, y, 0)


def test_shift_metric_uses_decay_rate():
    space = ShiftSpace.full_shift(2, decay_rate=0.5)
    x = periodic_point((0,), space)
    y = shadowing_point(x, -3, 3, (1,))
    assert shift_metric(x, y, 10) == pytest.approx(math.exp(-0.5 * 4))


@settings(deadline=None, max_examples=40)
@given(seed=st.integers(min_value=0, max_value=2**31))
def test_shift_metric_is_an_ultrametric(seed):
    space = ShiftSpace.full_shift(2)
    rng = np.random.default_rng(seed)
    x, y, z = (random_point(space, rng, radius=4) for _ in range(3))
    d_xy, d_yz, d_xz = shift_metric(x, y, 32), shift_metric(y, z, 32), shift_metric(x, z, 32)
    assert shift_metric(x, x, 32) == 0.0
    assert d_xy == shift_metric(y, x, 32)
    assert d_xz <= max(d_xy, d_yz) + 1e-15


def test_cylinder_from_radius(full_shift):
    x = periodic_point((0, 1), full_shift)
    cyl = Cylinder.from_radius(x, math.exp(-2.5))
    assert (cyl.lo, cyl.hi) == (-3, 3)
    assert cyl.contains(x)
    assert cyl.radius <= math.exp(-2.5)
    assert not cyl.contains(x.shift(1))


def test_cylinder_from_word(golden_shift):
    cyl = cylinder_from_word((1, 0, 1), golden_shift)
    assert (cyl.lo, cyl.hi) == (-1, 1)
    assert cyl.word == (1, 0, 1)
    assert cyl.label() == "[-1,1]=101"
    assert cyl.contains(cyl.base_point)
    golden_shift.check_word(cyl.base_point.window(-10, 10))
    with pytest.raises(IllegalWord):
        cylinder_from_word((1, 1), golden_shift)


def test_point_construction_checks_joins(golden_shift):
    with pytest.raises(IllegalWord):
        ShiftPoint(golden_shift, (0,), (1, 1), 0, (0,))
    with pytest.raises(IllegalWord):
        ShiftPoint(golden_shift, (0, 1), (1, 0), 0, (0,))
