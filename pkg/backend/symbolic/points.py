"""Finitely described two-sided sequences, cylinders, splicing and the shift metric.

A point is ``left_tail`` repeated towards -inf, an explicit ``center`` whose
first symbol sits at coordinate ``start``, and a right part that is either a
word repeated towards +inf or a lazy ``SymbolStream``. All points are
immutable; streams must be safe to read from several threads.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Iterator, NamedTuple, Protocol, Sequence, Union, runtime_checkable

import numpy as np

from models.errors import GapTooSmall, IllegalWord
from symbolic.shift_space import ShiftSpace, Word, base_cycle, bridge, word_to_text

logger = logging.getLogger(__name__)


class Run(NamedTuple):
    """``length`` consecutive symbols ``word[(phase + j) % len(word)]``."""

    word: Word
    phase: int
    length: int


@runtime_checkable
class SymbolStream(Protocol):
    def symbol(self, offset: int) -> int: ...

    def runs(self, offset: int, length: int) -> Iterator[Run]: ...


Right = Union[Word, SymbolStream]


def _rotate(word: Word, shift: int) -> Word:
    shift %= len(word)
    return word[shift:] + word[:shift]


def _word_runs(word: Word, phase: int, length: int) -> Iterator[Run]:
    if length > 0:
        yield Run(word, phase % len(word), length)


class _OffsetStream:
    """View of another stream starting ``delta`` symbols later."""

    def __init__(self, base: SymbolStream, delta: int):
        self._base = base
        self._delta = delta

    def symbol(self, offset: int) -> int:
        return self._base.symbol(offset + self._delta)

    def runs(self, offset: int, length: int) -> Iterator[Run]:
        return self._base.runs(offset + self._delta, length)


@dataclass(frozen=True, eq=False)
class ShiftPoint:
    space: ShiftSpace
    left_tail: Word
    center: Word
    start: int
    right: Right

    def __post_init__(self) -> None:
        object.__setattr__(self, "left_tail", tuple(self.left_tail))
        object.__setattr__(self, "center", tuple(self.center))
        if not isinstance(self.right, SymbolStream):
            object.__setattr__(self, "right", tuple(self.right))
            if not self.right:
                raise ValueError("right tail must be non-empty")
            self.space.check_word(self.right, cyclic=True)
        if not self.left_tail:
            raise ValueError("left tail must be non-empty")
        self.space.check_word(self.left_tail, cyclic=True)
        self.space.check_word(self.center)
        first_right = self._right_symbol(0)
        after_left = self.center[0] if self.center else first_right
        if not self.space.allowed(self.left_tail[-1], after_left):
            raise IllegalWord((self.left_tail[-1], after_left), 0, "left tail does not join")
        if self.center and not self.space.allowed(self.center[-1], first_right):
            raise IllegalWord((self.center[-1], first_right), 0, "right tail does not join")

    # -- coordinates -------------------------------------------------------

    @property
    def end(self) -> int:
        """Coordinate of the last center symbol (start - 1 for an empty center)."""
        return self.start + len(self.center) - 1

    @property
    def is_finite(self) -> bool:
        return not isinstance(self.right, SymbolStream)

    def _right_symbol(self, offset: int) -> int:
        if isinstance(self.right, SymbolStream):
            return self.right.symbol(offset)
        return self.right[offset % len(self.right)]

    def evaluate(self, i: int) -> int:
        if i < self.start:
            return self.left_tail[(i - self.start) % len(self.left_tail)]
        if i <= self.end:
            return self.center[i - self.start]
        return self._right_symbol(i - self.end - 1)

    def __getitem__(self, i: int) -> int:
        return self.evaluate(i)

    def window(self, lo: int, hi: int) -> Word:
        """Symbols on coordinates lo..hi inclusive."""
        return tuple(self.evaluate(i) for i in range(lo, hi + 1))

    def shift(self, k: int = 1) -> "ShiftPoint":
        """f^k of this point: shift(k).evaluate(i) == evaluate(i + k)."""
        return replace(self, start=self.start - k)

    def runs(self, lo: int, hi: int) -> Iterator[Run]:
        """Runs covering the half-open coordinate range [lo, hi)."""
        if hi <= lo:
            return
        left_hi = min(hi, self.start)
        if lo < left_hi:
            yield from _word_runs(self.left_tail, lo - self.start, left_hi - lo)
        c_lo, c_hi = max(lo, self.start), min(hi, self.end + 1)
        if c_lo < c_hi:
            piece = self.center[c_lo - self.start : c_hi - self.start]
            yield Run(piece, 0, len(piece))
        r_lo = max(lo, self.end + 1)
        if r_lo < hi:
            offset = r_lo - self.end - 1
            if isinstance(self.right, SymbolStream):
                yield from self.right.runs(offset, hi - r_lo)
            else:
                yield from _word_runs(self.right, offset, hi - r_lo)

    # -- tails re-anchored at other coordinates ----------------------------

    def left_tail_from(self, s: int) -> Word:
        """Word W with evaluate(i) == W[(i - s) % len(W)] for every i < s (needs s <= start)."""
        if s > self.start:
            raise ValueError("left tail can only be re-anchored at or before start")
        return _rotate(self.left_tail, s - self.start)

    def right_from(self, e: int) -> Right:
        """Right part re-anchored after coordinate e (needs e >= end)."""
        if e < self.end:
            raise ValueError("right part can only be re-anchored at or after end")
        delta = e - self.end
        if isinstance(self.right, SymbolStream):
            return _OffsetStream(self.right, delta) if delta else self.right
        return _rotate(self.right, delta)

    def agrees_everywhere(self, other: "ShiftPoint") -> bool:
        """Exact equality test for two finitely described points."""
        if other is self:
            return True
        if not (self.is_finite and other.is_finite):
            return False
        lo = min(self.start, other.start) - math.lcm(len(self.left_tail), len(other.left_tail))
        hi = max(self.end, other.end) + math.lcm(len(self.right), len(other.right))
        return all(self.evaluate(i) == other.evaluate(i) for i in range(lo, hi + 1))

    def describe(self, radius: int = 6) -> str:
        left = word_to_text(self.window(-radius, -1))
        right = word_to_text(self.window(0, radius))
        return f"...{left}.{right}..."


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def periodic_point(word: Sequence[int], space: ShiftSpace) -> ShiftPoint:
    """Two-sided periodic sequence with period len(word) and coordinate 0 = word[0]."""
    word = tuple(word)
    if not word:
        raise ValueError("periodic word must be non-empty")
    space.check_word(word, cyclic=True)
    return ShiftPoint(space, word, word, 0, word)


def splice(segments: Sequence[tuple[ShiftPoint, int, int]], space: ShiftSpace) -> ShiftPoint:
    """Concatenate orbit windows [a_j, b_j] of the given points, joined by bridges.

    Coordinates inside every window are copied verbatim, so the shadowing is
    exact there. Left of a_1 the result follows the first point, right of
    b_k the last one.
    """
    if not segments:
        raise ValueError("splice needs at least one segment")
    gap_needed = space.spec_gap
    for j, (_, a, b) in enumerate(segments):
        if a > b:
            raise ValueError(f"segment {j} has a > b ({a} > {b})")
        if j + 1 < len(segments):
            next_a = segments[j + 1][1]
            if next_a - b < gap_needed:
                raise GapTooSmall(j, next_a - b, gap_needed)

    first, a_first, _ = segments[0]
    last, _, b_last = segments[-1]
    s = min(a_first, first.start)
    e = max(b_last, last.end)

    center: list[int] = [first.evaluate(i) for i in range(s, a_first)]
    for j, (point, a, b) in enumerate(segments):
        center.extend(point.evaluate(i) for i in range(a, b + 1))
        if j + 1 < len(segments):
            nxt, next_a, _ = segments[j + 1]
            center.extend(bridge(point.evaluate(b), nxt.evaluate(next_a), next_a - b - 1, space))
    center.extend(last.evaluate(i) for i in range(b_last + 1, e + 1))

    return ShiftPoint(space, first.left_tail_from(s), tuple(center), s, last.right_from(e))


def periodic_splice(
    segments: Sequence[tuple[ShiftPoint, int, int]],
    space: ShiftSpace,
    closing_gap: int | None = None,
) -> ShiftPoint:
    """Periodic shadowing point: the spliced window closed up cyclically by a bridge."""
    spliced = splice(segments, space)
    a_first = segments[0][1]
    b_last = segments[-1][2]
    gap = space.spec_gap if closing_gap is None else closing_gap
    if gap + 1 < space.spec_gap:
        raise GapTooSmall(len(segments) - 1, gap + 1, space.spec_gap)
    window = spliced.window(a_first, b_last)
    closing = bridge(window[-1], window[0], gap, space)
    return periodic_point(window + closing, space).shift(-a_first)


def random_point(space: ShiftSpace, rng: np.random.Generator, radius: int = 8) -> ShiftPoint:
    """Random legal window on [-radius, radius] with the least cycle as tails."""
    word = [int(rng.integers(space.alphabet_size))]
    for _ in range(2 * radius):
        choices = [t for t in range(space.alphabet_size) if space.allowed(word[-1], t)]
        word.append(int(rng.choice(choices)))
    return cylinder_from_word(tuple(word), space, lo=-radius).base_point


# ---------------------------------------------------------------------------
# Metric and cylinders
# ---------------------------------------------------------------------------

def shift_metric(x: ShiftPoint, y: ShiftPoint, horizon: int) -> float:
    """exp(-λk) for the least |k| < horizon where x and y differ.

    Returns 0 when both points are finitely described and identical, and
    the bound exp(-λ·horizon) when they agree on the horizon but equality
    cannot be decided.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    decay = x.space.decay_rate
    for k in range(horizon):
        if x.evaluate(k) != y.evaluate(k) or x.evaluate(-k) != y.evaluate(-k):
            return math.exp(-decay * k)
    if x.agrees_everywhere(y):
        return 0.0
    return math.exp(-decay * horizon)


@dataclass(frozen=True, eq=False)
class Cylinder:
    """Points agreeing with ``base_point`` on coordinates lo..hi."""

    base_point: ShiftPoint
    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError("cylinder window is empty")

    @classmethod
    def from_radius(cls, base_point: ShiftPoint, radius: float) -> "Cylinder":
        """Ball B(base, radius) shrunk to a coordinate window (ceiling keeps it inside)."""
        if radius <= 0:
            raise ValueError("radius must be positive")
        half = max(0, math.ceil(-math.log(radius) / base_point.space.decay_rate))
        return cls(base_point, -half, half)

    @property
    def word(self) -> Word:
        return self.base_point.window(self.lo, self.hi)

    @property
    def radius(self) -> float:
        """Metric radius guaranteed by agreement on the symmetric part of the window."""
        half = min(-self.lo, self.hi)
        if half < 0:
            return 1.0
        return math.exp(-self.base_point.space.decay_rate * (half + 1))

    def contains(self, point: ShiftPoint) -> bool:
        return all(point.evaluate(i) == self.base_point.evaluate(i) for i in range(self.lo, self.hi + 1))

    def label(self) -> str:
        return f"[{self.lo},{self.hi}]={word_to_text(self.word)}"


def cylinder_from_word(word: Sequence[int], space: ShiftSpace, lo: int | None = None) -> Cylinder:
    """Cylinder fixing ``word`` on [lo, lo + len - 1]; lo defaults to centering the word."""
    word = tuple(word)
    if not word:
        raise ValueError("cylinder word must be non-empty")
    space.check_word(word)
    if lo is None:
        lo = -((len(word) - 1) // 2)
    cycle = base_cycle(space)
    gap = space.spec_gap
    lead = bridge(cycle[-1], word[0], gap, space)
    trail = bridge(word[-1], cycle[0], gap, space)
    base = ShiftPoint(space, cycle, lead + word + trail, lo - gap, cycle)
    return Cylinder(base, lo, lo + len(word) - 1)


def shadowing_point(x: ShiftPoint, lo: int, hi: int, outside: Sequence[int]) -> ShiftPoint:
    """Point equal to ``x`` on [lo, hi] and to the periodic ``outside`` word beyond the bridges."""
    space = x.space
    other = periodic_point(outside, space)
    gap = space.spec_gap
    return splice([(other, lo - gap, lo - gap), (x, lo, hi), (other, hi + gap, hi + gap)], space)
