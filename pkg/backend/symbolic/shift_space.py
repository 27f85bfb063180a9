"""Subshifts of finite type given by a 0/1 transition matrix."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from models.errors import IllegalWord, NotPrimitive

logger = logging.getLogger(__name__)

Word = tuple[int, ...]


@dataclass(frozen=True)
class ShiftSpace:
    """Two-sided SFT with the metric d(x, y) = exp(-decay_rate * first disagreement)."""

    transition: tuple[tuple[int, ...], ...]
    decay_rate: float = 1.0
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(v) for v in row) for row in self.transition)
        size = len(rows)
        if size == 0 or any(len(row) != size for row in rows):
            raise ValueError("transition matrix must be square and non-empty")
        if any(v not in (0, 1) for row in rows for v in row):
            raise ValueError("transition matrix entries must be 0 or 1")
        if not self.decay_rate > 0:
            raise ValueError("decay_rate must be positive")
        object.__setattr__(self, "transition", rows)

    @classmethod
    def full_shift(cls, alphabet_size: int, decay_rate: float = 1.0) -> "ShiftSpace":
        ones = tuple((1,) * alphabet_size for _ in range(alphabet_size))
        return cls(ones, decay_rate, name=f"full-{alphabet_size}")

    @property
    def alphabet_size(self) -> int:
        return len(self.transition)

    @cached_property
    def matrix(self) -> np.ndarray:
        m = np.array(self.transition, dtype=np.int64)
        m.setflags(write=False)
        return m

    @cached_property
    def spec_gap(self) -> int:
        return primitivity_index(self)

    def allowed(self, source: int, target: int) -> bool:
        return bool(self.transition[source][target])

    def check_symbol(self, symbol: int) -> None:
        if not 0 <= symbol < self.alphabet_size:
            raise IllegalWord((symbol,), 0, f"symbol outside alphabet of size {self.alphabet_size}")

    def check_word(self, word: Sequence[int], cyclic: bool = False) -> None:
        """Raise IllegalWord on the first forbidden transition."""
        for s in word:
            self.check_symbol(s)
        for i in range(len(word) - 1):
            if not self.allowed(word[i], word[i + 1]):
                raise IllegalWord(word, i)
        if cyclic and word and not self.allowed(word[-1], word[0]):
            raise IllegalWord(word, len(word) - 1, "wrap-around transition is forbidden")


def primitivity_index(space: ShiftSpace) -> int:
    """Least k >= 1 with transition**k entrywise positive (the specification gap)."""
    base = space.matrix > 0
    power = base.copy()
    size = space.alphabet_size
    for k in range(1, size * size + 1):
        if power.all():
            return k
        power = (power.astype(np.int64) @ base.astype(np.int64)) > 0
    raise NotPrimitive(size)


def bridge(source: int, target: int, length: int, space: ShiftSpace) -> Word:
    """Lexicographically least word w of the given length with source->w->target legal.

    Exists for every length >= spec_gap - 1.
    """
    if length < 0:
        raise ValueError("bridge length must be non-negative")
    if length == 0:
        if not space.allowed(source, target):
            raise IllegalWord((source, target), 0, "no bridge of length 0")
        return ()
    symbols = range(space.alphabet_size)
    # reach[j]: symbols that may sit at position j and still arrive at target
    reach: list[set[int]] = [set() for _ in range(length)]
    reach[-1] = {s for s in symbols if space.allowed(s, target)}
    for j in range(length - 2, -1, -1):
        reach[j] = {s for s in symbols if any(space.allowed(s, t) for t in reach[j + 1])}
    word: list[int] = []
    previous = source
    for j in range(length):
        options = [s for s in sorted(reach[j]) if space.allowed(previous, s)]
        if not options:
            raise IllegalWord((source, target), j, f"no bridge of length {length}")
        previous = options[0]
        word.append(previous)
    return tuple(word)


def connect(suffix_symbol: int, prefix_symbol: int, space: ShiftSpace) -> Word:
    """Bridging word of length exactly spec_gap between two symbols."""
    return bridge(suffix_symbol, prefix_symbol, space.spec_gap, space)


def legal_words(space: ShiftSpace, length: int) -> Iterator[Word]:
    """All transition-legal words of the given length, in lexicographic order."""
    if length <= 0:
        yield ()
        return

    def extend(prefix: list[int]) -> Iterator[Word]:
        if len(prefix) == length:
            yield tuple(prefix)
            return
        for s in range(space.alphabet_size):
            if not prefix or space.allowed(prefix[-1], s):
                prefix.append(s)
                yield from extend(prefix)
                prefix.pop()

    yield from extend([])


def base_cycle(space: ShiftSpace) -> Word:
    """Lexicographically least among the shortest cyclically legal words."""
    for length in range(1, space.alphabet_size + 1):
        for word in legal_words(space, length):
            if space.allowed(word[-1], word[0]):
                return word
    raise NotPrimitive(space.alphabet_size)


def parse_word(text: str, space: ShiftSpace | None = None) -> Word:
    """Parse ``"0110"`` (single-digit symbols) or ``"10,3,2"`` (separated symbols)."""
    cleaned = text.strip()
    if not cleaned:
        raise ValueError("empty word")
    if "," in cleaned or " " in cleaned:
        parts = [p for p in cleaned.replace(",", " ").split() if p]
        word = tuple(int(p) for p in parts)
    else:
        if not cleaned.isdigit():
            raise ValueError(f"word {text!r} is not a symbol string")
        word = tuple(int(c) for c in cleaned)
    if space is not None:
        for s in word:
            space.check_symbol(s)
    return word


def word_to_text(word: Sequence[int]) -> str:
    if all(0 <= s < 10 for s in word):
        return "".join(str(s) for s in word)
    return ",".join(str(s) for s in word)
