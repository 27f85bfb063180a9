"""Exception hierarchy shared by every package.

Each error carries the context the caller needs to act on it (the offending
word, level, or bound) as attributes in addition to a readable message.
"""

from __future__ import annotations

from typing import Any, Optional, Sequence


class CocycleToolkitError(ValueError):
    """Root of all domain errors raised by the toolkit."""


# ---------------------------------------------------------------------------
# Symbolic dynamics
# ---------------------------------------------------------------------------

class NotPrimitive(CocycleToolkitError):
    def __init__(self, alphabet_size: int):
        super().__init__(
            f"transition matrix over {alphabet_size} symbols is not primitive; "
            "the subshift lacks the specification property"
        )
        self.alphabet_size = alphabet_size


class IllegalWord(CocycleToolkitError):
    def __init__(self, word: Sequence[int], position: int, reason: str = ""):
        text = "".join(str(s) for s in word)
        detail = f": {reason}" if reason else ""
        super().__init__(f"word {text!r} has a forbidden transition at position {position}{detail}")
        self.word = tuple(word)
        self.position = position


class GapTooSmall(CocycleToolkitError):
    def __init__(self, segment_index: int, gap: int, required: int):
        super().__init__(
            f"segments {segment_index} and {segment_index + 1} are separated by {gap}; "
            f"specification needs at least {required}"
        )
        self.segment_index = segment_index
        self.gap = gap
        self.required = required


# ---------------------------------------------------------------------------
# Cocycle algebra
# ---------------------------------------------------------------------------

class NumericOverflow(CocycleToolkitError):
    def __init__(self, steps: int, magnitude: float):
        super().__init__(
            f"product entries reached {magnitude:.3e} after {steps} steps; "
            "use log_norm_product for long products"
        )
        self.steps = steps
        self.magnitude = magnitude


class Singular(CocycleToolkitError):
    pass


# ---------------------------------------------------------------------------
# Lyapunov analysis
# ---------------------------------------------------------------------------

class EigenFailure(CocycleToolkitError):
    pass


class ZeroVector(CocycleToolkitError):
    pass


class ClusteredSpectrum(CocycleToolkitError):
    def __init__(self, first: float, second: float):
        super().__init__(
            f"exponents {first!r} and {second!r} are closer than the grouping "
            "tolerance but not equal; refusing to split"
        )
        self.first = first
        self.second = second


class SlowDecay(CocycleToolkitError):
    def __init__(self, cap: int, epsilon: float):
        super().__init__(
            f"Lyapunov series at epsilon={epsilon} did not reach tolerance within {cap} terms"
        )
        self.cap = cap
        self.epsilon = epsilon


class BoundViolation(CocycleToolkitError):
    def __init__(self, check: str, worst: Any):
        super().__init__(f"{check} violated; worst offender: {worst}")
        self.check = check
        self.worst = worst


class ConeEscape(CocycleToolkitError):
    def __init__(self, step: int, witness: Sequence[float], reason: str):
        super().__init__(f"cone condition fails at step {step} ({reason})")
        self.step = step
        self.witness = tuple(float(v) for v in witness)
        self.reason = reason


class HypothesisViolated(CocycleToolkitError):
    pass


# ---------------------------------------------------------------------------
# Irregular construction
# ---------------------------------------------------------------------------

class NoGap(CocycleToolkitError):
    def __init__(self, message: str = "all supplied measures have the same Lyapunov spectrum"):
        super().__init__(message)


class AllSpectraEqual(NoGap):
    pass


class BudgetExceeded(CocycleToolkitError):
    def __init__(self, level: int, block: str, length: int, cap: int, average: float):
        super().__init__(
            f"level {level}: {block} block would need more than {cap} symbols "
            f"(tried {length}, running average {average:.6f})"
        )
        self.level = level
        self.block = block
        self.length = length
        self.cap = cap
        self.average = average


class CertificationFailed(CocycleToolkitError):
    def __init__(self, level: int, message: str):
        super().__init__(f"level {level}: {message}")
        self.level = level


# ---------------------------------------------------------------------------
# Files and re-verification
# ---------------------------------------------------------------------------

class DescriptionParseError(CocycleToolkitError):
    def __init__(self, source: str, line: Optional[int], message: str):
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")
        self.source = source
        self.line = line


class HashMismatch(CocycleToolkitError):
    def __init__(self, what: str, recorded: str, actual: str):
        super().__init__(f"{what} hash mismatch: witness has {recorded[:12]}, config gives {actual[:12]}")
        self.what = what


class RecomputationMismatch(CocycleToolkitError):
    def __init__(self, level: int, time: int, recorded: float, recomputed: float):
        super().__init__(
            f"level {level}: average at n={time} recorded {recorded!r}, recomputed {recomputed!r}"
        )
        self.level = level
        self.time = time
        self.recorded = recorded
        self.recomputed = recomputed
