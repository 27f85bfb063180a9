"""Locally constant matrix cocycles over a shift and their orbit products."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from models.errors import NumericOverflow, Singular
from services import settings
from symbolic.points import Run, ShiftPoint, random_point, shift_metric
from symbolic.shift_space import ShiftSpace

logger = logging.getLogger(__name__)

_SINGULAR_DET = 1e-300


def operator_norm(matrix: np.ndarray) -> float:
    """Largest singular value (the 2-norm used throughout)."""
    return float(np.linalg.norm(matrix, 2))


def minimal_norm(matrix: np.ndarray) -> float:
    """Smallest singular value m(B) = 1 / ||B^{-1}||."""
    b = np.asarray(matrix, dtype=float)
    det = abs(float(np.linalg.det(b)))
    if det < _SINGULAR_DET:
        raise Singular(f"matrix is numerically singular (|det|={det:.3e})")
    return float(np.linalg.svd(b, compute_uv=False)[-1])


@dataclass(frozen=True, eq=False)
class MatrixCocycle:
    """Generator A(x) = generators[x_0] over ``space``."""

    space: ShiftSpace
    generators: tuple[np.ndarray, ...]
    label: str = field(default="")

    def __post_init__(self) -> None:
        mats = []
        for s, g in enumerate(self.generators):
            m = np.array(g, dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError(f"generator for symbol {s} is not square")
            m.setflags(write=False)
            mats.append(m)
        if len(mats) != self.space.alphabet_size:
            raise ValueError(
                f"cocycle has {len(mats)} generators for an alphabet of {self.space.alphabet_size}"
            )
        if len({m.shape for m in mats}) != 1:
            raise ValueError("generators must share one dimension")
        for s, m in enumerate(mats):
            if abs(float(np.linalg.det(m))) < _SINGULAR_DET:
                raise Singular(f"generator for symbol {s} is not invertible")
        object.__setattr__(self, "generators", tuple(mats))

    @classmethod
    def from_mapping(cls, space: ShiftSpace, mapping: Mapping[int, Sequence[Sequence[float]]], label: str = "") -> "MatrixCocycle":
        return cls(space, tuple(np.asarray(mapping[s], dtype=float) for s in range(space.alphabet_size)), label)

    @classmethod
    def constant(cls, space: ShiftSpace, matrix: Sequence[Sequence[float]], label: str = "") -> "MatrixCocycle":
        m = np.asarray(matrix, dtype=float)
        return cls(space, tuple(m for _ in range(space.alphabet_size)), label)

    @property
    def dimension(self) -> int:
        return self.generators[0].shape[0]

    @cached_property
    def inverses(self) -> tuple[np.ndarray, ...]:
        invs = []
        for g in self.generators:
            inv = np.linalg.inv(g)
            inv.setflags(write=False)
            invs.append(inv)
        return tuple(invs)

    @cached_property
    def bound(self) -> float:
        """C = max over generators of max(||A||, ||A^{-1}||); always >= 1."""
        return max(max(operator_norm(g), operator_norm(h)) for g, h in zip(self.generators, self.inverses))

    def at(self, point: ShiftPoint) -> np.ndarray:
        return self.generators[point.evaluate(0)]

    def word_product(self, word: Sequence[int]) -> np.ndarray:
        """A(word[-1]) ... A(word[0])."""
        out = np.eye(self.dimension)
        for s in word:
            out = self.generators[s] @ out
        return out


class CocycleProduct(NamedTuple):
    value: np.ndarray
    base_point: ShiftPoint
    steps: int


def product(cocycle: MatrixCocycle, x: ShiftPoint, n: int) -> CocycleProduct:
    """A(x, n): forward product for n > 0, inverse product for n < 0, identity at 0."""
    budget = settings.overflow_budget()
    out = np.eye(cocycle.dimension)
    if n > 0:
        for j in range(n):
            out = cocycle.generators[x.evaluate(j)] @ out
            _check_overflow(out, j + 1, budget)
    elif n < 0:
        for j in range(1, -n + 1):
            out = cocycle.inverses[x.evaluate(-j)] @ out
            _check_overflow(out, j, budget)
    return CocycleProduct(out, x, n)


def _check_overflow(matrix: np.ndarray, steps: int, budget: float) -> None:
    magnitude = float(np.max(np.abs(matrix)))
    if not math.isfinite(magnitude) or magnitude > budget:
        raise NumericOverflow(steps, magnitude)


# ---------------------------------------------------------------------------
# Log-scaled products
# ---------------------------------------------------------------------------

@dataclass
class ScaledMatrix:
    """exp(log_scale) * matrix, with matrix kept at max-abs entry 1."""

    matrix: np.ndarray
    log_scale: float = 0.0

    @classmethod
    def identity(cls, dimension: int) -> "ScaledMatrix":
        return cls(np.eye(dimension), 0.0)

    def normalize(self) -> "ScaledMatrix":
        peak = float(np.max(np.abs(self.matrix)))
        if peak > 0 and math.isfinite(peak):
            self.matrix = self.matrix / peak
            self.log_scale += math.log(peak)
        return self

    def left_multiply(self, other: "ScaledMatrix | np.ndarray") -> "ScaledMatrix":
        """self <- other @ self."""
        if isinstance(other, ScaledMatrix):
            return ScaledMatrix(other.matrix @ self.matrix, self.log_scale + other.log_scale).normalize()
        return ScaledMatrix(other @ self.matrix, self.log_scale).normalize()

    def power(self, exponent: int) -> "ScaledMatrix":
        """self ** exponent by binary powering, rescaled at every multiply."""
        result = ScaledMatrix.identity(self.matrix.shape[0])
        base = ScaledMatrix(self.matrix.copy(), self.log_scale)
        e = exponent
        while e > 0:
            if e & 1:
                result = result.left_multiply(base)
            e >>= 1
            if e:
                base = base.left_multiply(base)
        return result

    def log_norm(self) -> float:
        return self.log_scale + math.log(operator_norm(self.matrix))


class RunEvaluator:
    """Products along runs with cached period products and powers."""

    def __init__(self, cocycle: MatrixCocycle):
        self.cocycle = cocycle
        self._period_cache: dict[tuple[tuple[int, ...], int], ScaledMatrix] = {}

    def _period(self, word: tuple[int, ...], phase: int) -> ScaledMatrix:
        key = (word, phase)
        cached = self._period_cache.get(key)
        if cached is None:
            rotated = word[phase:] + word[:phase]
            cached = ScaledMatrix(self.cocycle.word_product(rotated)).normalize()
            self._period_cache[key] = cached
        return cached

    def _stepwise(self, acc: ScaledMatrix, word: tuple[int, ...], phase: int, length: int) -> ScaledMatrix:
        gens = self.cocycle.generators
        p = len(word)
        m = acc.matrix
        scale = acc.log_scale
        for j in range(length):
            m = gens[word[(phase + j) % p]] @ m
            if j % 16 == 15:
                peak = float(np.max(np.abs(m)))
                m = m / peak
                scale += math.log(peak)
        return ScaledMatrix(m, scale).normalize()

    def apply_run(self, acc: ScaledMatrix, run: Run) -> ScaledMatrix:
        word, phase, length = run
        p = len(word)
        if length <= 2 * p or length <= 64:
            return self._stepwise(acc, word, phase, length)
        head = (p - phase) % p
        acc = self._stepwise(acc, word, phase, head)
        cycles, tail = divmod(length - head, p)
        acc = acc.left_multiply(self._period(word, 0).power(cycles))
        return self._stepwise(acc, word, 0, tail)

    def apply_runs(self, acc: ScaledMatrix, runs: Iterable[Run]) -> ScaledMatrix:
        for run in runs:
            acc = self.apply_run(acc, run)
        return acc

    def log_norm(self, x: ShiftPoint, n: int) -> float:
        acc = self.apply_runs(ScaledMatrix.identity(self.cocycle.dimension), x.runs(0, n))
        return acc.log_norm()


def log_norm_product(cocycle: MatrixCocycle, x: ShiftPoint, n: int, method: str = "runs") -> float:
    """log ||A(x, n)|| without overflow.

    ``runs`` powers the period product along periodic stretches; ``stepwise``
    walks every coordinate and is kept as an independent cross-check.
    """
    if n < 1:
        raise ValueError("log_norm_product needs n >= 1")
    if n <= settings.exact_product_threshold():
        try:
            return math.log(operator_norm(product(cocycle, x, n).value))
        except NumericOverflow:
            pass
    if method == "runs":
        return RunEvaluator(cocycle).log_norm(x, n)
    if method != "stepwise":
        raise ValueError(f"unknown method {method!r}")
    gens = cocycle.generators
    m = np.eye(cocycle.dimension)
    scale = 0.0
    for j in range(n):
        m = gens[x.evaluate(j)] @ m
        if j % 16 == 15:
            peak = float(np.max(np.abs(m)))
            m = m / peak
            scale += math.log(peak)
    return scale + math.log(operator_norm(m))


def finite_time_max_exponent(cocycle: MatrixCocycle, x: ShiftPoint, n: int) -> float:
    return log_norm_product(cocycle, x, n) / n


def running_log_norms(cocycle: MatrixCocycle, x: ShiftPoint, horizon: int) -> np.ndarray:
    """log ||A(x, k)|| for k = 1..horizon (entry k-1)."""
    if horizon < 1:
        return np.zeros(0)
    dim = cocycle.dimension
    gens = cocycle.generators
    stack = np.empty((horizon, dim, dim))
    scales = np.empty(horizon)
    m = np.eye(dim)
    scale = 0.0
    for j in range(horizon):
        m = gens[x.evaluate(j)] @ m
        peak = float(np.max(np.abs(m)))
        m = m / peak
        scale += math.log(peak)
        stack[j] = m
        scales[j] = scale
    top = np.linalg.svd(stack, compute_uv=False)[:, 0]
    return scales + np.log(top)


def birkhoff_average(cocycle: MatrixCocycle, x: ShiftPoint, n: int) -> float:
    """(1/n) sum log|A(f^j x)| for a one-dimensional cocycle."""
    if cocycle.dimension != 1:
        raise ValueError("Birkhoff averages only describe one-dimensional cocycles")
    logs = [math.log(abs(float(cocycle.generators[s][0, 0]))) for s in range(cocycle.space.alphabet_size)]
    return sum(logs[x.evaluate(j)] for j in range(n)) / n


# ---------------------------------------------------------------------------
# Holder data
# ---------------------------------------------------------------------------

class HolderCertificate(NamedTuple):
    alpha: float
    coefficient: float
    samples: int
    decay_rate: float

    def admits(self, epsilon: float) -> bool:
        """Whether the shadowing exponent clears the constraint λ > ε/α."""
        return self.decay_rate > epsilon / self.alpha


def holder_certificate(
    cocycle: MatrixCocycle,
    alpha: float,
    sample_count: int,
    rng: np.random.Generator | None = None,
    pairs: Sequence[tuple[ShiftPoint, ShiftPoint]] | None = None,
    horizon: int = 32,
) -> HolderCertificate:
    """Largest ||A(x) - A(y)|| / d(x, y)^α over sampled point pairs."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if pairs is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        pairs = [
            (random_point(cocycle.space, rng), random_point(cocycle.space, rng))
            for _ in range(sample_count)
        ]
    coefficient = 0.0
    for x, y in pairs:
        diff = operator_norm(cocycle.at(x) - cocycle.at(y))
        if diff == 0.0:
            continue
        distance = shift_metric(x, y, horizon)
        coefficient = max(coefficient, diff / distance**alpha)
    return HolderCertificate(alpha, coefficient, len(pairs), cocycle.space.decay_rate)
