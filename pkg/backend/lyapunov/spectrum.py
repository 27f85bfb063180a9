"""Lyapunov spectra of periodic-orbit measures and finite-time exponents."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from cocycles.matrix_cocycle import MatrixCocycle
from models.errors import ClusteredSpectrum, EigenFailure, ZeroVector
from services import settings
from symbolic.points import ShiftPoint
from symbolic.shift_space import Word

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LyapunovSpectrum:
    """Distinct exponents χ_i with multiplicities m_i, increasing in χ."""

    pairs: tuple[tuple[float, int], ...]
    word: Word
    period: int

    @property
    def dimension(self) -> int:
        return sum(m for _, m in self.pairs)

    @property
    def exponents(self) -> tuple[float, ...]:
        return tuple(chi for chi, _ in self.pairs)

    def with_multiplicity(self) -> list[float]:
        """λ_1 >= λ_2 >= ... >= λ_m, each exponent repeated by its multiplicity."""
        out: list[float] = []
        for chi, m in reversed(self.pairs):
            out.extend([chi] * m)
        return out

    def top_sum(self, i: int) -> float:
        """Λ_i = λ_1 + ... + λ_i."""
        return float(sum(self.with_multiplicity()[:i]))

    def determinant_rate(self) -> float:
        return float(sum(chi * m for chi, m in self.pairs))


def group_moduli(logs: Sequence[float], tolerance: float) -> list[list[float]]:
    """Group exactly equal values; distinct values closer than the tolerance are refused."""
    ordered = sorted(logs)
    groups: list[list[float]] = [[ordered[0]]]
    for value in ordered[1:]:
        gap = value - groups[-1][-1]
        if gap == 0.0:
            groups[-1].append(value)
        elif gap < tolerance:
            raise ClusteredSpectrum(groups[-1][-1], value)
        else:
            groups.append([value])
    return groups


def period_eigenvalues(cocycle: MatrixCocycle, word: Sequence[int]) -> np.ndarray:
    product = cocycle.word_product(word)
    try:
        values = scipy.linalg.eigvals(product)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenFailure(f"eigensolver failed on the period product of {tuple(word)}: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise EigenFailure(f"eigensolver returned non-finite eigenvalues for {tuple(word)}")
    return values


def periodic_spectrum(cocycle: MatrixCocycle, word: Sequence[int], tolerance: Optional[float] = None) -> LyapunovSpectrum:
    """Exact spectrum of the measure on the periodic orbit of ``word``."""
    word = tuple(word)
    cocycle.space.check_word(word, cyclic=True)
    tol = settings.grouping_tolerance() if tolerance is None else tolerance
    p = len(word)
    logs = [math.log(abs(v)) / p for v in period_eigenvalues(cocycle, word)]
    pairs = tuple((g[0], len(g)) for g in group_moduli(logs, tol))
    return LyapunovSpectrum(pairs, word, p)


def top_exponent(cocycle: MatrixCocycle, word: Sequence[int]) -> float:
    """Largest log-modulus of the period product over the period; no grouping involved."""
    word = tuple(word)
    cocycle.space.check_word(word, cyclic=True)
    return max(math.log(abs(v)) for v in period_eigenvalues(cocycle, word)) / len(word)


def max_exponent(spectrum: LyapunovSpectrum) -> float:
    return spectrum.pairs[-1][0]


def second_exponent(spectrum: LyapunovSpectrum) -> Optional[float]:
    """ν, the next exponent below the maximal one; None for a single block."""
    if len(spectrum.pairs) < 2:
        return None
    return spectrum.pairs[-2][0]


def spectra_equal(first: LyapunovSpectrum, second: LyapunovSpectrum, tolerance: float = 1e-9) -> bool:
    if [m for _, m in first.pairs] != [m for _, m in second.pairs]:
        return False
    return all(abs(a - b) <= tolerance for a, b in zip(first.exponents, second.exponents))


def finite_time_vector_exponent(cocycle: MatrixCocycle, x: ShiftPoint, v: Sequence[float], n: int) -> float:
    """(1/n) log ||A(x, n) v||, renormalizing the vector at every step."""
    if n < 1:
        raise ValueError("n must be at least 1")
    vec = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ZeroVector("the Lyapunov exponent of the zero vector is undefined")
    vec = vec / norm
    total = math.log(norm)
    gens = cocycle.generators
    for j in range(n):
        vec = gens[x.evaluate(j)] @ vec
        step = float(np.linalg.norm(vec))
        vec = vec / step
        total += math.log(step)
    return total / n


def vector_log_growth(cocycle: MatrixCocycle, x: ShiftPoint, v: Sequence[float], times: Sequence[int]) -> list[float]:
    """log ||A(x, n) v|| at every requested time (one pass, increasing times)."""
    vec = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ZeroVector("the Lyapunov exponent of the zero vector is undefined")
    vec = vec / norm
    total = math.log(norm)
    gens = cocycle.generators
    out: list[float] = []
    done = 0
    for t in sorted(times):
        for j in range(done, t):
            vec = gens[x.evaluate(j)] @ vec
            step = float(np.linalg.norm(vec))
            vec = vec / step
            total += math.log(step)
        done = t
        out.append(total)
    return out


def qr_exponents(cocycle: MatrixCocycle, x: ShiftPoint, n: int) -> np.ndarray:
    """Finite-time exponents by QR re-orthonormalization, largest first."""
    if n < 1:
        raise ValueError("n must be at least 1")
    q = np.eye(cocycle.dimension)
    sums = np.zeros(cocycle.dimension)
    gens = cocycle.generators
    for j in range(n):
        q, r = np.linalg.qr(gens[x.evaluate(j)] @ q)
        sums += np.log(np.abs(np.diag(r)))
    return np.sort(sums / n)[::-1]
