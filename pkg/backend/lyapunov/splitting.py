"""Oseledec splittings along periodic orbits."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from cocycles.matrix_cocycle import MatrixCocycle
from lyapunov.spectrum import LyapunovSpectrum, group_moduli, period_eigenvalues
from models.errors import EigenFailure
from services import settings
from symbolic.points import ShiftPoint, periodic_point
from symbolic.shift_space import Word

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class OseledecSplitting:
    """bases[j][i]: orthonormal columns spanning E_{χ_i}(x_j), blocks in increasing χ."""

    cocycle: MatrixCocycle
    spectrum: LyapunovSpectrum
    bases: tuple[tuple[np.ndarray, ...], ...]

    @property
    def word(self) -> Word:
        return self.spectrum.word

    @property
    def period(self) -> int:
        return self.spectrum.period

    @property
    def block_count(self) -> int:
        return len(self.spectrum.pairs)

    def orbit_point(self, j: int) -> ShiftPoint:
        return periodic_point(self.word, self.cocycle.space).shift(j % self.period)

    def basis_matrix(self, j: int) -> np.ndarray:
        """Columns of all blocks at x_j stacked in block order."""
        return np.hstack(self.bases[j % self.period])

    def block_columns(self, i: int) -> slice:
        start = sum(m for _, m in self.spectrum.pairs[:i])
        return slice(start, start + self.spectrum.pairs[i][1])

    def generator(self, j: int) -> np.ndarray:
        return self.cocycle.generators[self.word[j % self.period]]


def _invariant_subspace(product: np.ndarray, lo: float, hi: float, period: int, expected: int) -> np.ndarray:
    def select(re: float, im: float) -> bool:
        modulus = math.hypot(re, im)
        return modulus > 0 and lo <= math.log(modulus) / period <= hi

    try:
        _, z, sdim = scipy.linalg.schur(product, output="real", sort=select)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenFailure(f"Schur reordering failed: {exc}") from exc
    if sdim != expected:
        raise EigenFailure(f"Schur reordering selected {sdim} eigenvalues, expected {expected}")
    return z[:, :sdim]


def oseledec_splitting_periodic(
    cocycle: MatrixCocycle,
    word: Sequence[int],
    tolerance: Optional[float] = None,
) -> OseledecSplitting:
    """Sums of generalized eigenspaces of A(x, p) grouped by modulus, pushed along the orbit."""
    word = tuple(word)
    cocycle.space.check_word(word, cyclic=True)
    tol = settings.grouping_tolerance() if tolerance is None else tolerance
    p = len(word)
    logs = [math.log(abs(v)) / p for v in period_eigenvalues(cocycle, word)]
    groups = group_moduli(logs, tol)
    spectrum = LyapunovSpectrum(tuple((g[0], len(g)) for g in groups), word, p)

    product = cocycle.word_product(word)
    half = tol / 2
    start_bases = tuple(
        _invariant_subspace(product, g[0] - half, g[0] + half, p, len(g)) for g in groups
    )
    bases = [start_bases]
    for j in range(1, p):
        gen = cocycle.generators[word[j - 1]]
        bases.append(tuple(np.linalg.qr(gen @ b)[0] for b in bases[-1]))
    logger.debug("splitting of %s: blocks=%s", word, [m for _, m in spectrum.pairs])
    return OseledecSplitting(cocycle, spectrum, tuple(bases))


def subspace_gap(first: np.ndarray, second: np.ndarray) -> float:
    """Largest principal angle between two column spans."""
    return float(np.max(scipy.linalg.subspace_angles(first, second)))
