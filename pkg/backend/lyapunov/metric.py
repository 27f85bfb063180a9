"""ε-Lyapunov scalar products along periodic orbits and Pesin-block certificates.

For u, v in the same Oseledec block E_χ(x) the scalar product is the series

    m * sum_n <A(x,n)u, A(x,n)v> exp(-2χn - ε|n|)

and distinct blocks are orthogonal. The series is truncated once the
geometric tail (ratio e^{-ε}) drops below ``tolerance`` relative to the
partial sum.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from cocycles.matrix_cocycle import MatrixCocycle
from lyapunov.splitting import OseledecSplitting, oseledec_splitting_periodic
from models.errors import SlowDecay
from services import settings

logger = logging.getLogger(__name__)

DEFAULT_SERIES_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class LyapunovMetric:
    splitting: OseledecSplitting
    epsilon: float
    grams: tuple[np.ndarray, ...]
    block_grams: tuple[tuple[np.ndarray, ...], ...]
    truncation_length: int
    tolerance: float

    @property
    def period(self) -> int:
        return self.splitting.period

    def gram(self, j: int) -> np.ndarray:
        return self.grams[j % self.period]

    def norm(self, j: int, u: Sequence[float]) -> float:
        """‖u‖_{x_j,ε}."""
        vec = np.asarray(u, dtype=float)
        return math.sqrt(max(0.0, float(vec @ self.gram(j) @ vec)))

    def operator_norm(self, matrix: np.ndarray, j_from: int, j_to: int) -> float:
        """‖B‖_{x_{j_to} <- x_{j_from}}."""
        return lyapunov_operator_norm(matrix, self.gram(j_from), self.gram(j_to))

    def block_parts(self, j: int, u: Sequence[float]) -> list[np.ndarray]:
        """Components of u in each Oseledec block at x_j (they sum to u)."""
        basis = self.splitting.basis_matrix(j)
        coeffs = np.linalg.solve(basis, np.asarray(u, dtype=float))
        parts = []
        for i in range(self.splitting.block_count):
            cols = self.splitting.block_columns(i)
            parts.append(basis[:, cols] @ coeffs[cols])
        return parts

    def comparison_value(self, j: int) -> float:
        """K_ε(x_j) = sup ‖u‖_{x_j,ε} / ‖u‖."""
        return math.sqrt(float(np.linalg.eigvalsh(self.gram(j))[-1]))


def _reduced_steps(split: OseledecSplitting, i: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """R_k = B_{k+1}ᵀ A(x_k) B_k for block i, and the inverses.

    Stepping coordinates inside the block keeps roundoff from leaking into
    faster blocks, where it would grow like the exponent gap.
    """
    p = split.period
    forward = []
    for k in range(p):
        r = split.bases[(k + 1) % p][i].T @ split.generator(k) @ split.bases[k][i]
        forward.append(r)
    return forward, [np.linalg.inv(r) for r in forward]


def _block_series(
    forward_steps: list[np.ndarray],
    backward_steps: list[np.ndarray],
    dimension: int,
    j: int,
    chi: float,
    epsilon: float,
    tolerance: float,
    cap: int,
) -> tuple[np.ndarray, int]:
    """Gram of the block series in the coordinates of B_j; returns (S, T)."""
    p = len(forward_steps)
    m = dimension
    size = forward_steps[0].shape[0]
    forward = np.eye(size)
    backward = np.eye(size)
    total = m * np.eye(size)
    down, up = math.exp(-chi), math.exp(chi)
    ratio = math.exp(-epsilon)
    recent: list[float] = []
    for n in range(1, cap + 1):
        forward = down * (forward_steps[(j + n - 1) % p] @ forward)
        backward = up * (backward_steps[(j - n) % p] @ backward)
        weight = math.exp(-epsilon * n)
        total += m * weight * (forward.T @ forward + backward.T @ backward)
        recent.append(float(np.sum(forward**2) + np.sum(backward**2)))
        if len(recent) > p:
            recent.pop(0)
        if n < p:
            continue
        tail = m * max(recent) * weight * ratio / (1.0 - ratio)
        if tail <= tolerance * float(np.trace(total)):
            return 0.5 * (total + total.T), n
    raise SlowDecay(cap, epsilon)


def lyapunov_gram(
    cocycle: MatrixCocycle,
    word: Sequence[int],
    epsilon: float,
    tolerance: float = DEFAULT_SERIES_TOLERANCE,
    splitting: Optional[OseledecSplitting] = None,
) -> LyapunovMetric:
    """Gram matrices of ⟨·,·⟩_{x_j,ε} in the standard basis at every orbit point."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    split = splitting or oseledec_splitting_periodic(cocycle, word)
    exponents = split.spectrum.exponents
    if len(exponents) > 1:
        smallest_gap = min(b - a for a, b in zip(exponents, exponents[1:]))
        if epsilon >= smallest_gap:
            raise ValueError(
                f"epsilon={epsilon} must stay below the smallest exponent gap {smallest_gap:.6g}"
            )
    cap = settings.series_term_cap()
    word = split.word
    steps = [_reduced_steps(split, i) for i in range(split.block_count)]
    grams: list[np.ndarray] = []
    blocks: list[tuple[np.ndarray, ...]] = []
    longest = 0
    for j in range(split.period):
        per_block = []
        for i, chi in enumerate(exponents):
            fwd, bwd = steps[i]
            s, t = _block_series(fwd, bwd, cocycle.dimension, j, chi, epsilon, tolerance, cap)
            per_block.append(s)
            longest = max(longest, t)
        basis_inv = np.linalg.inv(split.basis_matrix(j))
        gram = basis_inv.T @ scipy.linalg.block_diag(*per_block) @ basis_inv
        grams.append(0.5 * (gram + gram.T))
        blocks.append(tuple(per_block))
    logger.debug("Lyapunov Gram for %s at eps=%s truncated at T=%s", word, epsilon, longest)
    return LyapunovMetric(split, epsilon, tuple(grams), tuple(blocks), longest, tolerance)


def series_norm_squared(
    cocycle: MatrixCocycle,
    splitting: OseledecSplitting,
    j: int,
    u: Sequence[float],
    block: int,
    epsilon: float,
    terms: int,
) -> float:
    """‖u‖²_{x_j,ε} for u inside one block, summed straight from the definition.

    Vectors are stepped with the generators of the orbit point and projected
    back onto the block (along the other blocks) after every step.
    """
    x = splitting.orbit_point(j)
    chi = splitting.spectrum.exponents[block]
    cols = splitting.block_columns(block)
    projectors = []
    for k in range(splitting.period):
        basis = splitting.basis_matrix(k)
        projectors.append(basis[:, cols] @ np.linalg.inv(basis)[cols, :])
    p = splitting.period
    m = cocycle.dimension
    vec = np.asarray(u, dtype=float)
    total = m * float(vec @ vec)
    forward, backward = vec.copy(), vec.copy()
    log_fwd = log_bwd = 0.0
    for n in range(1, terms + 1):
        forward = projectors[(j + n) % p] @ (cocycle.generators[x.evaluate(n - 1)] @ forward)
        backward = projectors[(j - n) % p] @ (cocycle.inverses[x.evaluate(-n)] @ backward)
        fn, bn = float(np.linalg.norm(forward)), float(np.linalg.norm(backward))
        forward, backward = forward / fn, backward / bn
        log_fwd += math.log(fn)
        log_bwd += math.log(bn)
        total += m * (
            math.exp(2 * (log_fwd - chi * n) - epsilon * n)
            + math.exp(2 * (log_bwd + chi * n) - epsilon * n)
        )
    return total


def lyapunov_operator_norm(matrix: np.ndarray, gram_from: np.ndarray, gram_to: np.ndarray) -> float:
    """sup ‖Bu‖_to / ‖u‖_from, via Cholesky factors G = L Lᵀ."""
    lower_from = scipy.linalg.cholesky(gram_from, lower=True)
    lower_to = scipy.linalg.cholesky(gram_to, lower=True)
    inv_t = scipy.linalg.solve_triangular(lower_from.T, np.eye(lower_from.shape[0]), lower=False)
    return float(np.linalg.norm(lower_to.T @ np.asarray(matrix, dtype=float) @ inv_t, 2))


@dataclass(frozen=True)
class PesinCertificate:
    epsilon: float
    values: tuple[float, ...]
    level: float
    drift_ok: bool
    worst_drift: float

    def in_block(self, level: float) -> bool:
        """Whether the whole orbit lies in the Pesin block of this level."""
        return all(k <= level for k in self.values)


def pesin_certificate(metric: LyapunovMetric, slack: float = 1e-9) -> PesinCertificate:
    values = tuple(metric.comparison_value(j) for j in range(metric.period))
    eps = metric.epsilon
    worst = math.inf
    for j, k in enumerate(values):
        nxt = values[(j + 1) % len(values)]
        # log-margin of K e^{-ε} <= K' <= K e^{ε}
        worst = min(worst, eps - abs(math.log(nxt) - math.log(k)))
    drift_ok = worst >= -slack
    if not drift_ok:
        logger.warning("K_eps drift exceeds e^eps along %s (margin %.3e)", metric.splitting.word, worst)
    return PesinCertificate(eps, values, max(values), drift_ok, worst)


def corrupt_metric(metric: LyapunovMetric, factor: float, point: int = 0) -> LyapunovMetric:
    """Copy of ``metric`` with the Gram at one orbit point scaled (negative control)."""
    grams = list(metric.grams)
    grams[point % metric.period] = grams[point % metric.period] * factor
    return replace(metric, grams=tuple(grams))
