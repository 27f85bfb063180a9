"""Exterior powers of matrices and cocycles (compound matrices of i x i minors)."""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from cocycles.matrix_cocycle import MatrixCocycle


@lru_cache(maxsize=64)
def subset_indices(m: int, i: int) -> tuple[tuple[int, ...], ...]:
    """Lexicographic i-subsets of range(m); they index the basis of ∧^i R^m."""
    return tuple(combinations(range(m), i))


def compound_matrix(matrix: np.ndarray, i: int) -> np.ndarray:
    """i-th compound: entry (R, S) is the minor det(B[R, S])."""
    b = np.asarray(matrix, dtype=float)
    m = b.shape[0]
    if not 1 <= i <= m:
        raise ValueError(f"exterior index {i} outside 1..{m}")
    if i == 1:
        return b.copy()
    subsets = subset_indices(m, i)
    size = comb(m, i)
    out = np.empty((size, size))
    for r, rows in enumerate(subsets):
        block = b[list(rows), :]
        for c, cols in enumerate(subsets):
            out[r, c] = np.linalg.det(block[:, list(cols)])
    return out


def exterior_power(cocycle: MatrixCocycle, i: int) -> MatrixCocycle:
    """∧^i A, a cocycle of dimension binomial(m, i) over the same shift."""
    if i == 1:
        return cocycle
    generators = tuple(compound_matrix(g, i) for g in cocycle.generators)
    label = f"wedge{i}({cocycle.label})" if cocycle.label else f"wedge{i}"
    return MatrixCocycle(cocycle.space, generators, label)
