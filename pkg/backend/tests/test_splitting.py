import math

import numpy as np
import pytest

from cocycles.matrix_cocycle import MatrixCocycle
from lyapunov.splitting import oseledec_splitting_periodic, subspace_gap
from models.errors import ClusteredSpectrum
from tests.fixtures import diagonal_cocycle, full_shift, rotation_cocycle, triangular_cocycle

E1 = np.array([[1.0], [0.0]])
E2 = np.array([[0.0], [1.0]])


def test_diagonal_blocks_are_coordinate_axes(diagonal_cocycle):
    split = oseledec_splitting_periodic(diagonal_cocycle, (0,))
    assert split.block_count == 2
    assert split.period == 1
    assert subspace_gap(split.bases[0][0], E2) < 1e-12
    assert subspace_gap(split.bases[0][1], E1) < 1e-12
    assert split.block_columns(1) == slice(1, 2)


def test_triangular_slow_direction(triangular_cocycle):
    split = oseledec_splitting_periodic(triangular_cocycle, (0,))
    # eigenvector of 1/2 for [[2, 1], [0, 1/2]] is (1, -3/2)
    slow = np.array([[1.0], [-1.5]])
    assert subspace_gap(split.bases[0][0], slow) < 1e-10
    assert subspace_gap(split.bases[0][1], E1) < 1e-10


@pytest.mark.parametrize("word", [(0, 1), (0, 0, 1), (1, 0, 1, 0, 0)])
def test_splitting_is_invariant_along_the_orbit(triangular_cocycle, word):
    split = oseledec_splitting_periodic(triangular_cocycle, word)
    for j in range(split.period):
        for i in range(split.block_count):
            image = split.generator(j) @ split.bases[j][i]
            assert subspace_gap(image, split.bases[(j + 1) % split.period][i]) < 1e-9
        basis = split.basis_matrix(j)
        assert abs(np.linalg.det(basis)) > 1e-6


def test_single_block_for_rotation(rotation_cocycle):
    split = oseledec_splitting_periodic(rotation_cocycle, (0, 1))
    assert split.block_count == 1
    assert split.bases[0][0].shape == (2, 2)
    assert split.orbit_point(1).evaluate(0) == 1


def test_clustered_but_distinct_moduli_are_refused(full_shift):
    cocycle = MatrixCocycle.constant(full_shift, [[1.0, 0.0], [0.0, 1.0 + 1e-9]])
    with pytest.raises(ClusteredSpectrum) as info:
        oseledec_splitting_periodic(cocycle, (0,))
    assert info.value.second - info.value.first == pytest.approx(math.log1p(1e-9), rel=1e-3)
