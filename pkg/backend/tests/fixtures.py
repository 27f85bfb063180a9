"""Reusable test fixtures for backend tests."""

import shutil
from pathlib import Path

import numpy as np
import pytest

from cocycles.matrix_cocycle import MatrixCocycle
from symbolic.points import Run
from symbolic.shift_space import ShiftSpace

CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"


def expand_runs(runs) -> list[int]:
    """Symbols described by a sequence of runs."""
    out: list[int] = []
    for run in runs:
        assert isinstance(run, Run)
        out.extend(run.word[(run.phase + j) % len(run.word)] for j in range(run.length))
    return out


def random_cocycle(space: ShiftSpace, dimension: int, seed: int) -> MatrixCocycle:
    """Random generators Q1 diag(s) Q2 with singular values in [e^-0.7, e^0.7]."""
    rng = np.random.default_rng(seed)
    gens = []
    for _ in range(space.alphabet_size):
        q1, _ = np.linalg.qr(rng.standard_normal((dimension, dimension)))
        q2, _ = np.linalg.qr(rng.standard_normal((dimension, dimension)))
        gens.append(q1 @ np.diag(np.exp(rng.uniform(-0.7, 0.7, dimension))) @ q2)
    return MatrixCocycle(space, tuple(gens), f"random-{seed}")


def uniform_cocycle(space: ShiftSpace, dimension: int, seed: int) -> MatrixCocycle:
    """Generators with independent entries uniform in [-2, 2]."""
    rng = np.random.default_rng(seed)
    gens = tuple(rng.uniform(-2.0, 2.0, (dimension, dimension)) for _ in range(space.alphabet_size))
    return MatrixCocycle(space, gens, f"uniform-{seed}")


@pytest.fixture
def full_shift() -> ShiftSpace:
    return ShiftSpace.full_shift(2)


@pytest.fixture
def golden_shift() -> ShiftSpace:
    """Golden-mean shift: 1 may not follow 1 (primitivity index 2)."""
    return ShiftSpace(((1, 1), (1, 0)), name="golden-mean")


@pytest.fixture
def diagonal_cocycle(full_shift) -> MatrixCocycle:
    """A(0) = diag(2, 1/2), A(1) = I."""
    return MatrixCocycle.from_mapping(full_shift, {0: [[2, 0], [0, 0.5]], 1: [[1, 0], [0, 1]]}, "diagonal")


@pytest.fixture
def golden_cocycle(golden_shift) -> MatrixCocycle:
    return MatrixCocycle.from_mapping(golden_shift, {0: [[2, 0], [0, 0.5]], 1: [[1, 0], [0, 1]]}, "diagonal")


@pytest.fixture
def triangular_cocycle(full_shift) -> MatrixCocycle:
    return MatrixCocycle.from_mapping(full_shift, {0: [[2, 1], [0, 0.5]], 1: [[1, 0], [0, 1]]}, "triangular")


@pytest.fixture
def rotation_cocycle(full_shift) -> MatrixCocycle:
    """The product over "01" has eigenvalues +-i."""
    return MatrixCocycle.from_mapping(full_shift, {0: [[2, 0], [0, 0.5]], 1: [[0, -1], [1, 0]]}, "rotation")


@pytest.fixture
def lift_cocycle(full_shift) -> MatrixCocycle:
    """Equal top exponents; the determinants separate the two fixed points."""
    return MatrixCocycle.from_mapping(full_shift, {0: [[2, 0], [0, 0.5]], 1: [[2, 0], [0, 0.25]]}, "determinant-lift")


@pytest.fixture
def constant_cocycle(full_shift) -> MatrixCocycle:
    return MatrixCocycle.constant(full_shift, [[2, 0], [0, 0.5]], "constant")


@pytest.fixture
def config_dir(tmp_path) -> Path:
    """Private copy of the shipped example configs."""
    target = tmp_path / "configs"
    shutil.copytree(CONFIG_DIR, target)
    return target
