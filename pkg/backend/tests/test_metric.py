import math

import numpy as np
import pytest

from cocycles.matrix_cocycle import operator_norm
from lyapunov.metric import (
    corrupt_metric,
    lyapunov_gram,
    lyapunov_operator_norm,
    pesin_certificate,
    series_norm_squared,
)
from models.errors import SlowDecay
from tests.fixtures import diagonal_cocycle, full_shift, triangular_cocycle

EPSILON = 0.1
# m * sum_n e^{-ε|n|} for a conformal block of a 2 x 2 cocycle
CLOSED_FORM = 2.0 / math.tanh(EPSILON / 2)


def test_diagonal_gram_matches_closed_form(diagonal_cocycle):
    metric = lyapunov_gram(diagonal_cocycle, (0,), EPSILON)
    assert np.allclose(metric.gram(0), CLOSED_FORM * np.eye(2), rtol=1e-8, atol=0)
    assert metric.norm(0, [1.0, 0.0]) ** 2 == pytest.approx(CLOSED_FORM, rel=1e-8)
    assert metric.comparison_value(0) == pytest.approx(math.sqrt(CLOSED_FORM), rel=1e-8)
    assert metric.comparison_value(0) == pytest.approx(6.3272, abs=1e-4)
    assert metric.truncation_length > 100


def test_identity_block_has_the_same_gram(diagonal_cocycle):
    metric = lyapunov_gram(diagonal_cocycle, (1,), EPSILON)
    assert np.allclose(metric.gram(0), CLOSED_FORM * np.eye(2), rtol=1e-8, atol=0)


def test_operator_norm_of_conformal_metric_is_plain_norm(diagonal_cocycle):
    metric = lyapunov_gram(diagonal_cocycle, (0,), EPSILON)
    b = np.array([[1.0, 2.0], [-0.5, 0.3]])
    assert metric.operator_norm(b, 0, 1) == pytest.approx(operator_norm(b))
    assert metric.operator_norm(diagonal_cocycle.generators[0], 0, 1) == pytest.approx(2.0)


def test_lyapunov_operator_norm_with_weighted_grams():
    b = np.array([[1.0, 0.0], [0.0, 1.0]])
    gram_from = np.diag([1.0, 4.0])
    gram_to = np.diag([9.0, 1.0])
    # sup over u of sqrt(9 u1^2 + u2^2) / sqrt(u1^2 + 4 u2^2)
    assert lyapunov_operator_norm(b, gram_from, gram_to) == pytest.approx(3.0)


def test_gram_agrees_with_the_defining_series(triangular_cocycle):
    metric = lyapunov_gram(triangular_cocycle, (0,), EPSILON)
    split = metric.splitting
    for i in range(split.block_count):
        u = split.bases[0][i][:, 0]
        stored = metric.norm(0, u) ** 2
        recomputed = series_norm_squared(triangular_cocycle, split, 0, u, i, EPSILON, metric.truncation_length)
        assert recomputed == pytest.approx(stored, rel=1e-8)


def test_blocks_are_orthogonal(triangular_cocycle):
    metric = lyapunov_gram(triangular_cocycle, (0, 1), EPSILON)
    split = metric.splitting
    for j in range(split.period):
        slow = split.bases[j][0][:, 0]
        fast = split.bases[j][1][:, 0]
        assert float(slow @ metric.gram(j) @ fast) == pytest.approx(0.0, abs=1e-9)
        parts = metric.block_parts(j, slow + fast)
        assert np.allclose(parts[0], slow)
        assert np.allclose(parts[1], fast)


def test_epsilon_must_stay_below_the_exponent_gap(diagonal_cocycle):
    with pytest.raises(ValueError):
        lyapunov_gram(diagonal_cocycle, (0,), 1.5)
    with pytest.raises(ValueError):
        lyapunov_gram(diagonal_cocycle, (0,), 0.0)


def test_slow_decay_past_the_term_cap(diagonal_cocycle, monkeypatch):
    monkeypatch.setenv("LYAP_SERIES_TERM_CAP", "10")
    with pytest.raises(SlowDecay) as info:
        lyapunov_gram(diagonal_cocycle, (0,), 0.01)
    assert info.value.cap == 10


def test_pesin_certificate(diagonal_cocycle):
    metric = lyapunov_gram(diagonal_cocycle, (0, 1), EPSILON)
    cert = pesin_certificate(metric)
    assert len(cert.values) == 2
    assert cert.level == pytest.approx(max(cert.values))
    assert cert.drift_ok
    assert cert.in_block(cert.level)
    assert not cert.in_block(0.99 * min(cert.values))
    assert min(cert.values) >= 1.0


def test_corrupt_metric_scales_one_point(diagonal_cocycle):
    metric = lyapunov_gram(diagonal_cocycle, (0, 1), EPSILON)
    corrupted = corrupt_metric(metric, 10.0, point=1)
    assert np.allclose(corrupted.gram(1), 10.0 * metric.gram(1))
    assert np.allclose(corrupted.gram(0), metric.gram(0))
    assert np.allclose(metric.gram(1), lyapunov_gram(diagonal_cocycle, (0, 1), EPSILON).gram(1))
