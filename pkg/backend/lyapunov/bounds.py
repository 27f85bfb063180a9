"""Instance checks of the Lyapunov-norm estimates along periodic orbits.

Every check is recorded as a ``BoundCheck`` whose margin is a log-ratio
(negative means violated). Suites raise on failure unless asked to only
report, which is how the CLI produces its negative-control rows.
"""

from __future__ import annotations

import logging
import math
from typing import Iterable, Optional, Sequence

import numpy as np

from cocycles.matrix_cocycle import MatrixCocycle, operator_norm, product
from lyapunov.metric import (
    LyapunovMetric,
    lyapunov_gram,
    pesin_certificate,
    series_norm_squared,
)
from lyapunov.spectrum import max_exponent, second_exponent
from lyapunov.splitting import OseledecSplitting
from models.errors import BoundViolation, ConeEscape, HypothesisViolated
from models.schemas import BoundCheck, BoundsReport, ShadowingReport
from symbolic.points import ShiftPoint, periodic_point, shadowing_point, shift_metric
from symbolic.shift_space import word_to_text

logger = logging.getLogger(__name__)

_MARGIN_CAP = 50.0


def _log_margin(lhs: float, rhs: float) -> float:
    """log(rhs / lhs), capped so reports stay finite."""
    if lhs <= 0:
        return _MARGIN_CAP
    if rhs <= 0:
        return -_MARGIN_CAP
    return max(-_MARGIN_CAP, min(_MARGIN_CAP, math.log(rhs / lhs)))


def _check(name: str, instance: str, lhs: float, rhs: float, slack: float) -> BoundCheck:
    margin = _log_margin(lhs, rhs)
    return BoundCheck(name=name, instance=instance, lhs=lhs, rhs=rhs, margin=margin, passed=margin >= -slack)


def _finish(report: BoundsReport, raise_on_failure: bool) -> BoundsReport:
    worst = report.worst()
    if worst is not None and not worst.passed:
        logger.warning("%s suite on %s failed: %s %s", report.suite, report.word, worst.name, worst.instance)
        if raise_on_failure:
            raise BoundViolation(worst.name, worst.model_dump())
    return report


def verify_norm_bounds(
    cocycle: MatrixCocycle,
    splitting: OseledecSplitting,
    metric: LyapunovMetric,
    n_range: Iterable[int] = range(-20, 21),
    tolerance: float = 1e-6,
    samples: int = 8,
    rng: Optional[np.random.Generator] = None,
    raise_on_failure: bool = True,
) -> BoundsReport:
    """Two-sided block growth, operator-norm bracket, norm comparison, Gram recomputation and K drift."""
    rng = rng if rng is not None else np.random.default_rng(0)
    slack = math.log1p(tolerance)
    eps = metric.epsilon
    p = splitting.period
    steps = list(n_range)
    exponents = splitting.spectrum.exponents
    chi = max_exponent(splitting.spectrum)
    report = BoundsReport(suite="norm-bounds", word=word_to_text(splitting.word), epsilon=eps)
    checks = report.checks

    for j in range(p):
        x = splitting.orbit_point(j)
        products = {n: product(cocycle, x, n).value for n in steps}
        for i, chi_i in enumerate(exponents):
            basis = splitting.bases[j][i]
            for c in range(basis.shape[1]):
                u = basis[:, c]
                u_norm = metric.norm(j, u)
                for n in steps:
                    image = metric.norm(j + n, products[n] @ u)
                    tag = f"x{j} block{i} col{c} n={n}"
                    checks.append(_check("vector-lower", tag, math.exp(n * chi_i - eps * abs(n)) * u_norm, image, slack))
                    checks.append(_check("vector-upper", tag, image, math.exp(n * chi_i + eps * abs(n)) * u_norm, slack))
                stored = u_norm**2
                recomputed = series_norm_squared(cocycle, splitting, j, u, i, eps, metric.truncation_length)
                drift = abs(math.log(recomputed / stored))
                checks.append(
                    BoundCheck(
                        name="gram",
                        instance=f"x{j} block{i} col{c}",
                        lhs=stored,
                        rhs=recomputed,
                        margin=slack - drift,
                        passed=drift <= slack,
                    )
                )

        # operator-norm bracket holds for forward times on the whole space
        for n in steps:
            if n < 1:
                continue
            value = metric.operator_norm(products[n], j, j + n)
            tag = f"x{j} n={n}"
            checks.append(_check("norm-lower", tag, math.exp(n * (chi - eps)), value, slack))
            checks.append(_check("norm-upper", tag, value, math.exp(n * (chi + eps)), slack))

        k_from = metric.comparison_value(j)
        k_to = metric.comparison_value(j + 1)
        for s in range(samples):
            b = rng.standard_normal((cocycle.dimension, cocycle.dimension))
            plain = operator_norm(b)
            value = metric.operator_norm(b, j, j + 1)
            tag = f"x{j} sample{s}"
            checks.append(_check("compare-lower", tag, plain / k_from, value, slack))
            checks.append(_check("compare-upper", tag, value, k_to * plain, slack))

        for n in steps:
            k_n = metric.comparison_value(j + n)
            tag = f"x{j} n={n}"
            checks.append(_check("drift-lower", tag, k_from * math.exp(-eps * abs(n)), k_n, slack))
            checks.append(_check("drift-upper", tag, k_n, k_from * math.exp(eps * abs(n)), slack))

    cert = pesin_certificate(metric)
    checks.append(
        BoundCheck(name="pesin-floor", instance="all points", lhs=1.0, rhs=min(cert.values),
                   margin=_log_margin(1.0, min(cert.values)), passed=min(cert.values) >= 1.0 - tolerance)
    )
    return _finish(report, raise_on_failure)


def _scaled_sample(metric: LyapunovMetric, j: int, top: np.ndarray, rest: Optional[np.ndarray],
                   ratio: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    u_top = top @ rng.standard_normal(top.shape[1])
    u_top /= metric.norm(j, u_top)
    if rest is None or ratio == 0.0:
        return u_top, np.zeros_like(u_top)
    u_rest = rest @ rng.standard_normal(rest.shape[1])
    u_rest *= ratio / metric.norm(j, u_rest)
    return u_top, u_rest


def cone_verify(
    cocycle: MatrixCocycle,
    x_word: Sequence[int],
    y: ShiftPoint,
    steps: int,
    epsilon: float,
    eta: Optional[float] = None,
    alpha: float = 1.0,
    metric: Optional[LyapunovMetric] = None,
    samples: int = 16,
    rng: Optional[np.random.Generator] = None,
    raise_on_failure: bool = True,
) -> BoundsReport:
    """Cones around the top block are mapped by A(y_i) into the narrower η-cones and stretched."""
    x_word = tuple(x_word)
    metric = metric or lyapunov_gram(cocycle, x_word, epsilon)
    split = metric.splitting
    report = BoundsReport(suite="cone", word=word_to_text(x_word), epsilon=epsilon)
    if split.block_count == 1:
        report.vacuous = True
        report.note = "single exponent: the cone is the whole space"
        return report

    chi = max_exponent(split.spectrum)
    nu = second_exponent(split.spectrum)
    bound = min(cocycle.space.decay_rate * alpha, (chi - nu) / 2)
    if not epsilon < bound:
        raise HypothesisViolated(f"epsilon={epsilon} must be below min(λα, (χ-ν)/2)={bound:.6g}")
    if eta is None:
        eta = math.exp((nu - chi + 2 * epsilon) / 2)
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    rng = rng if rng is not None else np.random.default_rng(0)
    report.note = f"eta={eta:.6g}"
    top_index = split.block_count - 1
    growth_floor = chi - 2 * epsilon

    for i in range(steps):
        j = i % split.period
        basis = split.basis_matrix(j)
        cols = split.block_columns(top_index)
        top = basis[:, cols]
        rest = basis[:, : cols.start]
        a_y = cocycle.generators[y.evaluate(i)]
        worst_cone, worst_growth = _MARGIN_CAP, _MARGIN_CAP
        for s in range(samples):
            ratio = 1.0 if s % 2 == 0 else float(rng.uniform(0.0, 1.0))
            u_top, u_rest = _scaled_sample(metric, j, top, rest, ratio, rng)
            image = a_y @ (u_top + u_rest)
            parts = metric.block_parts(j + 1, image)
            image_top = parts[top_index]
            image_rest = image - image_top
            top_norm = metric.norm(j + 1, image_top)
            rest_norm = metric.norm(j + 1, image_rest)
            cone_margin = _log_margin(rest_norm, eta * top_norm) if top_norm > 0 else -_MARGIN_CAP
            growth_margin = (math.log(top_norm) if top_norm > 0 else -_MARGIN_CAP) - growth_floor
            if raise_on_failure and cone_margin < -1e-9:
                raise ConeEscape(i, u_top + u_rest, f"image leaves the {eta:.3g}-cone")
            if raise_on_failure and growth_margin < -1e-9:
                raise ConeEscape(i, u_top + u_rest, "top component grows slower than e^(χ-2ε)")
            worst_cone = min(worst_cone, cone_margin)
            worst_growth = min(worst_growth, growth_margin)
        report.checks.append(
            BoundCheck(name="cone", instance=f"step {i}", lhs=eta, rhs=eta * math.exp(worst_cone),
                       margin=worst_cone, passed=worst_cone >= -1e-9)
        )
        report.checks.append(
            BoundCheck(name="cone-growth", instance=f"step {i}", lhs=growth_floor,
                       rhs=growth_floor + worst_growth, margin=worst_growth, passed=worst_growth >= -1e-9)
        )
    return report


def exponential_closeness(x: ShiftPoint, y: ShiftPoint, steps: int, horizon: Optional[int] = None) -> float:
    """Least δ with d(f^k y, f^k x) <= δ e^{-λ min(k, n-k)} for k = 0..n."""
    decay = x.space.decay_rate
    horizon = horizon or steps + 64
    delta = 0.0
    for k in range(steps + 1):
        d = shift_metric(y.shift(k), x.shift(k), horizon)
        if d > 0:
            delta = max(delta, d * math.exp(decay * min(k, steps - k)))
    return delta


def shadowing_verify(
    cocycle: MatrixCocycle,
    x_word: Sequence[int],
    y: ShiftPoint,
    steps: int,
    epsilon: float,
    level: Optional[float] = None,
    alpha: float = 1.0,
    metric: Optional[LyapunovMetric] = None,
) -> ShadowingReport:
    """Measured constant of the shadowing norm estimate on one instance."""
    x_word = tuple(x_word)
    decay = cocycle.space.decay_rate
    if decay <= epsilon / alpha:
        raise HypothesisViolated(f"shadowing rate λ={decay} must exceed ε/α={epsilon / alpha}")
    metric = metric or lyapunov_gram(cocycle, x_word, epsilon)
    cert = pesin_certificate(metric)
    l_level = cert.level if level is None else level
    for j in (0, steps):
        if metric.comparison_value(j) > l_level * (1 + 1e-12):
            raise HypothesisViolated(f"orbit point {j} lies outside the Pesin block of level {l_level}")

    chi = max_exponent(metric.splitting.spectrum)
    x = periodic_point(x_word, cocycle.space)
    delta = exponential_closeness(x, y, steps)
    along_y = product(cocycle, y, steps).value
    along_x = product(cocycle, x, steps).value
    norm_y = metric.operator_norm(along_y, 0, steps)
    norm_x = metric.operator_norm(along_x, 0, steps)

    log_bound = steps * (chi + epsilon)
    excess = math.log(norm_y) - log_bound
    excess_relative = math.log(norm_y) - math.log(norm_x) - 2 * steps * epsilon
    scale = l_level * delta**alpha
    if delta > 0:
        c = max(0.0, excess) / scale
        c_relative = max(0.0, excess_relative) / scale
    else:
        c = 0.0 if excess <= 1e-12 else math.inf
        c_relative = 0.0 if excess_relative <= 1e-12 else math.inf

    growth_lhs = operator_norm(along_y)
    log_growth_rhs = 2 * math.log(l_level) + l_level + log_bound
    growth_ratio = math.exp(min(700.0, log_growth_rhs - math.log(growth_lhs)))
    return ShadowingReport(
        word=word_to_text(x_word),
        steps=steps,
        level=l_level,
        epsilon=epsilon,
        decay_rate=decay,
        alpha=alpha,
        delta=delta,
        lyapunov_norm_shadow=norm_y,
        lyapunov_norm_orbit=norm_x,
        growth_bound=math.exp(min(700.0, log_bound)),
        measured_c=c,
        measured_c_relative=c_relative,
        growth_lhs=growth_lhs,
        growth_rhs=math.exp(min(700.0, log_growth_rhs)),
        growth_ratio=growth_ratio,
        growth_passed=growth_ratio > 1.0,
        form_strict=c * delta**alpha < 1.0,
        form_scaled=c * l_level * delta**alpha <= l_level,
    )


def shadowing_sweep(
    cocycle: MatrixCocycle,
    x_word: Sequence[int],
    steps: int,
    margins: Sequence[int],
    outside: Sequence[int],
    epsilon: float,
    level: Optional[float] = None,
    alpha: float = 1.0,
) -> list[ShadowingReport]:
    """One report per agreement window [-M, n + M]; negative M cuts into the segment."""
    x_word = tuple(x_word)
    metric = lyapunov_gram(cocycle, x_word, epsilon)
    x = periodic_point(x_word, cocycle.space)
    reports = []
    for m in margins:
        if -m > steps + m:
            raise ValueError(f"agreement margin {m} leaves an empty window")
        y = shadowing_point(x, -m, steps + m, outside)
        reports.append(shadowing_verify(cocycle, x_word, y, steps, epsilon, level, alpha, metric))
    return reports
