"""Experiment pipelines behind the CLI verbs."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from pydantic import ValidationError

from cocycles.exterior import exterior_power
from cocycles.matrix_cocycle import MatrixCocycle, RunEvaluator, ScaledMatrix, log_norm_product
from irregular.gap import top_sums
from irregular.pipeline import (
    ConstructionResult,
    construct,
    density_scan,
    high_pesin_level,
    resolve_target,
    scan_cylinders,
)
from irregular.schedule import build_point
from irregular.witness import STRICT_SLACK, vector_oscillation
from lyapunov.bounds import cone_verify, shadowing_sweep, verify_norm_bounds
from lyapunov.metric import corrupt_metric, lyapunov_gram
from lyapunov.spectrum import periodic_spectrum, qr_exponents
from lyapunov.splitting import oseledec_splitting_periodic
from models.errors import (
    CertificationFailed,
    DescriptionParseError,
    HashMismatch,
    RecomputationMismatch,
)
from models.schemas import (
    BoundsReport,
    ExperimentConfig,
    IrregularWitness,
    LevelRecord,
    ScanReport,
    ShadowingReport,
    SpectrumRow,
    SpectrumTable,
)
from services import reports, settings
from services.descriptions import load_cocycle, load_space, parse_cocycle, parse_space
from symbolic.points import Cylinder, cylinder_from_word, periodic_point, shadowing_point
from symbolic.shift_space import ShiftSpace, Word, parse_word, word_to_text

logger = logging.getLogger(__name__)

RECOMPUTE_TOLERANCE = 1e-7
QR_CROSSCHECK_STEPS = 512


@dataclass(frozen=True, eq=False)
class ExperimentContext:
    config: ExperimentConfig
    space: ShiftSpace
    cocycle: MatrixCocycle
    measures: list[Word]
    space_hash: str
    cocycle_hash: str
    out_dir: Path

    def output(self, configured: Optional[str], default_name: str) -> Path:
        if configured:
            path = Path(configured)
            return path if path.is_absolute() else self.out_dir / path
        return self.out_dir / default_name


def load_config(path: Union[str, Path], overrides: Optional[dict[str, Any]] = None) -> ExperimentConfig:
    """Read a JSON config and apply CLI overrides (None values are ignored)."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DescriptionParseError(str(path), None, "config file not found") from None
    except json.JSONDecodeError as exc:
        raise DescriptionParseError(str(path), exc.lineno, exc.msg) from None
    if not isinstance(raw, dict):
        raise DescriptionParseError(str(path), None, "config must be a JSON object")
    raw.setdefault("base_dir", str(path.parent))
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first.get("loc", ())) or "config"
        raise DescriptionParseError(str(path), None, f"{where}: {first.get('msg')}") from None


def load_context(config: ExperimentConfig, out_dir: Union[str, Path, None] = None) -> ExperimentContext:
    base = Path(config.base_dir or ".")
    if config.space is not None:
        space = parse_space(config.space, "<config:space>")
    else:
        space = load_space(_resolve(base, config.space_path))
    if config.cocycle is not None:
        cocycle = parse_cocycle(config.cocycle, space, "<config:cocycle>")
    else:
        cocycle = load_cocycle(_resolve(base, config.cocycle_path), space)
    measures = []
    for text in config.measures:
        try:
            word = parse_word(text, space)
            space.check_word(word, cyclic=True)
        except ValueError as exc:
            raise DescriptionParseError("<config:measures>", None, f"{text!r}: {exc}") from None
        measures.append(word)
    return ExperimentContext(
        config=config,
        space=space,
        cocycle=cocycle,
        measures=measures,
        space_hash=reports.space_hash(space),
        cocycle_hash=reports.cocycle_hash(cocycle),
        out_dir=Path(out_dir) if out_dir is not None else base / "out",
    )


def _resolve(base: Path, value: Optional[str]) -> Path:
    path = Path(value or "")
    if not path.is_absolute():
        path = base / path
    if not path.exists():
        raise DescriptionParseError(str(path), None, "referenced file does not exist")
    return path


def _cylinder(ctx: ExperimentContext) -> Cylinder:
    text = ctx.config.cylinder
    word = parse_word(text, ctx.space) if text else ctx.measures[0]
    return cylinder_from_word(word, ctx.space, ctx.config.cylinder_lo)


# ---------------------------------------------------------------------------
# Verbs
# ---------------------------------------------------------------------------

def cmd_spectrum(ctx: ExperimentContext) -> SpectrumTable:
    table = SpectrumTable()
    for word in ctx.measures:
        label = word_to_text(word)
        spectrum = periodic_spectrum(ctx.cocycle, word)
        for chi, m in reversed(spectrum.pairs):
            table.rows.append(SpectrumRow(measure=label, exponent=chi, multiplicity=m))
        table.top_sums[label] = top_sums(ctx.cocycle, word)
        steps = max(1, min(ctx.config.horizon, QR_CROSSCHECK_STEPS) // len(word)) * len(word)
        point = periodic_point(word, ctx.space)
        table.qr_exponents[label] = [float(v) for v in qr_exponents(ctx.cocycle, point, steps)]
    reports.write_jsonl(ctx.output(ctx.config.report_path, "spectrum.jsonl"), table.rows)
    return table


def cmd_irregular(ctx: ExperimentContext) -> ConstructionResult:
    cfg = ctx.config
    target, gap_report = resolve_target(ctx.cocycle, ctx.measures, cfg.tau, _cylinder(ctx), cfg.mode)
    result = construct(
        target,
        cfg.levels,
        epsilon=cfg.epsilon,
        margin=cfg.resolved_margin,
        max_block=cfg.max_block_length,
        seed=cfg.seed,
        space_hash=ctx.space_hash,
        cocycle_hash=ctx.cocycle_hash,
        gap_report=gap_report,
        pesin_level=high_pesin_level(target, cfg.epsilon),
    )
    reports.write_witness(ctx.output(cfg.witness_path, "witness.json"), result.witness)
    records: list = [gap_report, *result.witness.levels]
    if target.exterior_index > 1:
        # per-vector averages of A itself along y0
        records += vector_oscillation(ctx.cocycle, result.point, result.witness)
    reports.write_jsonl(ctx.output(cfg.report_path, "irregular.jsonl"), records)
    times = reports.plot_times(result.schedule)
    if times:
        reports.write_plot_data(ctx.output(cfg.plot_path, "averages.dat"), target.cocycle, result.point, times)
    return result


def _recompute(cocycle: MatrixCocycle, point, time: int) -> float:
    """Average at ``time`` without planner state: stepwise below the cap, fresh powering above."""
    if time <= settings.stepwise_cap():
        return log_norm_product(cocycle, point, time, method="stepwise") / time
    acc = RunEvaluator(cocycle).apply_runs(ScaledMatrix.identity(cocycle.dimension), point.runs(0, time))
    return acc.log_norm() / time


def cmd_verify(ctx: ExperimentContext, witness: Union[IrregularWitness, str, Path]) -> list[LevelRecord]:
    if not isinstance(witness, IrregularWitness):
        witness = reports.read_witness(witness)
    if witness.space_hash != ctx.space_hash:
        raise HashMismatch("space", witness.space_hash, ctx.space_hash)
    if witness.cocycle_hash != ctx.cocycle_hash:
        raise HashMismatch("cocycle", witness.cocycle_hash, ctx.cocycle_hash)

    cocycle = exterior_power(ctx.cocycle, witness.exterior_index)
    cylinder = cylinder_from_word(witness.cylinder.word, ctx.space, witness.cylinder.lo)
    point = build_point(witness.schedule, cylinder)
    if not cylinder.contains(point):
        raise CertificationFailed(0, "rebuilt point leaves the recorded cylinder")
    checked = []
    for record in witness.levels:
        for time, recorded, ok in (
            (record.high_time, record.high_average, lambda v: v - record.high_threshold >= STRICT_SLACK),
            (record.low_time, record.low_average, lambda v: record.low_threshold - v >= STRICT_SLACK),
        ):
            value = _recompute(cocycle, point, time)
            if not math.isclose(value, recorded, rel_tol=RECOMPUTE_TOLERANCE, abs_tol=RECOMPUTE_TOLERANCE):
                raise RecomputationMismatch(record.level, time, recorded, value)
            if not ok(value):
                raise CertificationFailed(record.level, f"average at n={time} no longer clears its threshold")
        checked.append(record)
    logger.info("verified %s levels", len(checked))
    return checked


def cmd_scan(ctx: ExperimentContext) -> ScanReport:
    cfg = ctx.config
    cylinders = scan_cylinders(ctx.space, cfg.window)
    report = density_scan(
        ctx.cocycle,
        ctx.measures,
        cfg.tau,
        cylinders,
        cfg.o_n_index,
        levels=max(1, cfg.levels),
        margin=cfg.resolved_margin,
        mode=cfg.mode,
        max_block=cfg.max_block_length,
    )
    reports.write_jsonl(ctx.output(cfg.report_path, "scan.jsonl"), report.rows)
    return report


BoundsRecord = Union[BoundsReport, ShadowingReport]


def _outside_word(ctx: ExperimentContext, word: Word) -> Optional[Word]:
    if ctx.config.outside_word:
        return parse_word(ctx.config.outside_word, ctx.space)
    for other in ctx.measures:
        if set(other) != set(word):
            return other
    return None


def cmd_bounds(ctx: ExperimentContext) -> tuple[list[BoundsRecord], list[BoundsReport]]:
    """Returns (instance reports, negative controls); controls are expected to fail."""
    cfg = ctx.config
    rng = np.random.default_rng(cfg.seed)
    steps = cfg.bounds_steps
    instances: list[BoundsRecord] = []
    controls: list[BoundsReport] = []
    for word in ctx.measures:
        splitting = oseledec_splitting_periodic(ctx.cocycle, word)
        metric = lyapunov_gram(ctx.cocycle, word, cfg.epsilon, splitting=splitting)
        n_range = range(-steps, steps + 1)
        instances.append(
            verify_norm_bounds(ctx.cocycle, splitting, metric, n_range, samples=cfg.bounds_samples,
                               rng=rng, raise_on_failure=False)
        )
        corrupted = verify_norm_bounds(ctx.cocycle, splitting, corrupt_metric(metric, 10.0), n_range,
                                       samples=cfg.bounds_samples, rng=rng, raise_on_failure=False)
        corrupted.suite = "control:corrupted-gram"
        controls.append(corrupted)

        x = periodic_point(word, ctx.space)
        outside = _outside_word(ctx, word)
        agreeing = shadowing_point(x, 0, cfg.cone_steps, outside) if outside else x
        instances.append(cone_verify(ctx.cocycle, word, agreeing, cfg.cone_steps, cfg.epsilon,
                                     alpha=cfg.alpha, metric=metric, rng=rng, raise_on_failure=False))
        if outside is None:
            continue
        if splitting.block_count > 1:
            truncated = shadowing_point(x, 0, cfg.cone_steps // 2, outside)
            control = cone_verify(ctx.cocycle, word, truncated, cfg.cone_steps, cfg.epsilon,
                                  alpha=cfg.alpha, metric=metric, rng=rng, raise_on_failure=False)
            control.suite = "control:truncated-agreement"
            controls.append(control)
        instances.extend(
            shadowing_sweep(ctx.cocycle, word, steps, cfg.agreement_margins, outside, cfg.epsilon, alpha=cfg.alpha)
        )
    reports.write_jsonl(ctx.output(cfg.report_path, "bounds.jsonl"), [*instances, *controls])
    return instances, controls


def bounds_passed(instances: list[BoundsRecord], controls: list[BoundsReport]) -> bool:
    """Every instance holds and every negative control fails."""
    ok = all(r.passed if isinstance(r, BoundsReport) else r.growth_passed for r in instances)
    return ok and all(not c.passed for c in controls)
