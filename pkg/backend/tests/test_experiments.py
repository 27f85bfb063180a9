import json
import math

import pytest

from lyapunov.spectrum import qr_exponents
from models.errors import AllSpectraEqual, DescriptionParseError, HashMismatch, RecomputationMismatch
from models.schemas import BoundsReport
from services.experiments import (
    QR_CROSSCHECK_STEPS,
    bounds_passed,
    cmd_bounds,
    cmd_irregular,
    cmd_scan,
    cmd_spectrum,
    cmd_verify,
    load_config,
    load_context,
)
from services.reports import read_witness
from tests.fixtures import config_dir

LOG2 = math.log(2)


def _context(config_dir, name, tmp_path, **overrides):
    config = load_config(config_dir / name, overrides)
    return load_context(config, tmp_path / "out")


def test_load_config_applies_overrides(config_dir):
    config = load_config(config_dir / "diagonal.json", {"levels": 2, "tau": None})
    assert config.levels == 2
    assert config.tau == 0.05
    assert config.base_dir == str(config_dir)
    assert config.resolved_margin == pytest.approx(0.005)


def test_load_config_errors(config_dir, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{\n  \"tau\": ,\n}")
    with pytest.raises(DescriptionParseError) as info:
        load_config(broken)
    assert info.value.line == 2
    with pytest.raises(DescriptionParseError, match="epsilon"):
        load_config(config_dir / "diagonal.json", {"epsilon": 0.5})
    with pytest.raises(DescriptionParseError, match="not found"):
        load_config(tmp_path / "missing.json")


def test_load_context_checks_measures(config_dir, tmp_path):
    config = load_config(config_dir / "golden.json", {"measures": ["11"]})
    with pytest.raises(DescriptionParseError):
        load_context(config, tmp_path)
    ctx = _context(config_dir, "golden.json", tmp_path)
    assert ctx.measures == [(0,), (0, 1)]
    assert ctx.out_dir == tmp_path / "out"


def test_spectrum_verb(config_dir, tmp_path):
    ctx = _context(config_dir, "diagonal.json", tmp_path)
    table = cmd_spectrum(ctx)
    by_measure = {}
    for row in table.rows:
        by_measure.setdefault(row.measure, []).append((row.exponent, row.multiplicity))
    assert sorted(by_measure["0"]) == [pytest.approx((-LOG2, 1)), pytest.approx((LOG2, 1))]
    assert by_measure["1"] == [pytest.approx((0.0, 2))]
    assert table.top_sums["0"] == pytest.approx([LOG2, 0.0], abs=1e-12)
    assert table.qr_exponents["0"] == pytest.approx([LOG2, -LOG2], abs=1e-9)
    lines = (tmp_path / "out" / "spectrum.jsonl").read_text().splitlines()
    assert len(lines) == len(table.rows)


def test_spectrum_cross_check_steps_are_capped(config_dir, tmp_path, mocker):
    spy = mocker.patch("services.experiments.qr_exponents", wraps=qr_exponents)
    ctx = _context(config_dir, "diagonal.json", tmp_path, horizon=1_000_000)
    table = cmd_spectrum(ctx)
    steps = [call.args[2] for call in spy.call_args_list]
    assert steps and all(s <= QR_CROSSCHECK_STEPS for s in steps)
    assert table.qr_exponents["0"] == pytest.approx([LOG2, -LOG2], abs=1e-9)


def test_irregular_then_verify(config_dir, tmp_path):
    ctx = _context(config_dir, "diagonal.json", tmp_path, levels=2)
    result = cmd_irregular(ctx)
    out = tmp_path / "out"
    assert (out / "averages.dat").exists()
    assert len((out / "irregular.jsonl").read_text().splitlines()) == 1 + 2
    witness = read_witness(out / "witness.json")
    assert witness == result.witness
    assert witness.seed == 7
    assert witness.schedule.pesin_level is not None
    assert [r.closed_form_low for r in witness.levels] == witness.schedule.closed_form_low
    assert "closed_form_high" in (out / "witness.json").read_text()
    checked = cmd_verify(ctx, out / "witness.json")
    assert [r.level for r in checked] == [1, 2]


def test_lifted_run_reports_vector_averages(config_dir, tmp_path):
    ctx = _context(config_dir, "lift.json", tmp_path)
    result = cmd_irregular(ctx)
    assert result.witness.exterior_index == 2
    lines = (tmp_path / "out" / "irregular.jsonl").read_text().splitlines()
    assert len(lines) == 1 + 2 + 2
    assert "basis_index" in json.loads(lines[-1])
    assert len(cmd_verify(ctx, result.witness)) == 2


def test_verify_rejects_tampered_witnesses(config_dir, tmp_path):
    ctx = _context(config_dir, "diagonal.json", tmp_path, levels=1)
    witness = cmd_irregular(ctx).witness
    first = witness.levels[0]
    tampered = witness.model_copy(
        update={"levels": [first.model_copy(update={"high_average": first.high_average + 1e-3})]}
    )
    with pytest.raises(RecomputationMismatch):
        cmd_verify(ctx, tampered)
    with pytest.raises(HashMismatch):
        cmd_verify(ctx, witness.model_copy(update={"cocycle_hash": "0" * 64}))
    other = _context(config_dir, "triangular.json", tmp_path)
    with pytest.raises(HashMismatch):
        cmd_verify(other, witness)


def test_equal_spectra_stop_the_irregular_verb(config_dir, tmp_path):
    ctx = _context(config_dir, "constant.json", tmp_path)
    with pytest.raises(AllSpectraEqual):
        cmd_irregular(ctx)
    assert not (tmp_path / "out" / "witness.json").exists()


def test_scan_verb_on_golden_mean(config_dir, tmp_path):
    ctx = _context(config_dir, "golden.json", tmp_path)
    report = cmd_scan(ctx)
    assert report.certified == 5
    assert report.fraction == 1.0
    assert len((tmp_path / "out" / "scan.jsonl").read_text().splitlines()) == 5


@pytest.mark.parametrize("name", ["bounds.json", "triangular.json"])
def test_bounds_verb(config_dir, tmp_path, name):
    ctx = _context(config_dir, name, tmp_path)
    instances, controls = cmd_bounds(ctx)
    assert controls
    assert all(not c.passed for c in controls)
    assert bounds_passed(instances, controls)
    suites = {r.suite for r in instances if isinstance(r, BoundsReport)}
    assert len(suites) == 2
    written = (tmp_path / "out" / "bounds.jsonl").read_text().splitlines()
    assert len(written) == len(instances) + len(controls)


def test_bounds_passed_needs_failing_controls(config_dir, tmp_path):
    ctx = _context(config_dir, "bounds.json", tmp_path)
    instances, controls = cmd_bounds(ctx)
    assert not bounds_passed(instances, instances[:1])
