"""Report, witness and plot-data files.

JSON lines are written from pydantic models in a fixed order with no
timestamps, so repeated runs with one config and seed are byte-identical.
"""

from __future__ import annotations

import hashlib
import logging
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from pydantic import BaseModel

from cocycles.matrix_cocycle import MatrixCocycle, log_norm_product
from models.schemas import BlockSchedule, IrregularWitness
from services.descriptions import canonical_cocycle, canonical_space
from symbolic.points import ShiftPoint
from symbolic.shift_space import ShiftSpace

logger = logging.getLogger(__name__)


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def space_hash(space: ShiftSpace) -> str:
    return sha256_text(canonical_space(space))


def cocycle_hash(cocycle: MatrixCocycle) -> str:
    return sha256_text(canonical_cocycle(cocycle))


def _prepare(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_jsonl(path: str | Path, records: Iterable[BaseModel]) -> Path:
    path = _prepare(path)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record.model_dump_json())
            fh.write("\n")
    logger.info("wrote %s", path)
    return path


def write_witness(path: str | Path, witness: IrregularWitness) -> Path:
    path = _prepare(path)
    path.write_text(witness.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("wrote witness %s", path)
    return path


def read_witness(path: str | Path) -> IrregularWitness:
    return IrregularWitness.model_validate_json(Path(path).read_text(encoding="utf-8"))


def plot_times(schedule: BlockSchedule, points_per_decade: int = 20) -> list[int]:
    """Block boundaries plus a geometric grid up to the last certified time."""
    if not schedule.low_times:
        return []
    last = schedule.low_times[-1]
    boundaries = set()
    for t_high, t_low, h, l in zip(schedule.high_times, schedule.low_times,
                                   schedule.high_lengths, schedule.low_lengths):
        boundaries.update((t_high - h, t_high, t_low - l, t_low))
    decades = max(1.0, np.log10(last))
    grid = np.unique(np.geomspace(1, last, int(decades * points_per_decade) + 1).astype(np.int64))
    return sorted({int(t) for t in grid if t >= 1} | {t for t in boundaries if t >= 1})


def write_plot_data(path: str | Path, cocycle: MatrixCocycle, point: ShiftPoint, times: Sequence[int]) -> Path:
    """Two columns: n and (1/n) log ‖A(y0, n)‖."""
    path = _prepare(path)
    averages = [log_norm_product(cocycle, point, t) / t for t in times]
    data = np.column_stack([np.asarray(times, dtype=np.float64), np.asarray(averages)])
    np.savetxt(path, data, fmt=["%d", "%.12e"], header="n average")
    logger.info("wrote plot data %s (%s rows)", path, len(times))
    return path
