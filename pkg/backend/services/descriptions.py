"""Line-oriented description files for shifts and cocycles.

SFT::

    alphabet 2
    decay 1.0          # optional, λ of the shift metric
    row 1 1
    row 1 0

Cocycle::

    dimension 2
    symbol 0
    2 0
    0 0.5
    symbol 1
    ...

``#`` starts a comment. Errors name the source, line and offending token.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from cocycles.matrix_cocycle import MatrixCocycle
from models.errors import CocycleToolkitError, DescriptionParseError, Singular
from symbolic.shift_space import ShiftSpace

logger = logging.getLogger(__name__)


def _lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if tokens:
            yield number, tokens


def _int(token: str, source: str, line: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise DescriptionParseError(source, line, f"{what} must be an integer, got {token!r}") from None


def _float(token: str, source: str, line: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise DescriptionParseError(source, line, f"{what} must be a number, got {token!r}") from None
    if not np.isfinite(value):
        raise DescriptionParseError(source, line, f"{what} must be finite, got {token!r}")
    return value


def parse_space(text: str, source: str = "<space>") -> ShiftSpace:
    alphabet: Optional[int] = None
    decay = 1.0
    name = ""
    rows: list[list[int]] = []
    for line, tokens in _lines(text):
        key, args = tokens[0], tokens[1:]
        if key == "alphabet" and len(args) == 1:
            alphabet = _int(args[0], source, line, "alphabet size")
            if alphabet < 1:
                raise DescriptionParseError(source, line, "alphabet size must be positive")
        elif key == "decay" and len(args) == 1:
            decay = _float(args[0], source, line, "decay rate")
        elif key == "name":
            name = " ".join(args)
        elif key == "row":
            if alphabet is None:
                raise DescriptionParseError(source, line, "'row' before 'alphabet'")
            if len(args) != alphabet:
                raise DescriptionParseError(source, line, f"row has {len(args)} entries, expected {alphabet}")
            row = []
            for token in args:
                if token not in ("0", "1"):
                    raise DescriptionParseError(source, line, f"transition entry {token!r} is not 0 or 1")
                row.append(int(token))
            rows.append(row)
        else:
            raise DescriptionParseError(source, line, f"unexpected directive {' '.join(tokens)!r}")
    if alphabet is None:
        raise DescriptionParseError(source, None, "missing 'alphabet' line")
    if len(rows) != alphabet:
        raise DescriptionParseError(source, None, f"found {len(rows)} rows for an alphabet of {alphabet}")
    try:
        space = ShiftSpace(tuple(tuple(r) for r in rows), decay, name)
        _ = space.spec_gap
    except CocycleToolkitError:
        raise
    except ValueError as exc:
        raise DescriptionParseError(source, None, str(exc)) from exc
    return space


def parse_cocycle(text: str, space: ShiftSpace, source: str = "<cocycle>") -> MatrixCocycle:
    dimension: Optional[int] = None
    label = ""
    matrices: dict[int, list[list[float]]] = {}
    current: Optional[int] = None
    opened: dict[int, int] = {}
    for line, tokens in _lines(text):
        key = tokens[0]
        if key == "dimension" and len(tokens) == 2:
            dimension = _int(tokens[1], source, line, "dimension")
            if dimension < 1:
                raise DescriptionParseError(source, line, "dimension must be positive")
        elif key == "label":
            label = " ".join(tokens[1:])
        elif key == "symbol" and len(tokens) == 2:
            if dimension is None:
                raise DescriptionParseError(source, line, "'symbol' before 'dimension'")
            current = _int(tokens[1], source, line, "symbol")
            if not 0 <= current < space.alphabet_size:
                raise DescriptionParseError(source, line, f"symbol {current} outside the alphabet")
            if current in matrices:
                raise DescriptionParseError(source, line, f"symbol {current} defined twice")
            matrices[current] = []
            opened[current] = line
        else:
            if current is None or dimension is None:
                raise DescriptionParseError(source, line, f"matrix row {' '.join(tokens)!r} outside a symbol block")
            if len(matrices[current]) == dimension:
                raise DescriptionParseError(source, line, f"symbol {current} has more than {dimension} rows")
            if len(tokens) != dimension:
                raise DescriptionParseError(source, line, f"row has {len(tokens)} entries, expected {dimension}")
            matrices[current].append(
                [_float(t, source, line, f"entry {c} of symbol {current}") for c, t in enumerate(tokens)]
            )
    if dimension is None:
        raise DescriptionParseError(source, None, "missing 'dimension' line")
    for s in range(space.alphabet_size):
        if s not in matrices:
            raise DescriptionParseError(source, None, f"no matrix for symbol {s}")
        if len(matrices[s]) != dimension:
            raise DescriptionParseError(source, opened[s], f"symbol {s} has {len(matrices[s])} rows, expected {dimension}")
    try:
        return MatrixCocycle.from_mapping(space, matrices, label)
    except (ValueError, Singular) as exc:
        raise DescriptionParseError(source, None, str(exc)) from exc


def load_space(path: str | Path) -> ShiftSpace:
    path = Path(path)
    logger.debug("loading shift description %s", path)
    return parse_space(path.read_text(encoding="utf-8"), str(path))


def load_cocycle(path: str | Path, space: ShiftSpace) -> MatrixCocycle:
    path = Path(path)
    logger.debug("loading cocycle description %s", path)
    return parse_cocycle(path.read_text(encoding="utf-8"), space, str(path))


def canonical_space(space: ShiftSpace) -> str:
    """Normalized description used for hashing (comments and spacing removed)."""
    lines = [f"alphabet {space.alphabet_size}", f"decay {space.decay_rate!r}"]
    lines += ["row " + " ".join(str(v) for v in row) for row in space.transition]
    return "\n".join(lines) + "\n"


def canonical_cocycle(cocycle: MatrixCocycle) -> str:
    lines = [f"dimension {cocycle.dimension}"]
    for s, g in enumerate(cocycle.generators):
        lines.append(f"symbol {s}")
        lines += [" ".join(repr(float(v)) for v in row) for row in g]
    return "\n".join(lines) + "\n"
