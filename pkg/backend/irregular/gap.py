"""Spectrum gaps between periodic measures, read off the exterior powers."""

from __future__ import annotations

import logging
from typing import Sequence

from cocycles.exterior import exterior_power
from cocycles.matrix_cocycle import MatrixCocycle
from lyapunov.spectrum import periodic_spectrum, spectra_equal, top_exponent
from models.schemas import IndexGap, SpectrumGapReport
from symbolic.shift_space import Word, word_to_text

logger = logging.getLogger(__name__)

SEPARATION_TOLERANCE = 1e-9


def top_sums(cocycle: MatrixCocycle, word: Sequence[int]) -> list[float]:
    """Λ_i for i = 1..m, each as the top exponent of the i-th exterior power."""
    return [
        top_exponent(exterior_power(cocycle, i), word)
        for i in range(1, cocycle.dimension + 1)
    ]


def spectrum_gap(cocycle: MatrixCocycle, measures: Sequence[Word]) -> SpectrumGapReport:
    if not measures:
        raise ValueError("spectrum_gap needs at least one periodic measure")
    words = [tuple(w) for w in measures]
    labels = [word_to_text(w) for w in words]
    sums = {label: top_sums(cocycle, w) for label, w in zip(labels, words)}

    indices: list[IndexGap] = []
    separating = None
    for i in range(1, cocycle.dimension + 1):
        values = {label: sums[label][i - 1] for label in labels}
        low_label = min(labels, key=lambda lab: values[lab])
        high_label = max(labels, key=lambda lab: values[lab])
        gap = IndexGap(
            index=i,
            values=values,
            low=values[low_label],
            high=values[high_label],
            low_measure=low_label,
            high_measure=high_label,
        )
        indices.append(gap)
        if separating is None and gap.high - gap.low > SEPARATION_TOLERANCE:
            separating = i

    equal = separating is None
    if equal:
        reference = periodic_spectrum(cocycle, words[0])
        if not all(spectra_equal(reference, periodic_spectrum(cocycle, w)) for w in words[1:]):
            # equal partial sums force equal spectra; a mismatch means grouping noise
            logger.warning("partial sums tie but grouped spectra differ for %s", labels)
    logger.info("spectrum gap over %s: separating index %s", labels, separating)
    return SpectrumGapReport(indices=indices, separating_index=separating, spectra_equal=equal)
