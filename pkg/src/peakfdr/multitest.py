"""Benjamini-Hochberg step-up procedure for FDR control."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class PValueSeries:
    """p-values paired with the identifiers of their hypotheses."""

    ids: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "ids", tuple(self.ids))
        if len(self.ids) != values.size:
            raise ValueError("ids and values must have equal length")
        if values.size and (
            np.any(values < 0.0) or np.any(values > 1.0) or np.any(np.isnan(values))
        ):
            raise ValueError("p-values must lie in [0, 1]")

    @property
    def m(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class BHResult:
    rejected: frozenset
    threshold: Optional[float]


def bh_reject(series: PValueSeries, alpha: float) -> BHResult:
    """Step-up rule: find the largest k with p_(k) <= k*alpha/m and reject
    every hypothesis with p-value <= p_(k); ties are rejected together."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    m = series.m
    if m == 0:
        return BHResult(frozenset(), None)
    ordered = np.sort(series.values)
    passing = ordered <= alpha * np.arange(1, m + 1) / m
    if not passing.any():
        return BHResult(frozenset(), None)
    threshold = float(ordered[np.flatnonzero(passing)[-1]])
    rejected = frozenset(
        ident for ident, p in zip(series.ids, series.values) if p <= threshold
    )
    return BHResult(rejected, threshold)
