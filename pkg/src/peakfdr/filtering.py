"""Gaussian smoothing and discrete local-maxima extraction.

All boundary handling is circular, matching the noise model, so the null
height law applies uniformly at every grid position. A local maximum is a
sample strictly above both circular neighbors; plateaus of equal values
collapse to a single candidate at their (left-)center provided the plateau
is strictly above both flanking values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import circular_convolve, gaussian_taps, local_maxima_indices
from .signal_model import Measurement


class KernelTooWideError(ValueError):
    """The truncated smoothing window does not fit inside the measurement."""


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian smoothing kernel of standard deviation ``bandwidth``,
    truncated at ``truncation_radius`` standard deviations."""

    bandwidth: float
    truncation_radius: float = 6.0

    def __post_init__(self):
        if self.bandwidth <= 0.0:
            raise ValueError("bandwidth must be positive")
        if self.truncation_radius <= 0.0:
            raise ValueError("truncation_radius must be positive")


@dataclass
class Candidate:
    """A local maximum of the smoothed measurement, with the heights of any
    collected neighbors and (once assigned) its p-value."""

    index: int
    height: float
    neighbor_heights: dict[int, float] = field(default_factory=dict)
    p_value: float | None = None
    p_value_stderr: float | None = None

    def set_p_value(self, p: float, stderr: float | None = None) -> None:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-value {p} outside [0, 1]")
        self.p_value = float(p)
        self.p_value_stderr = stderr


def smoothing_taps(k: KernelSpec, dt: float = 1.0) -> np.ndarray:
    """Sampled kernel weights normalized to unit sum (constants pass through)."""
    taps, _ = gaussian_taps(k.bandwidth, dt, k.truncation_radius)
    return taps / taps.sum()


def smooth(m: Measurement, k: KernelSpec) -> Measurement:
    """Circular convolution with the unit-sum sampled kernel."""
    taps = smoothing_taps(k, m.dt)
    if taps.size > len(m):
        raise KernelTooWideError(
            f"kernel window {taps.size} exceeds measurement length {len(m)}"
        )
    return Measurement(circular_convolve(m.samples, taps), dt=m.dt, origin=m.origin)


def find_local_maxima(m: Measurement) -> list[Candidate]:
    """Strict three-point local maxima with plateau collapse, sorted by index."""
    idx = local_maxima_indices(m.samples)
    return [Candidate(int(i), float(m.samples[i])) for i in idx]


def collect_neighbors(
    m: Measurement, candidates: list[Candidate], offsets: list[int]
) -> list[Candidate]:
    """Fill each candidate's neighbor heights by circular indexing."""
    if any(o == 0 for o in offsets):
        raise ValueError("offsets must be non-zero")
    n = len(m)
    for cand in candidates:
        for off in offsets:
            cand.neighbor_heights[int(off)] = float(m.samples[(cand.index + off) % n])
    return candidates


def write_candidates_csv(candidates: list[Candidate], m: Measurement, path) -> None:
    offsets = sorted({o for c in candidates for o in c.neighbor_heights})
    nb_cols = "".join(f",nb_{o:+d}" for o in offsets)
    with open(path, "w") as fh:
        fh.write(f"index,t,height{nb_cols},p_value\n")
        for c in candidates:
            t = m.origin + m.dt * c.index
            nbs = "".join(
                f",{c.neighbor_heights[o]:.17g}" if o in c.neighbor_heights else ","
                for o in offsets
            )
            p = "" if c.p_value is None else f"{c.p_value:.17g}"
            fh.write(f"{c.index},{t:.17g},{c.height:.17g}{nbs},{p}\n")
