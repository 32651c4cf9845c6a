"""End-to-end detection: smooth, find local maxima, attach p-values, apply
the Benjamini-Hochberg procedure.

The noise parameters are taken as known ground truth; the null moments are
evaluated by default at the post-smoothing bandwidth sqrt(nu^2 + gamma^2)
(``moments_bandwidth="composed"``), with ``"raw"`` substituting nu verbatim
for sensitivity runs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .filtering import Candidate, KernelSpec, collect_neighbors, find_local_maxima, smooth
from .ksample import NeighborConfig, joint_null_model, select_neighbor, simulate_null_maxima, two_sample_pvalues
from .ksample import InsufficientMaximaError
from .multitest import BHResult, PValueSeries, bh_reject
from .numerics import QuadratureSpec
from .palm import NoiseMoments, effective_bandwidth, noise_moments, one_sample_pvalues
from .signal_model import Measurement, NoiseSpec

MOMENTS_BANDWIDTHS = ("composed", "raw")

ONE_SAMPLE = "one-sample"
K_SAMPLE = "k-sample"


@dataclass
class DetectionResult:
    """Candidates with p-values, the rejected (detected) subset, and the
    parameters that produced them."""

    method: str
    candidates: list[Candidate]
    detected: list[int]
    bh_threshold: Optional[float]
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        indices = {c.index for c in self.candidates}
        if not set(self.detected) <= indices:
            raise ValueError("detected indices must come from the candidate set")
        if self.bh_threshold is not None:
            by_index = {c.index: c for c in self.candidates}
            for i in self.detected:
                if by_index[i].p_value is None or by_index[i].p_value > self.bh_threshold:
                    raise ValueError("detected candidate above the BH threshold")

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "params": self.params,
            "candidates": [
                {
                    "index": c.index,
                    "height": c.height,
                    "neighbors": {str(k): v for k, v in sorted(c.neighbor_heights.items())},
                    "p_value": c.p_value,
                    **({"p_value_stderr": c.p_value_stderr} if c.p_value_stderr is not None else {}),
                }
                for c in self.candidates
            ],
            "detected": list(self.detected),
            "threshold": self.bh_threshold,
        }


def write_detection_json(result: DetectionResult, path) -> None:
    with open(path, "w") as fh:
        json.dump(result.to_json_dict(), fh, indent=2)
        fh.write("\n")


def moments_for(noise: NoiseSpec, kernel: KernelSpec, moments_bandwidth: str = "composed") -> NoiseMoments:
    """Null moments for the smoothed measurement."""
    if moments_bandwidth not in MOMENTS_BANDWIDTHS:
        raise ValueError(f"moments_bandwidth must be one of {MOMENTS_BANDWIDTHS}")
    if noise.sigma <= 0.0:
        raise ValueError("a positive noise scale is required to form p-values")
    xi = (
        effective_bandwidth(noise.bandwidth, kernel.bandwidth)
        if moments_bandwidth == "composed"
        else noise.bandwidth
    )
    return noise_moments(noise.sigma, xi)


def _apply_bh(candidates: list[Candidate], alpha: float) -> tuple[list[int], Optional[float]]:
    series = PValueSeries(
        ids=tuple(c.index for c in candidates),
        values=np.array([c.p_value for c in candidates], dtype=np.float64),
    )
    result: BHResult = bh_reject(series, alpha)
    return sorted(result.rejected), result.threshold


def one_sample_test(
    m: Measurement,
    kernel: KernelSpec,
    noise: NoiseSpec,
    alpha: float,
    moments_bandwidth: str = "composed",
) -> DetectionResult:
    """Detect occurrences from local-maximum heights alone."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    moments = moments_for(noise, kernel, moments_bandwidth)
    smoothed = smooth(m, kernel)
    candidates = find_local_maxima(smoothed)
    heights = np.array([c.height for c in candidates])
    for cand, p in zip(candidates, one_sample_pvalues(heights, moments)):
        cand.set_p_value(float(p))
    detected, threshold = _apply_bh(candidates, alpha)
    return DetectionResult(
        method=ONE_SAMPLE,
        candidates=candidates,
        detected=detected,
        bh_threshold=threshold,
        params={
            "alpha": alpha,
            "gamma": kernel.bandwidth,
            "sigma": noise.sigma,
            "nu": noise.bandwidth,
            "moments_bandwidth": moments_bandwidth,
        },
    )


def k_sample_test(
    m: Measurement,
    kernel: KernelSpec,
    noise: NoiseSpec,
    alpha: float,
    nc: NeighborConfig,
    quad: QuadratureSpec | None = None,
    moments_bandwidth: str = "composed",
    neighbor_floor: bool = False,
    mc_seed: int = 0,
    mc_stream_id: int = 0,
) -> DetectionResult:
    """Detect occurrences from the joint law of each maximum and its
    neighbor(s) at distance d.

    K=2 evaluates the joint p-value by quadrature; K>2 estimates it by
    Monte Carlo over a shared simulated null ensemble and attaches standard
    errors to the candidates. ``neighbor_floor`` forces the neighbor
    threshold to -inf, which collapses the test to the one-sample p-value
    (a consistency/debug mode).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    moments = moments_for(noise, kernel, moments_bandwidth)
    smoothed = smooth(m, kernel)
    candidates = find_local_maxima(smoothed)
    offsets = nc.offsets()
    collect_neighbors(smoothed, candidates, sorted(set(offsets)))

    params = {
        "alpha": alpha,
        "gamma": kernel.bandwidth,
        "sigma": noise.sigma,
        "nu": noise.bandwidth,
        "moments_bandwidth": moments_bandwidth,
        "k": nc.k,
        "d": nc.distance,
        "policy": nc.side_policy,
        "neighbor_floor": neighbor_floor,
    }

    if nc.k == 2:
        model = joint_null_model(moments, nc.distance)
        heights = np.array([c.height for c in candidates])
        if neighbor_floor:
            s1 = np.full(heights.shape, -np.inf)
        else:
            s1 = np.array([select_neighbor(c, nc) for c in candidates])
        for cand, p in zip(candidates, two_sample_pvalues(heights, s1, model, quad)):
            cand.set_p_value(float(p))
    else:
        ensemble = simulate_null_maxima(moments, offsets, nc.mc_samples, mc_seed, mc_stream_id)
        if ensemble.n_maxima < 1_000:
            raise InsufficientMaximaError(
                f"only {ensemble.n_maxima} conditioning events; need >= 1000"
            )
        for cand in candidates:
            if neighbor_floor:
                thr = [cand.height] + [-math.inf] * len(offsets)
            else:
                thr = [cand.height] + [cand.neighbor_heights[o] for o in offsets]
            est = ensemble.exceedance(thr)
            cand.set_p_value(est.value, est.stderr)
        params["mc_samples"] = nc.mc_samples
        params["mc_n_maxima"] = ensemble.n_maxima
        params["mc_seed"] = mc_seed

    detected, threshold = _apply_bh(candidates, alpha)
    return DetectionResult(
        method=K_SAMPLE,
        candidates=candidates,
        detected=detected,
        bh_threshold=threshold,
        params=params,
    )
