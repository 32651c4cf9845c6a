"""Joint tests on a local maximum and K-1 of its neighbors.

The joint null factors through the chain rule into the height density of the
maximum times conditional laws of the neighbors. At K=2 the conditional of
the neighbor given peak value u is approximated by the stationary Gaussian
conditional Normal(rho*u, sg^2 (1 - rho^2)) truncated above at u (the peak
dominates its neighborhood), where rho = exp(-d^2 / (4 xi^2)) is the lag-d
autocorrelation of the smoothed noise. The resulting conservative p-value

    p(sm, s1) = integral_{sm}^{inf} density(u) P(z1 > s1 | z_peak=u, z1<=u) du

is evaluated by adaptive quadrature. For K > 2 the same upper-orthant
probability is estimated by Monte Carlo over simulated null maxima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .filtering import Candidate
from .numerics import QuadratureError, QuadratureSpec
from .palm import NoiseMoments
from .signal_model import NoiseSpec, generate_noise

SIDE_POLICIES = ("right", "left", "both-min", "both-max")


class MissingNeighborError(KeyError):
    """Candidate lacks a neighbor height required by the side policy."""


class InsufficientMaximaError(RuntimeError):
    """Monte Carlo estimation found too few conditioning events."""


@dataclass(frozen=True)
class NeighborConfig:
    """How many neighbors to test, where they sit, and which side to read."""

    distance: int
    k: int = 2
    side_policy: str = "right"
    mc_samples: int = 200_000

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.distance < 1:
            raise ValueError("distance must be >= 1")
        if self.side_policy not in SIDE_POLICIES:
            raise ValueError(f"side_policy must be one of {SIDE_POLICIES}")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")

    def offsets(self) -> tuple[int, ...]:
        """Grid offsets whose heights the test needs."""
        if self.side_policy == "right":
            base = [self.distance]
        elif self.side_policy == "left":
            base = [-self.distance]
        else:
            base = [-self.distance, self.distance]
        if self.k == 2:
            return tuple(base)
        if self.side_policy not in ("right", "left"):
            raise ValueError("side_policy must be 'right' or 'left' when k > 2")
        sign = 1 if self.side_policy == "right" else -1
        return tuple(sign * self.distance * i for i in range(1, self.k))


@dataclass(frozen=True)
class JointNullModel:
    """Covariance structure of (peak, neighbor) under the null."""

    moments: NoiseMoments
    distance: int
    rho: float
    conditional_sd: float

    def __post_init__(self):
        if not 0.0 < abs(self.rho) < 1.0:
            raise ValueError("need 0 < |rho| < 1")
        if self.conditional_sd <= 0.0:
            raise ValueError("conditional_sd must be positive")


def neighbor_correlation(d: float, xi: float) -> float:
    """Lag-d autocorrelation exp(-d^2/(4 xi^2)) of the smoothed noise."""
    if d < 0:
        raise ValueError("d must be >= 0")
    if xi <= 0.0:
        raise ValueError("xi must be positive")
    return math.exp(-d * d / (4.0 * xi * xi))


def joint_null_model(moments: NoiseMoments, distance: int) -> JointNullModel:
    rho = neighbor_correlation(distance, moments.bandwidth)
    csd = moments.sigma_gamma * math.sqrt(1.0 - rho * rho)
    return JointNullModel(moments=moments, distance=int(distance), rho=rho, conditional_sd=csd)


def conditional_neighbor_tail(u: float, s1: float, model: JointNullModel) -> float:
    """P(z1 > s1 | z_peak = u, z1 <= u) under the truncated conditional;
    degenerate truncation (no mass below u) counts as zero."""
    t = _kernels.trunc_tail(model.rho * u, model.conditional_sd, u, s1)
    return 0.0 if math.isnan(t) else float(t)


def two_sample_pvalue(
    s_m: float,
    s1: float,
    model: JointNullModel,
    quad: QuadratureSpec | None = None,
) -> float:
    """Conservative joint p-value P(peak > s_m, neighbor > s1) under the null."""
    quad = quad or QuadratureSpec()
    mom = model.moments
    if math.isinf(s_m) and s_m > 0:
        return 0.0
    sg = mom.sigma_gamma
    lo = max(s_m, -quad.tail_cutoff * sg)
    hi = max(s_m, 0.0) + quad.tail_cutoff * sg
    value, ok = _kernels.joint_pvalue(
        lo, s1, model.rho, model.conditional_sd,
        mom.sigma_gamma_sq, mom.lambda2, mom.lambda4, mom.delta,
        quad.rel_tol, quad.abs_tol, quad.max_subdivisions, hi,
    )
    if not ok:
        raise QuadratureError("joint p-value quadrature did not converge")
    return float(min(max(value, 0.0), 1.0))


def two_sample_pvalues(
    heights: np.ndarray,
    neighbor_heights: np.ndarray,
    model: JointNullModel,
    quad: QuadratureSpec | None = None,
) -> np.ndarray:
    """Batch form of two_sample_pvalue over candidate arrays."""
    quad = quad or QuadratureSpec()
    mom = model.moments
    heights = np.ascontiguousarray(heights, dtype=np.float64)
    neighbor_heights = np.ascontiguousarray(neighbor_heights, dtype=np.float64)
    values, ok = _kernels.joint_pvalues(
        heights, neighbor_heights, model.rho, model.conditional_sd,
        mom.sigma_gamma_sq, mom.lambda2, mom.lambda4, mom.delta,
        quad.rel_tol, quad.abs_tol, quad.max_subdivisions, quad.tail_cutoff,
    )
    if not np.all(ok):
        raise QuadratureError("joint p-value quadrature did not converge")
    return np.asarray(values)


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    n_events: int


class NullMaximaEnsemble:
    """Simulated maxima of the stationary null process with their neighbor
    heights at fixed offsets; shared across threshold evaluations."""

    def __init__(self, heights: np.ndarray, neighbors: np.ndarray, offsets: tuple[int, ...]):
        self.heights = heights
        self.neighbors = neighbors  # shape (n_maxima, len(offsets))
        self.offsets = offsets

    @property
    def n_maxima(self) -> int:
        return self.heights.size

    def exceedance(self, thresholds) -> McEstimate:
        """Frequency of {peak > t0, neighbor_j > t_j for all j}."""
        thresholds = np.asarray(thresholds, dtype=np.float64)
        if thresholds.size != 1 + len(self.offsets):
            raise ValueError("one threshold for the peak plus one per neighbor")
        hit = self.heights > thresholds[0]
        for j in range(len(self.offsets)):
            hit &= self.neighbors[:, j] > thresholds[j + 1]
        n = self.heights.size
        p = float(np.count_nonzero(hit)) / n
        stderr = math.sqrt(max(p * (1.0 - p), 1.0 / n) / n)
        return McEstimate(p, stderr, n)


def simulate_null_maxima(
    moments: NoiseMoments,
    offsets: tuple[int, ...],
    target_maxima: int,
    seed: int,
    stream_id: int,
    segment_length: int = 8192,
) -> NullMaximaEnsemble:
    """Simulate the null process and harvest local maxima with neighbors."""
    xi = moments.bandwidth
    # invert Var z = sigma^2/(2 sqrt(pi) xi) to hit the requested variance
    sigma_eff = math.sqrt(moments.sigma_gamma_sq * 2.0 * math.sqrt(math.pi) * xi)
    spec = NoiseSpec(sigma=sigma_eff, bandwidth=xi)
    rate = math.sqrt(moments.lambda4 / moments.lambda2) / (2.0 * math.pi)
    n_segments = max(1, int(math.ceil(target_maxima / (rate * segment_length))))
    heights = []
    neighbors = []
    for k in range(n_segments):
        z = generate_noise(spec, segment_length, 1.0, seed, stream_id + k)
        idx = _kernels.local_maxima_indices(z)
        heights.append(z[idx])
        neighbors.append(
            np.stack([z[(idx + off) % segment_length] for off in offsets], axis=1)
            if offsets else np.empty((idx.size, 0))
        )
    return NullMaximaEnsemble(np.concatenate(heights), np.vstack(neighbors), tuple(offsets))


def k_sample_pvalue_mc(
    thresholds,
    offsets,
    model: JointNullModel,
    mc_samples: int = 200_000,
    seed: int = 0,
    stream_id: int = 0,
) -> McEstimate:
    """Monte Carlo estimate of the upper-orthant probability
    P(peak > t0, neighbor_j > t_j for all j) conditioned on a local maximum."""
    thresholds = tuple(float(t) for t in thresholds)
    offsets = tuple(int(o) for o in offsets)
    if len(thresholds) != len(offsets) + 1:
        raise ValueError("need K thresholds for K-1 offsets")
    if len(thresholds) < 2:
        raise ValueError("K must be >= 2")
    ensemble = simulate_null_maxima(model.moments, offsets, mc_samples, seed, stream_id)
    if ensemble.n_maxima < 1_000:
        raise InsufficientMaximaError(
            f"only {ensemble.n_maxima} conditioning events; need >= 1000"
        )
    return ensemble.exceedance(thresholds)


def select_neighbor(candidate: Candidate, config: NeighborConfig) -> float:
    """Neighbor height the two-sample test thresholds on, per side policy."""
    d = config.distance
    try:
        if config.side_policy == "right":
            return candidate.neighbor_heights[d]
        if config.side_policy == "left":
            return candidate.neighbor_heights[-d]
        pair = (candidate.neighbor_heights[-d], candidate.neighbor_heights[d])
    except KeyError as exc:
        raise MissingNeighborError(
            f"candidate {candidate.index} lacks neighbor at offset {exc.args[0]}"
        ) from exc
    return min(pair) if config.side_policy == "both-min" else max(pair)
