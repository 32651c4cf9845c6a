"""Monte Carlo harness: sweep configurations, run paired one-sample and
two-sample detections on identical measurements, classify detections by
support membership, and aggregate power and FDR over trials.

Trials are independent and keyed by trial index, so parallel execution
order never changes the aggregate: every trial derives its random streams
from (base_seed, trial_index) alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from multiprocessing import get_context
from typing import Iterable, Optional

import numpy as np

from .filtering import KernelSpec
from .ksample import NeighborConfig
from .pipeline import k_sample_test, one_sample_test
from .signal_model import NoiseSpec, SignalSpec, place_occurrences, synthesize

ONE_SAMPLE = "one-sample"
TWO_SAMPLE = "two-sample"
METHODS = (ONE_SAMPLE, TWO_SAMPLE)

# stream slots per trial; placement and noise take 0 and 1, the rest are spare
_STREAMS_PER_TRIAL = 4

CSV_COLUMNS = (
    "L", "n_signals", "a", "b", "c", "sigma", "nu", "gamma", "alpha", "d",
    "policy", "n_trials", "method", "power", "power_stderr", "fdr",
    "fdr_stderr", "mean_V", "mean_R",
)


@dataclass(frozen=True)
class TrialConfig:
    """One point of the experiment grid."""

    a: float
    b: float
    sigma: float
    nu: float
    gamma: float
    d: int
    L: int = 1000
    n_signals: int = 10
    c: float = 3.0
    alpha: float = 0.05
    side_policy: str = "right"
    n_trials: int = 1000
    base_seed: int = 0
    moments_bandwidth: str = "composed"
    min_gap: Optional[float] = None  # defaults to one support width

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.n_signals < 0:
            raise ValueError("n_signals must be >= 0")
        for name in ("a", "b", "sigma", "nu", "gamma", "c"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")

    @property
    def support_halfwidth(self) -> float:
        return self.c * self.b

    @property
    def gap(self) -> float:
        return 2.0 * self.support_halfwidth if self.min_gap is None else self.min_gap


@dataclass(frozen=True)
class TrialOutcome:
    """Per-trial detection bookkeeping for one method."""

    v: int  # false positives
    r: int  # all rejections
    n_signals_hit: int  # distinct supports receiving >= 1 detection


@dataclass(frozen=True)
class MethodMetrics:
    power: float
    power_stderr: float
    fdr: float  # mean of V / max(R, 1), the unconditional estimator
    fdr_stderr: float
    fdr_conditional: float  # mean of V/R over trials with R > 0
    prop_any_rejection: float
    mean_v: float
    mean_r: float


@dataclass(frozen=True)
class MetricsSummary:
    config: TrialConfig
    per_method: dict

    def method(self, name: str) -> MethodMetrics:
        return self.per_method[name]


def classify_detections(
    detected_indices: Iterable[int],
    signal: SignalSpec,
    dt: float = 1.0,
    origin: float = 0.0,
) -> tuple[int, int, int]:
    """Count true positives, false positives, and distinct supports hit.

    A detection at grid position t is a true positive iff t lies inside the
    closed support [center - c*b, center + c*b] of some occurrence.
    """
    supports = signal.supports()
    tp = fp = 0
    hit = [False] * len(supports)
    for idx in detected_indices:
        t = origin + dt * idx
        for j, (lo, hi) in enumerate(supports):
            if lo <= t <= hi:
                tp += 1
                hit[j] = True
                break
        else:
            fp += 1
    return tp, fp, sum(hit)


def run_trial(config: TrialConfig, trial_index: int) -> dict[str, TrialOutcome]:
    """Simulate one measurement and run both methods on it (paired design)."""
    base = config.base_seed
    placement_stream = trial_index * _STREAMS_PER_TRIAL
    noise_stream = trial_index * _STREAMS_PER_TRIAL + 1
    centers = place_occurrences(
        config.n_signals, config.L, 1.0,
        support_halfwidth=config.support_halfwidth,
        min_gap=config.gap,
        seed=base, stream_id=placement_stream,
    )
    signal = SignalSpec(config.a, config.b, config.c, tuple(centers))
    noise = NoiseSpec(config.sigma, config.nu)
    m = synthesize(signal, noise, config.L, 1.0, seed=base, stream_id=noise_stream)
    kernel = KernelSpec(config.gamma)
    nc = NeighborConfig(distance=config.d, side_policy=config.side_policy)

    res_one = one_sample_test(m, kernel, noise, config.alpha, config.moments_bandwidth)
    res_two = k_sample_test(m, kernel, noise, config.alpha, nc,
                            moments_bandwidth=config.moments_bandwidth)

    outcomes = {}
    for name, res in ((ONE_SAMPLE, res_one), (TWO_SAMPLE, res_two)):
        tp, fp, hits = classify_detections(res.detected, signal, 1.0, 0.0)
        outcomes[name] = TrialOutcome(v=fp, r=tp + fp, n_signals_hit=hits)
    return outcomes


@dataclass
class TrialRecords:
    """Stacked per-trial outcomes for one config, ordered by trial index."""

    config: TrialConfig
    v: dict  # method -> int array
    r: dict
    hits: dict

    def power_per_trial(self, method: str) -> np.ndarray:
        if self.config.n_signals == 0:
            return np.zeros(self.config.n_trials)
        return self.hits[method] / self.config.n_signals

    def fdp_per_trial(self, method: str) -> np.ndarray:
        return self.v[method] / np.maximum(self.r[method], 1)


def _trial_worker(args) -> tuple[int, dict]:
    config, trial_index = args
    return trial_index, run_trial(config, trial_index)


def run_config_trials(config: TrialConfig, parallel: int = 1) -> TrialRecords:
    """Run all trials of one config; results identical for any parallelism."""
    indices = range(config.n_trials)
    if parallel <= 1:
        keyed = {i: run_trial(config, i) for i in indices}
    else:
        ctx = get_context()
        with ctx.Pool(processes=parallel) as pool:
            keyed = dict(pool.imap_unordered(
                _trial_worker, ((config, i) for i in indices), chunksize=4
            ))
    v = {m: np.array([keyed[i][m].v for i in indices]) for m in METHODS}
    r = {m: np.array([keyed[i][m].r for i in indices]) for m in METHODS}
    hits = {m: np.array([keyed[i][m].n_signals_hit for i in indices]) for m in METHODS}
    return TrialRecords(config=config, v=v, r=r, hits=hits)


def _stderr(x: np.ndarray) -> float:
    n = x.size
    if n < 2:
        return 0.0
    return float(np.std(x, ddof=1) / math.sqrt(n))


def summarize(records: TrialRecords) -> MetricsSummary:
    per_method = {}
    for method in METHODS:
        power_t = records.power_per_trial(method)
        fdp_t = records.fdp_per_trial(method)
        r = records.r[method]
        any_r = r > 0
        cond = float(np.mean(fdp_t[any_r])) if any_r.any() else 0.0
        per_method[method] = MethodMetrics(
            power=float(np.mean(power_t)),
            power_stderr=_stderr(power_t),
            fdr=float(np.mean(fdp_t)),
            fdr_stderr=_stderr(fdp_t),
            fdr_conditional=cond,
            prop_any_rejection=float(np.mean(any_r)),
            mean_v=float(np.mean(records.v[method])),
            mean_r=float(np.mean(r)),
        )
    return MetricsSummary(config=records.config, per_method=per_method)


def run_grid(configs: list[TrialConfig], parallel: int = 1) -> list[MetricsSummary]:
    return [summarize(run_config_trials(cfg, parallel)) for cfg in configs]


# --- serialization ---------------------------------------------------------


def csv_rows(summary: MetricsSummary) -> list[str]:
    cfg = summary.config
    rows = []
    for method in METHODS:
        met = summary.per_method[method]
        values = (
            cfg.L, cfg.n_signals, cfg.a, cfg.b, cfg.c, cfg.sigma, cfg.nu,
            cfg.gamma, cfg.alpha, cfg.d, cfg.side_policy, cfg.n_trials, method,
            met.power, met.power_stderr, met.fdr, met.fdr_stderr,
            met.mean_v, met.mean_r,
        )
        rows.append(",".join(
            v if isinstance(v, str) else (f"{v:.17g}" if isinstance(v, float) else str(v))
            for v in values
        ))
    return rows


def write_grid_csv(summaries: list[MetricsSummary], path) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for summary in summaries:
            for row in csv_rows(summary):
                fh.write(row + "\n")


def sidecar_dict(summaries: list[MetricsSummary]) -> dict:
    return {
        "configs": [asdict(s.config) for s in summaries],
        "metrics": [
            {m: asdict(s.per_method[m]) for m in METHODS} for s in summaries
        ],
    }


def write_grid_sidecar(summaries: list[MetricsSummary], path) -> None:
    with open(path, "w") as fh:
        json.dump(sidecar_dict(summaries), fh, indent=2)
        fh.write("\n")
