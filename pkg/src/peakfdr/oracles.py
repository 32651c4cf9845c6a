"""Independent cross-checks of the statistical kernels.

Each oracle validates an implementation against a route that does not share
code with it: closed-form moments against adaptive quadrature of kernel
norms, the local-maximum height law against the empirical distribution of
simulated maxima, the step-up rule against exhaustive search over k, and
the joint p-value against a direct frequency estimate. The ``selftest`` CLI
command and the acceptance tests both run these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ksample import joint_null_model, simulate_null_maxima, two_sample_pvalue
from .multitest import PValueSeries, bh_reject
from .numerics import QuadratureSpec, integrate, rng_stream
from .palm import effective_bandwidth, noise_moments, palm_upper_tails


@dataclass
class OracleReport:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.name}: measured={self.measured:.3e} "
            f"tolerance={self.tolerance:.3e} ({self.detail})"
        )


# --- closed-form moments vs quadrature of squared kernel-derivative norms --


def _kernel_derivative_sq_integral(xi: float, order: int, spec: QuadratureSpec) -> float:
    """integral of (d^order/ds^order of the Gaussian density with sd xi)^2."""
    sqrt2pi = math.sqrt(2.0 * math.pi)

    def f(s: float) -> float:
        x = s / xi
        base = math.exp(-0.5 * x * x) / (xi * sqrt2pi)
        if order == 0:
            return base * base
        if order == 1:
            v = -x / xi * base
            return v * v
        v = (x * x - 1.0) / (xi * xi) * base
        return v * v

    bound = spec.tail_cutoff * xi
    return integrate(f, -bound, bound, spec)


def moments_oracle(
    xis=(1.0, 3.0, 5.0, math.sqrt(18.0)), sigma: float = 1.0, tol: float = 1e-8
) -> OracleReport:
    spec = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15, max_subdivisions=400, tail_cutoff=12.0)
    worst = 0.0
    for xi in xis:
        mom = noise_moments(sigma, xi)
        closed = (mom.sigma_gamma_sq, mom.lambda2, mom.lambda4)
        for order, value in enumerate(closed):
            ref = sigma ** 2 * _kernel_derivative_sq_integral(xi, order, spec)
            worst = max(worst, abs(value - ref) / abs(ref))
    return OracleReport(
        name="moments",
        passed=worst <= tol,
        measured=worst,
        tolerance=tol,
        detail=f"max relative error of closed-form moments over xi={tuple(round(x, 4) for x in xis)}",
    )


# --- height law of local maxima vs empirical distribution ------------------


def palm_ecdf_oracle(
    sigma: float = 1.0,
    nu: float = 5.0,
    gamma: float = 4.0,
    n_maxima: int = 100_000,
    tol: float = 0.02,
    seed: int = 777,
) -> OracleReport:
    xi = effective_bandwidth(nu, gamma)
    moments = noise_moments(sigma, xi)
    ensemble = simulate_null_maxima(moments, (), n_maxima, seed, 0)
    heights = np.sort(ensemble.heights)
    ecdf = np.arange(1, heights.size + 1) / heights.size
    model_cdf = 1.0 - palm_upper_tails(heights, moments)
    sup = float(np.max(np.abs(model_cdf - ecdf)))
    return OracleReport(
        name="palm",
        passed=sup <= tol,
        measured=sup,
        tolerance=tol,
        detail=f"sup |ECDF - model CDF| over {heights.size} maxima at nu={nu}, gamma={gamma}",
    )


# --- step-up rule vs exhaustive search --------------------------------------


def brute_force_bh(pvals: np.ndarray, alpha: float) -> tuple[set, float | None]:
    """Try every k explicitly; reject all p <= p_(k*) for the largest valid k."""
    m = pvals.size
    ordered = np.sort(pvals)
    k_star = 0
    for k in range(1, m + 1):
        if ordered[k - 1] <= k * alpha / m:
            k_star = k
    if k_star == 0:
        return set(), None
    threshold = float(ordered[k_star - 1])
    return {i for i in range(m) if pvals[i] <= threshold}, threshold


def bh_oracle(n_instances: int = 10_000, max_m: int = 50, seed: int = 4242) -> OracleReport:
    rng = rng_stream(seed, 0)
    mismatches = 0
    for _ in range(n_instances):
        m = int(rng.integers(1, max_m + 1))
        if rng.random() < 0.5:
            pvals = rng.random(m)
        else:
            pvals = rng.beta(0.3, 4.0, size=m)  # skewed toward small p
        if rng.random() < 0.1 and m >= 2:
            pvals[rng.integers(0, m)] = pvals[rng.integers(0, m)]  # force ties
        alpha = float(rng.uniform(0.01, 0.2))
        got = bh_reject(PValueSeries(tuple(range(m)), pvals), alpha)
        want_set, want_thr = brute_force_bh(pvals, alpha)
        if set(got.rejected) != want_set or (got.threshold is None) != (want_thr is None):
            mismatches += 1
    return OracleReport(
        name="bh",
        passed=mismatches == 0,
        measured=float(mismatches),
        tolerance=0.0,
        detail=f"mismatches vs exhaustive-k search over {n_instances} random instances",
    )


# --- joint p-value vs direct exceedance frequency ---------------------------


def two_sample_oracle(
    sigma: float = 1.0,
    nu: float = 3.0,
    gamma: float = 2.0,
    d: int = 2,
    s_m: float = 0.5,
    s1: float = 0.0,
    n_maxima: int = 200_000,
    n_se: float = 3.0,
    seed: int = 97531,
) -> OracleReport:
    xi = effective_bandwidth(nu, gamma)
    moments = noise_moments(sigma, xi)
    model = joint_null_model(moments, d)
    ensemble = simulate_null_maxima(moments, (d,), n_maxima, seed, 0)
    est = ensemble.exceedance((s_m, s1))
    predicted = two_sample_pvalue(s_m, s1, model)
    # binomial standard error from the pooled proportion, floored at 1/n so a
    # zero-count cell still has a meaningful scale
    pool = max(est.value, predicted, 1.0 / est.n_events)
    se = math.sqrt(pool * (1.0 - min(pool, 0.999999)) / est.n_events)
    diff = abs(est.value - predicted)
    return OracleReport(
        name="two-sample",
        passed=diff <= n_se * se,
        measured=diff,
        tolerance=n_se * se,
        detail=(
            f"|empirical - predicted| at (nu={nu}, gamma={gamma}, d={d}, "
            f"thresholds=({s_m}, {s1})), {est.n_events} maxima"
        ),
    )


def run_oracles(quick: bool = False, only: str | None = None) -> list[OracleReport]:
    """Run the requested oracles; quick mode trades samples for speed."""
    reports = []
    if only in (None, "moments"):
        reports.append(moments_oracle())
    if only in (None, "palm"):
        n = 20_000 if quick else 100_000
        tol = 0.03 if quick else 0.02
        reports.append(palm_ecdf_oracle(n_maxima=n, tol=tol))
    if only in (None, "bh"):
        reports.append(bh_oracle(n_instances=1_000 if quick else 10_000))
    if only in (None, "two-sample"):
        n = 30_000 if quick else 200_000
        reports.append(two_sample_oracle(n_maxima=n))
    if not reports:
        raise ValueError(f"unknown oracle {only!r}")
    return reports
