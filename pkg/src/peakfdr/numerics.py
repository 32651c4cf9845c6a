"""Scalar special functions, adaptive quadrature, and seeded normal sampling.

Everything here is pure: results depend only on the arguments, and random
sampling is a function of an explicit (seed, stream_id) pair, so concurrent
callers never share state.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as _scipy_integrate

_SQRT2 = math.sqrt(2.0)
_MASK64 = (1 << 64) - 1


class QuadratureError(RuntimeError):
    """Adaptive quadrature hit its subdivision limit before the tolerance."""


class DegenerateTruncationError(ValueError):
    """Conditioning mass of a truncated Gaussian underflowed to zero."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and limits for one-dimensional adaptive quadrature.

    ``tail_cutoff`` replaces an infinite endpoint by that many standard
    deviations in the (caller-standardized) units of the integrand; the
    integrands used here all have Gaussian-dominated tails.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 200
    tail_cutoff: float = 10.0

    def __post_init__(self):
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.tail_cutoff <= 0.0:
            raise ValueError("tail_cutoff must be positive")


def std_normal_pdf(x: float) -> float:
    """Standard normal density (2*pi)^(-1/2) exp(-x^2/2)."""
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF via erfc, keeping relative accuracy in the lower tail."""
    return 0.5 * math.erfc(-x / _SQRT2)


def truncated_normal_upper_tail(mean: float, sd: float, upper: float, threshold: float) -> float:
    """P(X > threshold | X <= upper) for X ~ Normal(mean, sd^2).

    Returns 0 for an empty interval (threshold >= upper). Raises
    DegenerateTruncationError when P(X <= upper) underflows to zero, which
    signals a numerically impossible conditioning event.
    """
    if sd <= 0.0:
        raise ValueError("sd must be positive")
    if threshold >= upper:
        return 0.0
    denom = std_normal_cdf((upper - mean) / sd)
    if denom <= 0.0:
        raise DegenerateTruncationError(
            f"P(X <= {upper}) underflowed for Normal({mean}, {sd}^2)"
        )
    numer = denom - std_normal_cdf((threshold - mean) / sd)
    return min(max(numer / denom, 0.0), 1.0)


def integrate(
    f: Callable[[float], float],
    lower: float,
    upper: float,
    spec: QuadratureSpec | None = None,
) -> float:
    """Adaptive quadrature of f over [lower, upper] to the requested tolerances.

    Infinite endpoints are truncated at +/- spec.tail_cutoff; callers pass
    integrands standardized so their tails are negligible beyond the cutoff.
    Raises QuadratureError if the subdivision limit is exhausted first.
    """
    spec = spec or QuadratureSpec()
    a = -spec.tail_cutoff if math.isinf(lower) and lower < 0 else float(lower)
    b = spec.tail_cutoff if math.isinf(upper) and upper > 0 else float(upper)
    with warnings.catch_warnings():
        warnings.simplefilter("error", _scipy_integrate.IntegrationWarning)
        try:
            value, _ = _scipy_integrate.quad(
                f, a, b,
                epsabs=spec.abs_tol,
                epsrel=spec.rel_tol,
                limit=spec.max_subdivisions,
            )
        except _scipy_integrate.IntegrationWarning as exc:
            raise QuadratureError(str(exc)) from exc
    return value


def rng_stream(seed: int, stream_id: int) -> np.random.Generator:
    """Independent reproducible generator for the (seed, stream_id) pair.

    Philox is counter-based, so distinct stream ids give statistically
    independent streams and the mapping is a pure function: the same pair
    yields the identical bit stream regardless of call order or process.
    """
    ss = np.random.SeedSequence(entropy=[int(seed) & _MASK64, int(stream_id) & _MASK64])
    return np.random.Generator(np.random.Philox(ss))


def sample_std_normals(seed: int, stream_id: int, count: int) -> np.ndarray:
    """i.i.d. standard normal draws, bit-reproducible per (seed, stream_id)."""
    if count < 0:
        raise ValueError("count must be >= 0")
    return rng_stream(seed, stream_id).standard_normal(count)
