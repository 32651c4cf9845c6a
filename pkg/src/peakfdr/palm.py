"""Height distribution of local maxima of the smoothed noise (its Palm
distribution) and the resulting one-sample p-values.

For white noise convolved with a Gaussian density of bandwidth ``nu`` and
then smoothed with a Gaussian kernel of bandwidth ``gamma``, the result is
again Gaussian-correlated with effective bandwidth xi = sqrt(nu^2 + gamma^2).
Its spectral moments have closed forms

    Var z   = sigma^2 / (2 sqrt(pi) xi)
    Var z'  = sigma^2 / (4 sqrt(pi) xi^3)
    Var z'' = 3 sigma^2 / (8 sqrt(pi) xi^5)

(each equals sigma^2 times the squared L2 norm of the corresponding kernel
derivative), and the upper tail of the height of a local maximum is

    S(u) = 1 - Phi(u sqrt(l4/Delta))
           + sqrt(2 pi l2^2/(l4 s2)) phi(u/s) Phi(u l2/(sqrt(Delta) s))

with s2 = Var z, l2 = Var z', l4 = Var z'', Delta = s2*l4 - l2^2, s=sqrt(s2).
S decreases from 1 at -inf to 0 at +inf; evaluated at an observed height it
is the one-sample p-value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels


class InvalidMomentsError(ValueError):
    """Spectral moments violate the positivity required by the height law."""


@dataclass(frozen=True)
class NoiseMoments:
    """Spectral moments of the smoothed noise process.

    delta = sigma_gamma_sq * lambda4 - lambda2^2 must be strictly positive,
    which holds for any Gaussian-correlated noise (Cauchy-Schwarz is strict).
    """

    sigma_gamma_sq: float
    lambda2: float
    lambda4: float
    bandwidth: float
    delta: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if min(self.sigma_gamma_sq, self.lambda2, self.lambda4) <= 0.0:
            raise InvalidMomentsError("all moments must be positive")
        if self.bandwidth <= 0.0:
            raise InvalidMomentsError("bandwidth must be positive")
        if self.delta is None:
            object.__setattr__(
                self, "delta", self.sigma_gamma_sq * self.lambda4 - self.lambda2 ** 2
            )
        if self.delta <= 0.0:
            raise InvalidMomentsError(f"delta must be positive, got {self.delta}")

    @property
    def sigma_gamma(self) -> float:
        return math.sqrt(self.sigma_gamma_sq)


def effective_bandwidth(nu: float, gamma: float) -> float:
    """Bandwidth of nu-correlated noise after smoothing with a gamma kernel."""
    if nu <= 0.0:
        raise ValueError("nu must be positive")
    if gamma < 0.0:
        raise ValueError("gamma must be >= 0")
    return math.hypot(nu, gamma)


def noise_moments(sigma: float, xi: float) -> NoiseMoments:
    """Closed-form spectral moments at noise scale sigma and bandwidth xi."""
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    if xi <= 0.0:
        raise ValueError("xi must be positive")
    s2 = sigma ** 2
    sqrt_pi = math.sqrt(math.pi)
    return NoiseMoments(
        sigma_gamma_sq=s2 / (2.0 * sqrt_pi * xi),
        lambda2=s2 / (4.0 * sqrt_pi * xi ** 3),
        lambda4=3.0 * s2 / (8.0 * sqrt_pi * xi ** 5),
        bandwidth=xi,
    )


def palm_upper_tail(u: float, m: NoiseMoments) -> float:
    """P(height of a local maximum > u); strictly decreasing, in [0, 1]."""
    return float(_kernels.peak_tail(float(u), m.sigma_gamma_sq, m.lambda2, m.lambda4, m.delta))


def palm_upper_tails(u: np.ndarray, m: NoiseMoments) -> np.ndarray:
    u = np.ascontiguousarray(u, dtype=np.float64)
    return np.asarray(_kernels.peak_tails(u, m.sigma_gamma_sq, m.lambda2, m.lambda4, m.delta))


def palm_density(u: float, m: NoiseMoments) -> float:
    """Height density of a local maximum: the negative derivative of the
    upper tail, differentiated term by term."""
    return float(_kernels.peak_density(float(u), m.sigma_gamma_sq, m.lambda2, m.lambda4, m.delta))


def one_sample_pvalue(height: float, m: NoiseMoments) -> float:
    """p-value of a local maximum from its height alone."""
    return palm_upper_tail(height, m)


def one_sample_pvalues(heights: np.ndarray, m: NoiseMoments) -> np.ndarray:
    return palm_upper_tails(heights, m)
