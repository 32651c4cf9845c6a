"""Synthetic measurements: a train of truncated-Gaussian bumps plus
kernel-smoothed white Gaussian noise on a uniform grid.

The noise is white Gaussian increments convolved circularly with a sampled
Gaussian density of standard deviation ``bandwidth``; circular wrap keeps the
process stationary across the whole grid. Signal supports are required to
stay inside the domain, so the bumps are never wrapped.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import numerics
from ._kernels import circular_convolve, gaussian_taps

_SQRT2PI = math.sqrt(2.0 * math.pi)

NOISE_KERNEL_RADIUS_SD = 6.0  # truncation point of the sampled noise kernel


class InvalidSignalError(ValueError):
    """A signal support falls outside the measurement domain."""


class PlacementError(RuntimeError):
    """Could not place the requested occurrences with the required gaps."""


class MeasurementFormatError(ValueError):
    """A measurement file could not be parsed."""


@dataclass(frozen=True)
class SignalSpec:
    """Train of Gaussian bumps: each occurrence is (amplitude/width) *
    phi((t - center)/width) restricted to |t - center| <= support_mult*width.

    ``amplitude`` is a single shared value or one value per center.
    """

    amplitude: float | Sequence[float]
    width: float
    support_mult: float = 3.0
    centers: tuple[float, ...] = ()

    def __post_init__(self):
        if self.width <= 0.0:
            raise ValueError("width must be positive")
        if self.support_mult <= 0.0:
            raise ValueError("support_mult must be positive")
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
        if any(b < a for a, b in zip(self.centers, self.centers[1:])):
            raise ValueError("centers must be sorted ascending")
        amps = self.amplitudes()
        if np.any(amps <= 0.0):
            raise ValueError("amplitudes must be positive")

    def amplitudes(self) -> np.ndarray:
        n = len(self.centers)
        if np.isscalar(self.amplitude):
            return np.full(n, float(self.amplitude))
        amps = np.asarray(self.amplitude, dtype=np.float64)
        if amps.shape != (n,):
            raise ValueError("need one amplitude per center")
        return amps

    @property
    def support_halfwidth(self) -> float:
        return self.support_mult * self.width

    def supports(self) -> list[tuple[float, float]]:
        hw = self.support_halfwidth
        return [(c - hw, c + hw) for c in self.centers]


@dataclass(frozen=True)
class NoiseSpec:
    """Scale and correlation bandwidth of the smoothed white noise."""

    sigma: float
    bandwidth: float

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError("sigma must be >= 0")
        if self.bandwidth <= 0.0:
            raise ValueError("bandwidth must be positive")


@dataclass
class Measurement:
    """Uniformly sampled series y(t); optionally carries its signal and
    noise components when they are known (e.g. synthetic data)."""

    samples: np.ndarray
    dt: float = 1.0
    origin: float = 0.0
    signal: np.ndarray | None = field(default=None, repr=False)
    noise: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size < 3:
            raise ValueError("need a 1-D series of length >= 3")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.origin + self.dt * np.arange(self.samples.size)


def signal_train(spec: SignalSpec, length: int, dt: float = 1.0, origin: float = 0.0) -> np.ndarray:
    """Sample the bump train on the grid; overlapping supports add."""
    if length < 3:
        raise ValueError("length must be >= 3")
    t_max = origin + (length - 1) * dt
    hw = spec.support_halfwidth
    mu = np.zeros(length)
    for center, amp in zip(spec.centers, spec.amplitudes()):
        if center - hw < origin or center + hw > t_max:
            raise InvalidSignalError(
                f"support [{center - hw}, {center + hw}] exceeds domain [{origin}, {t_max}]"
            )
        i_lo = int(math.ceil((center - hw - origin) / dt))
        i_hi = int(math.floor((center + hw - origin) / dt))
        t = origin + dt * np.arange(i_lo, i_hi + 1)
        z = (t - center) / spec.width
        mu[i_lo:i_hi + 1] += (amp / spec.width) * np.exp(-0.5 * z * z) / _SQRT2PI
    return mu


def noise_kernel_taps(bandwidth: float, dt: float = 1.0) -> np.ndarray:
    """Sampled Gaussian density, truncated at 6 sd and renormalized so the
    discrete integral (sum * dt) is exactly one."""
    taps, _ = gaussian_taps(bandwidth, dt, NOISE_KERNEL_RADIUS_SD)
    return taps / (taps.sum() * dt)


def generate_noise(
    spec: NoiseSpec, length: int, dt: float = 1.0, seed: int = 0, stream_id: int = 0
) -> np.ndarray:
    """Circular convolution of N(0, dt) white increments with the sampled
    Gaussian kernel, scaled by sigma. Stationary everywhere by wrap-around."""
    if length < 3:
        raise ValueError("length must be >= 3")
    if spec.sigma == 0.0:
        return np.zeros(length)
    eps = numerics.sample_std_normals(seed, stream_id, length)
    taps = noise_kernel_taps(spec.bandwidth, dt)
    # Riemann sum of the kernel against N(0, dt) Brownian increments:
    # taps are density values, increments are sqrt(dt) * eps
    return spec.sigma * math.sqrt(dt) * circular_convolve(eps, taps)


def synthesize(
    signal: SignalSpec,
    noise: NoiseSpec,
    length: int,
    dt: float = 1.0,
    seed: int = 0,
    stream_id: int = 0,
    origin: float = 0.0,
) -> Measurement:
    """Measurement y = signal train + noise, with components attached."""
    mu = signal_train(signal, length, dt, origin)
    z = generate_noise(noise, length, dt, seed, stream_id)
    return Measurement(mu + z, dt=dt, origin=origin, signal=mu, noise=z)


def place_occurrences(
    count: int,
    length: int,
    dt: float = 1.0,
    support_halfwidth: float = 9.0,
    min_gap: float = 18.0,
    seed: int = 0,
    stream_id: int = 0,
    origin: float = 0.0,
    max_rounds: int = 10_000,
) -> np.ndarray:
    """Uniformly random sorted centers whose supports fit in the domain and
    are separated by at least min_gap, by rejection sampling."""
    if count < 0:
        raise ValueError("count must be >= 0")
    if count == 0:
        return np.empty(0)
    t_max = origin + (length - 1) * dt
    lo = origin + support_halfwidth
    hi = t_max - support_halfwidth
    needed = count * 2.0 * support_halfwidth + (count - 1) * min_gap
    if hi < lo or needed > (t_max - origin):
        raise PlacementError(
            f"cannot fit {count} supports of half-width {support_halfwidth} "
            f"with gaps {min_gap} into a domain of length {t_max - origin}"
        )
    min_spacing = 2.0 * support_halfwidth + min_gap
    rng = numerics.rng_stream(seed, stream_id)
    for _ in range(max_rounds):
        centers = np.sort(rng.uniform(lo, hi, size=count))
        if count == 1 or np.all(np.diff(centers) >= min_spacing):
            return centers
    raise PlacementError(f"no admissible placement after {max_rounds} rounds")


# --- serialization ---------------------------------------------------------

_BIN_HEADER = struct.Struct("<qdd")


def write_measurement_csv(m: Measurement, path) -> None:
    mu = m.signal if m.signal is not None else np.zeros(len(m))
    z = m.noise if m.noise is not None else np.zeros(len(m))
    t = m.times
    with open(path, "w") as fh:
        fh.write("index,t,mu,z,y\n")
        for i in range(len(m)):
            fh.write(f"{i},{t[i]:.17g},{mu[i]:.17g},{z[i]:.17g},{m.samples[i]:.17g}\n")


def read_measurement_csv(path) -> Measurement:
    try:
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            cols = {name: j for j, name in enumerate(header)}
            if "y" not in cols or "t" not in cols:
                raise MeasurementFormatError(f"{path}: expected 't' and 'y' columns")
            rows = [line.strip().split(",") for line in fh if line.strip()]
        t = np.array([float(r[cols["t"]]) for r in rows])
        y = np.array([float(r[cols["y"]]) for r in rows])
        mu = z = None
        if "mu" in cols:
            mu = np.array([float(r[cols["mu"]]) for r in rows])
        if "z" in cols:
            z = np.array([float(r[cols["z"]]) for r in rows])
    except (OSError, ValueError, IndexError) as exc:
        if isinstance(exc, MeasurementFormatError):
            raise
        raise MeasurementFormatError(f"{path}: {exc}") from exc
    if t.size < 3:
        raise MeasurementFormatError(f"{path}: need at least 3 rows")
    dt = float(t[1] - t[0])
    if dt <= 0 or not np.allclose(np.diff(t), dt, rtol=1e-9, atol=1e-12):
        raise MeasurementFormatError(f"{path}: non-uniform time grid")
    return Measurement(y, dt=dt, origin=float(t[0]), signal=mu, noise=z)


def write_measurement_bin(m: Measurement, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_BIN_HEADER.pack(len(m), m.dt, m.origin))
        fh.write(np.ascontiguousarray(m.samples, dtype="<f8").tobytes())


def read_measurement_bin(path) -> Measurement:
    try:
        with open(path, "rb") as fh:
            raw = fh.read(_BIN_HEADER.size)
            length, dt, origin = _BIN_HEADER.unpack(raw)
            data = np.frombuffer(fh.read(), dtype="<f8")
    except (OSError, struct.error, ValueError) as exc:
        raise MeasurementFormatError(f"{path}: {exc}") from exc
    if data.size != length:
        raise MeasurementFormatError(f"{path}: expected {length} samples, got {data.size}")
    return Measurement(data.astype(np.float64), dt=dt, origin=origin)
