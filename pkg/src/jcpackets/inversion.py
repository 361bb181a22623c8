"""
Direct simulation of atomic inversion traces.

The complex trace Z(t) = sum_n P_n exp(i 2 pi f(n) t) is evaluated by plain
summation; its real part is the inversion W(t). With the Jaynes-Cummings map
f(n) = g sqrt(n+1)/pi this is the usual collapse-and-revival signal, with the
linear map f(n) = g n/pi it is the exactly periodic variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.signal import hilbert

from .errors import InvalidArgumentError
from .states import PhotonDistribution

_CHUNK = 1 << 22  # complex entries per summation block


@dataclass(frozen=True)
class FrequencyMap:
    """Map n -> f(n): ``"jcm"`` gives g sqrt(n+1)/pi, ``"linear"`` g n/pi."""

    kind: str = "jcm"
    g: float = 1.0

    def __post_init__(self):
        if self.kind not in ("jcm", "linear"):
            raise InvalidArgumentError(f"unknown frequency map {self.kind!r}")
        if not (math.isfinite(self.g) and self.g > 0):
            raise InvalidArgumentError(f"coupling g must be positive, got {self.g}")

    def frequency(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "jcm":
            return self.g * np.sqrt(x + 1) / np.pi
        return self.g * x / np.pi

    def derivative(self, x):
        """df/dx, the Jacobian between photon number and frequency."""
        x = np.asarray(x, dtype=float)
        if self.kind == "jcm":
            return self.g / (2 * np.pi * np.sqrt(x + 1))
        return np.full_like(x, self.g / np.pi)

    def photon_number(self, nu):
        """Real root x of f(x) = nu (NaN where none exists)."""
        nu = np.asarray(nu, dtype=float)
        if self.kind == "jcm":
            with np.errstate(invalid="ignore"):
                return np.where(nu > 0, (np.pi * nu / self.g) ** 2 - 1, np.nan)
        return np.pi * nu / self.g


@dataclass(frozen=True)
class TimeGrid:
    """Uniform samples t_j = t_start + j dt, j = 0..count-1."""

    t_start: float
    dt: float
    count: int

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidArgumentError(f"dt must be positive, got {self.dt}")
        if self.count < 1:
            raise InvalidArgumentError(f"grid needs at least one sample, got {self.count}")

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.count)

    @property
    def t_end(self) -> float:
        return self.t_start + self.dt * (self.count - 1)

    @classmethod
    def span(cls, t_end: float, dt: float, t_start: float = 0.0) -> "TimeGrid":
        """Grid from t_start covering t_end (last sample at or just past t_end)."""
        count = int(math.ceil((t_end - t_start) / dt - 1e-9)) + 1
        return cls(t_start, dt, max(count, 2))

    @classmethod
    def symmetric(cls, half_width: float, dt: float) -> "TimeGrid":
        m = int(round(half_width / dt))
        return cls(-m * dt, dt, 2 * m + 1)


def auto_dt(fmap: FrequencyMap, n_max: int, oversample: float = 8.0) -> float:
    """Sampling step with f(n_max) * dt = 1/oversample (4x Nyquist margin by default)."""
    return 1.0 / (oversample * float(fmap.frequency(max(n_max, 1))))


def aligned_dt(dt: float, mark: float) -> float:
    """Largest step <= dt that puts ``mark`` exactly on a grid starting at 0."""
    if mark <= 0:
        return dt
    return mark / math.ceil(mark / dt - 1e-9)


@dataclass(frozen=True, eq=False)
class InversionTrace:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.count,):
            raise InvalidArgumentError("trace length does not match its grid")
        object.__setattr__(self, "values", v)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times


@dataclass(frozen=True, eq=False)
class ComplexTrace:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.count,):
            raise InvalidArgumentError("trace length does not match its grid")
        object.__setattr__(self, "values", v)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def real(self) -> InversionTrace:
        return InversionTrace(self.grid, self.values.real)


def rabi_populations(n: int, g: float, t):
    """Excited/ground populations (P_e, P_g) for the initial state |e, n>."""
    if int(n) != n or n < 0:
        raise InvalidArgumentError(f"photon number must be a non-negative integer, got {n}")
    if not g > 0:
        raise InvalidArgumentError(f"coupling g must be positive, got {g}")
    half_angle = g * math.sqrt(n + 1) * np.asarray(t, dtype=float)  # Omega_n t / 2
    p_e = np.cos(half_angle) ** 2
    return p_e, 1.0 - p_e


def _series(probs: np.ndarray, freqs: np.ndarray, t: np.ndarray) -> np.ndarray:
    keep = probs > 0
    probs, freqs = probs[keep], freqs[keep]
    out = np.empty(t.size, dtype=complex)
    step = max(1, _CHUNK // max(1, probs.size))
    for i in range(0, t.size, step):
        # reduce the phase mod 1 before scaling by 2 pi to keep large-t accuracy
        cycles = np.outer(t[i : i + step], freqs)
        cycles -= np.round(cycles)
        out[i : i + step] = np.exp(2j * np.pi * cycles) @ probs
    return out


def complex_trace(dist: PhotonDistribution, fmap: FrequencyMap, grid: TimeGrid) -> ComplexTrace:
    """Z(t_j) = sum_n P_n exp(i 2 pi f(n) t_j) by direct summation."""
    values = _series(dist.probs, fmap.frequency(dist.n), grid.times)
    return ComplexTrace(grid, values)


def inversion_trace(dist: PhotonDistribution, fmap: FrequencyMap, grid: TimeGrid) -> InversionTrace:
    return complex_trace(dist, fmap, grid).real


def even_extend(trace: InversionTrace) -> InversionTrace:
    """Mirror a trace starting at t = 0 onto [-T, T] without duplicating t = 0."""
    if abs(trace.grid.t_start) > 1e-12 * max(1.0, trace.grid.dt):
        raise InvalidArgumentError(f"trace must start at t = 0, starts at {trace.grid.t_start}")
    v = trace.values
    values = np.concatenate([v[:0:-1], v])
    n = v.size - 1
    return InversionTrace(TimeGrid(-n * trace.grid.dt, trace.grid.dt, 2 * n + 1), values)


def smoothed_envelope(trace: InversionTrace, width: float) -> np.ndarray:
    """
    Revival envelope: modulus of the analytic signal of the even-extended
    trace, Gaussian-smoothed with standard deviation ``width`` (time units).
    Returned on the original (t >= 0) samples.
    """
    full = even_extend(trace)
    env = np.abs(hilbert(full.values))
    if width > 0:
        env = gaussian_filter1d(env, width / trace.grid.dt, mode="nearest")
    return env[trace.grid.count - 1 :]


def locate_revivals(trace: InversionTrace, period: float, m_values, width: float | None = None):
    """
    Times of the smoothed-envelope maxima nearest to m * period.

    Each revival is searched within +-period/3 of its nominal centre.
    """
    if width is None:
        width = period / 10
    env = smoothed_envelope(trace, width)
    t = trace.times
    peaks = []
    for m in m_values:
        sel = np.abs(t - m * period) <= period / 3
        if not sel.any():
            raise InvalidArgumentError(f"trace does not cover revival m={m}")
        idx = np.flatnonzero(sel)
        peaks.append(float(t[idx[np.argmax(env[idx])]]))
    return np.array(peaks)
