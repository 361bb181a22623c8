"""
Photon-number distributions of the field mode.

Every constructor returns a :class:`PhotonDistribution`, a truncated and
normalized probability vector over n = 0..n_max. Truncation defaults to the
smallest n_max whose discarded tail carries less than ``TAIL_MASS`` of
probability.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import InvalidArgumentError, TruncationError

TAIL_MASS = 1e-12
NORM_TOL = 1e-9
NEGATIVE_CLAMP = 1e-12


@dataclass(frozen=True, eq=False)
class PhotonDistribution:
    """Probabilities ``probs[n]`` of finding n photons, n = 0..n_max."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvalidArgumentError("probs must be a non-empty 1-d vector")
        if not np.all(np.isfinite(p)):
            raise InvalidArgumentError("probs must be finite")
        if p.min() < 0:
            raise InvalidArgumentError(f"negative probability {p.min():.3e}")
        total = p.sum()
        if abs(total - 1.0) > NORM_TOL:
            raise InvalidArgumentError(f"probabilities sum to {total!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def n_max(self) -> int:
        return self.probs.size - 1

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.probs.size)

    def mean(self) -> float:
        return float(self.n @ self.probs)

    def padded(self, n_max: int) -> np.ndarray:
        """Probability vector zero-padded or cut to length n_max + 1."""
        if n_max <= self.n_max:
            return self.probs[: n_max + 1].copy()
        out = np.zeros(n_max + 1)
        out[: self.probs.size] = self.probs
        return out

    def to_dict(self) -> dict:
        return {"n_max": self.n_max, "probs": [float(x) for x in self.probs]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "PhotonDistribution":
        try:
            probs = data["probs"]
        except (KeyError, TypeError):
            raise InvalidArgumentError("distribution JSON needs a 'probs' list") from None
        dist = custom_distribution(probs)
        if "n_max" in data and int(data["n_max"]) != dist.n_max:
            raise InvalidArgumentError(
                f"n_max={data['n_max']} disagrees with {len(probs)} probabilities"
            )
        return dist

    @classmethod
    def from_json(cls, text: str) -> "PhotonDistribution":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class CatParams:
    """Cat state |alpha> + |alpha e^{i phi}>, alpha real."""

    alpha: float
    phi: float = math.pi

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise InvalidArgumentError(f"alpha must be >= 0, got {self.alpha}")
        if not (0.0 <= self.phi < 2 * math.pi):
            raise InvalidArgumentError(f"phi must lie in [0, 2pi), got {self.phi}")


def _check_mean(n_bar):
    if n_bar is None or not math.isfinite(n_bar) or n_bar < 0:
        raise InvalidArgumentError(f"mean photon number must be finite and >= 0, got {n_bar}")


def _renormalized(raw: np.ndarray) -> PhotonDistribution:
    total = raw.sum()
    # leave already-normalized input bit-identical (JSON round trips)
    if abs(total - 1.0) <= 4 * np.finfo(float).eps:
        return PhotonDistribution(raw)
    return PhotonDistribution(raw / total)


def poisson_log_pmf(n: np.ndarray, n_bar: float) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if n_bar == 0:
        return np.where(n == 0, 0.0, -np.inf)
    return n * math.log(n_bar) - n_bar - gammaln(n + 1)


def poisson_tail(n_max: int, n_bar: float) -> float:
    """Probability that a Poisson(n_bar) count exceeds n_max."""
    if n_bar == 0:
        return 0.0
    return float(gammainc(n_max + 1, n_bar))


def poisson_n_max(n_bar: float, tail: float = TAIL_MASS) -> int:
    """Smallest n_max with Poisson tail mass below ``tail``."""
    _check_mean(n_bar)
    n = int(n_bar)
    while poisson_tail(n, n_bar) >= tail:
        n += 1
    return n


def thermal_n_max(n_bar: float, tail: float = TAIL_MASS) -> int:
    _check_mean(n_bar)
    if n_bar == 0:
        return 0
    ratio = n_bar / (1 + n_bar)
    # tail beyond n_max is ratio**(n_max + 1)
    return max(0, math.ceil(math.log(tail) / math.log(ratio)))


def fock_distribution(n: int) -> PhotonDistribution:
    if int(n) != n or n < 0:
        raise InvalidArgumentError(f"Fock photon number must be a non-negative integer, got {n}")
    probs = np.zeros(int(n) + 1)
    probs[-1] = 1.0
    return PhotonDistribution(probs)


def coherent_distribution(n_bar: float, n_max: int | None = None) -> PhotonDistribution:
    """Poisson photon statistics of a coherent state with mean ``n_bar``."""
    _check_mean(n_bar)
    if n_max is None:
        n_max = poisson_n_max(n_bar)
    elif poisson_tail(n_max, n_bar) >= TAIL_MASS:
        raise TruncationError(
            f"n_max={n_max} leaves Poisson tail {poisson_tail(n_max, n_bar):.2e} "
            f">= {TAIL_MASS:g}; use n_max >= {poisson_n_max(n_bar)}"
        )
    return _renormalized(np.exp(poisson_log_pmf(np.arange(n_max + 1), n_bar)))


def thermal_distribution(n_bar: float, n_max: int | None = None) -> PhotonDistribution:
    """Bose-Einstein photon statistics with mean ``n_bar``."""
    _check_mean(n_bar)
    needed = thermal_n_max(n_bar)
    if n_max is None:
        n_max = needed
    elif n_max < needed:
        raise TruncationError(f"n_max={n_max} too small for thermal n_bar={n_bar}; need {needed}")
    n = np.arange(n_max + 1)
    if n_bar == 0:
        raw = (n == 0).astype(float)
    else:
        raw = np.exp(n * math.log(n_bar) - (n + 1) * math.log1p(n_bar))
    return _renormalized(raw)


def cat_distribution(
    params: CatParams, n_max: int | None = None, mode: str = "exact"
) -> PhotonDistribution:
    """
    Photon statistics of the cat state |alpha> + |alpha e^{i phi}>.

    ``mode="large-alpha"`` uses c_n^2 (1 + cos(n phi)) with unit prefactor,
    the large-amplitude form; ``mode="exact"`` divides by the properly
    normalized overlap 1 + Re<alpha|alpha e^{i phi}>. Both are renormalized
    over the truncation, which only removes the < 1e-12 tail.
    """
    if mode not in ("exact", "large-alpha"):
        raise InvalidArgumentError(f"unknown cat mode {mode!r}")
    a2 = params.alpha**2
    if n_max is None:
        n_max = poisson_n_max(a2)
    elif poisson_tail(n_max, a2) >= TAIL_MASS:
        raise TruncationError(f"n_max={n_max} too small for alpha^2={a2}")
    n = np.arange(n_max + 1)
    raw = np.exp(poisson_log_pmf(n, a2)) * (1 + np.cos(n * params.phi))
    if mode == "exact":
        phi = params.phi
        overlap = math.exp(-a2 * (1 - math.cos(phi))) * math.cos(a2 * math.sin(phi))
        if 1 + overlap <= 0:
            raise InvalidArgumentError("cat state has zero norm")
        raw = raw / (1 + overlap)
        if abs(raw.sum() - 1) > NORM_TOL:
            raise TruncationError(f"exact cat mass {raw.sum()!r} deviates from 1")
    if raw.sum() <= 0:
        raise InvalidArgumentError("cat state has zero norm")
    return _renormalized(raw)


def custom_distribution(raw: Sequence[float]) -> PhotonDistribution:
    """Clamp tiny negatives (>= -1e-12) to zero and renormalize."""
    p = np.asarray(raw, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InvalidArgumentError("distribution must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(p)):
        raise InvalidArgumentError("distribution contains non-finite entries")
    if p.min() < -NEGATIVE_CLAMP:
        raise InvalidArgumentError(
            f"entry {p.min():.3e} at n={int(p.argmin())} is negative beyond clamp tolerance"
        )
    p = np.clip(p, 0.0, None)
    if p.sum() <= 0:
        raise InvalidArgumentError("distribution has zero total mass")
    return _renormalized(p)
