"""
Photon-number retrieval from a single packet spectrum.

At the tone frequencies nu_n = f(n) the quadratic phase of every packet is a
whole number of turns, so for the Jaynes-Cummings map

    P_n = (g^2 / pi^2) W~_m(nu_n) / nu_n = (g^2 / 2 pi^2) Z~_m(nu_n) / nu_n

for any m. In general the prefactor is the Jacobian f'(n) (doubled for W~).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CoverageError, InvalidArgumentError
from .inversion import FrequencyMap, InversionTrace, inversion_trace
from .packets import Spectrum, lagrange_interpolate
from .states import PhotonDistribution, custom_distribution

IMAG_TOL = 0.05
INTERP_TOL = 1e-3
SUM_RULE = (0.97, 1.03)
GUARD = 0.1


def nu_n(fmap: FrequencyMap, n) -> np.ndarray | float:
    """Tone frequency of the n-photon component (g sqrt(n+1)/pi for the JCM)."""
    n_arr = np.asarray(n)
    if np.any(n_arr < 0):
        raise InvalidArgumentError("photon numbers must be >= 0")
    out = fmap.frequency(n_arr)
    return float(out) if np.ndim(n) == 0 else out


def default_retrieval_n_max(spec: Spectrum, fmap: FrequencyMap, guard: float = GUARD) -> int:
    """Largest n with nu_n inside the band less a ``guard`` fraction."""
    nu_top = (1 - guard) * spec.nu[-1]
    x = float(fmap.photon_number(nu_top))
    if not np.isfinite(x) or x < 0:
        raise CoverageError("spectrum band does not reach the n = 0 tone")
    return int(math.floor(x))


@dataclass(frozen=True, eq=False)
class RetrievalResult:
    probs_raw: np.ndarray
    probs_clean: PhotonDistribution
    residual_negativity: float
    nu_samples: np.ndarray
    g: float
    imag_residue: np.ndarray
    interp_residual: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_max(self) -> int:
        return self.probs_raw.size - 1

    @property
    def clean(self) -> bool:
        return bool(self.diagnostics.get("clean", False))

    def to_dict(self) -> dict:
        return {
            "g": self.g,
            "n_max": self.n_max,
            "probs_raw": [float(x) for x in self.probs_raw],
            "probs_clean": [float(x) for x in self.probs_clean.probs],
            "residual_negativity": float(self.residual_negativity),
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _prefactor(spec: Spectrum, fmap: FrequencyMap, n: np.ndarray, nus: np.ndarray) -> np.ndarray:
    jac = fmap.derivative(n)
    if spec.source == "Z":
        return jac
    # W~ = Z~/2 away from nu = 0
    return np.where(nus > 0, 2 * jac, jac)


def retrieval_curve(spec: Spectrum, fmap: FrequencyMap, n_values) -> np.ndarray:
    """Right-hand side of the retrieval formula at continuous photon numbers."""
    n_values = np.asarray(n_values, dtype=float)
    nus = fmap.frequency(n_values)
    return (_prefactor(spec, fmap, n_values, nus) * lagrange_interpolate(spec.nu, spec.values, nus)).real


def retrieve_distribution(spec: Spectrum, fmap: FrequencyMap, n_max: int | None = None) -> RetrievalResult:
    """
    Evaluate the retrieval formula at n = 0..n_max.

    The real part of the interpolated spectrum gives P_n; the imaginary part
    and the 4- vs 6-point interpolation gap are kept as error meters.
    """
    if n_max is None:
        n_max = default_retrieval_n_max(spec, fmap)
    if n_max < 0:
        raise InvalidArgumentError("n_max must be >= 0")
    n = np.arange(n_max + 1)
    nus = fmap.frequency(n)
    lo, hi = spec.nu[1], spec.nu[-2]
    if nus.min() < lo or nus.max() > hi:
        raise CoverageError(
            f"tone frequencies [{nus.min():.4g}, {nus.max():.4g}] outside spectral band [{lo:.4g}, {hi:.4g}]"
        )
    pref = _prefactor(spec, fmap, n, nus)
    v4 = lagrange_interpolate(spec.nu, spec.values, nus, points=4)
    v6 = lagrange_interpolate(spec.nu, spec.values, nus, points=6)
    raw = (pref * v4).real
    imag = (pref * v4).imag
    interp_residual = float(np.abs(pref * (v4 - v6)).max())

    clipped = np.clip(raw, 0.0, None)
    if clipped.sum() <= 0:
        raise InvalidArgumentError("retrieved distribution has no positive mass")
    clean_dist = custom_distribution(clipped)
    peak = float(np.abs(raw).max())
    imag_ratio = float(np.abs(imag).max() / peak) if peak > 0 else math.inf
    total = float(raw.sum())
    negativity = float(min(raw.min(), 0.0))
    warnings = []
    if imag_ratio >= IMAG_TOL:
        warnings.append(f"imaginary residue {imag_ratio:.3f} of peak")
    if interp_residual > INTERP_TOL:
        warnings.append(f"interpolation residual {interp_residual:.2e}")
    if not (SUM_RULE[0] <= total <= SUM_RULE[1]):
        warnings.append(f"raw probabilities sum to {total:.4f}")
    if negativity < -0.01:
        warnings.append(f"negative raw probability {negativity:.4f}")
    diagnostics = {
        "imag_ratio": imag_ratio,
        "interp_residual": interp_residual,
        "sum_raw": total,
        "clean": imag_ratio < IMAG_TOL and interp_residual <= INTERP_TOL,
        "warnings": warnings,
        "window_T": spec.window_T,
    }
    return RetrievalResult(raw, clean_dist, negativity, nus, fmap.g, imag, interp_residual, diagnostics)


@dataclass(frozen=True)
class ValidationReport:
    linf: float
    l2: float
    threshold: float

    @property
    def flagged(self) -> bool:
        """True when the re-simulated trace misses structure in the data."""
        return self.linf > self.threshold

    def to_dict(self) -> dict:
        return {"linf": self.linf, "l2": self.l2, "threshold": self.threshold, "flagged": self.flagged}


def validate_retrieval(
    result: RetrievalResult, trace: InversionTrace, fmap: FrequencyMap, threshold: float = 0.05
) -> ValidationReport:
    """Re-simulate W(t) from the cleaned distribution and compare with ``trace``."""
    model = inversion_trace(result.probs_clean, fmap, trace.grid)
    diff = model.values - trace.values
    return ValidationReport(float(np.abs(diff).max()), float(np.sqrt(np.mean(diff**2))), threshold)
