"""
Characteristic function chi(k) = sum_n P_n exp(i 2 pi k n) of a photon-number
distribution, its inverse over one period, and quadrature evaluation of the
propagator that maps chi(k) onto the complex inversion Z(t).

The quadrature routines are slow reference oracles; the FFT pipeline in
:mod:`jcpackets.packets` never calls them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import AccuracyNotReachedError, AliasingError, InconsistentInputError, InvalidArgumentError
from .inversion import FrequencyMap
from .states import PhotonDistribution, custom_distribution

IMAG_RESIDUE_TOL = 1e-9
QUAD_TARGET = 1e-6


@dataclass(frozen=True)
class KGrid:
    """``count`` uniform samples k_j = -1/2 + j/count covering [-1/2, 1/2)."""

    count: int

    def __post_init__(self):
        if self.count < 2:
            raise InvalidArgumentError("k grid needs at least 2 samples")

    @property
    def k(self) -> np.ndarray:
        return -0.5 + np.arange(self.count) / self.count

    @classmethod
    def for_distribution(cls, dist: PhotonDistribution, oversample: int = 16) -> "KGrid":
        return cls(max(2, oversample * (dist.n_max + 1)))


def chi_eval(dist: PhotonDistribution, k):
    """Direct sum of P_n exp(i 2 pi k n); scalar in, scalar out."""
    k_arr = np.asarray(k, dtype=float)
    n = dist.n
    # reduce kn mod 1 so chi(k + 1) == chi(k) holds to rounding
    cycles = np.multiply.outer(k_arr, n)
    cycles -= np.round(cycles)
    out = np.exp(2j * np.pi * cycles) @ dist.probs
    return complex(out) if np.ndim(k) == 0 else out


def chi_invert(chi_samples, n_max: int | None = None) -> PhotonDistribution:
    """
    Recover P_n from chi sampled on :class:`KGrid` (k_j = -1/2 + j/N).

    The integral over one period becomes an exact discrete transform for
    distributions supported on n < N/2.
    """
    chi = np.asarray(chi_samples, dtype=complex)
    count = chi.size
    if count < 2:
        raise AliasingError("need at least 2 characteristic-function samples")
    limit = count // 2 - 1
    if n_max is None:
        n_max = limit
    if n_max > limit:
        raise AliasingError(f"{count} samples resolve n <= {limit}, requested n_max={n_max}")
    coeffs = np.fft.fft(chi) / count
    # shift from k_0 = -1/2 contributes exp(i pi n) = (-1)^n
    n = np.arange(count)
    coeffs = coeffs * np.where(n % 2 == 0, 1.0, -1.0)
    # any mass at n in (limit, count) would alias onto negative photon numbers
    leaked = np.abs(coeffs[n_max + 1 :]).max(initial=0.0)
    if leaked > 1e-9:
        raise AliasingError(f"coefficient {leaked:.2e} beyond n_max={n_max}: grid too coarse")
    p = coeffs[: n_max + 1]
    if np.abs(p.imag).max() > IMAG_RESIDUE_TOL:
        raise InconsistentInputError(
            f"imaginary residue {np.abs(p.imag).max():.2e} in recovered probabilities"
        )
    return custom_distribution(p.real)


def coherent_chi(n_bar: float, k):
    """Closed form exp(n_bar (exp(i 2 pi k) - 1)) for Poisson statistics."""
    return np.exp(n_bar * (np.exp(2j * np.pi * np.asarray(k, dtype=float)) - 1))


def cat_chi_decomposition(alpha: float, phi: float, k):
    """
    chi_a(k) + chi_a(k - phi/2pi)/2 + chi_a(k + phi/2pi)/2 for the unnormalized
    large-amplitude cat; divide by 1 + Re chi_a(phi/2pi) to normalize.
    """
    a2 = alpha**2
    s = phi / (2 * np.pi)
    return coherent_chi(a2, k) + 0.5 * coherent_chi(a2, np.asarray(k) - s) + 0.5 * coherent_chi(a2, np.asarray(k) + s)


def _phase_integrand(fmap: FrequencyMap, k: float, t: float):
    if fmap.kind == "jcm":
        # x = u^2 - 1 removes the sqrt endpoint singularity: dx = 2u du
        c = fmap.g * t / np.pi

        def phase(u):
            return 2 * np.pi * (c * u - k * (u * u - 1))

        return phase, (lambda u: 2 * u), (lambda x: math.sqrt(x + 1))
    c = fmap.g * t / np.pi

    def phase(x):
        return 2 * np.pi * (c - k) * x

    return phase, (lambda x: 1.0), (lambda x: x)


def propagator_quadrature(
    fmap: FrequencyMap, k: float, t: float, x_max: float, target: float = QUAD_TARGET
) -> complex:
    """
    Truncated propagator: integral of exp(i 2 pi [f(x) t - k x]) over [-1, x_max]
    by adaptive quadrature.

    The untruncated object is a distribution, so only integrated uses of the
    result are meaningful.
    """
    if x_max <= -1:
        raise InvalidArgumentError("x_max must exceed -1")
    phase, jac, to_var = _phase_integrand(fmap, k, t)
    lo, hi = to_var(-1.0), to_var(x_max)
    # roughly one subinterval per radian of accumulated phase keeps quad happy
    limit = int(200 + abs(phase(hi) - phase(lo)))
    total = 0j
    err_total = 0.0
    for part, fn in (("re", np.cos), ("im", np.sin)):
        with warnings.catch_warnings():
            # failure to converge is reported through the returned error bound
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(
                lambda v: jac(v) * fn(phase(v)), lo, hi, limit=limit, epsabs=target / 4, epsrel=0
            )
        total += val if part == "re" else 1j * val
        err_total += err
    if not err_total <= target:
        raise AccuracyNotReachedError(
            f"propagator quadrature error {err_total:.2e} above target {target:.0e}",
            estimate=total,
            error=err_total,
        )
    return total


def _gauss_panels(a: float, b: float, panels: int, order: int = 16):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


def packet_zero_quadrature(
    dist: PhotonDistribution,
    fmap: FrequencyMap,
    t,
    x_max: float | None = None,
    panels: int | None = None,
    tol: float = 1e-6,
):
    """
    Reference Z_0(t): double quadrature over k in [-1/2, 1/2) and x in
    [-1, x_max] of chi(k) exp(i 2 pi [f(x) t - k x]).

    Composite Gauss-Legendre in both variables; the panel count is doubled
    until successive estimates agree within ``tol``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if x_max is None:
        x_max = 4.0 * max(dist.n_max, 1)
    if x_max < 4 * dist.n_max:
        raise InvalidArgumentError(f"x_max={x_max} must be >= 4 n_max = {4 * dist.n_max}")
    if panels is None:
        panels = int(8 + x_max / 2)

    def estimate(npanel):
        k, wk = _gauss_panels(-0.5, 0.5, npanel)
        chi_w = chi_eval(dist, k) * wk
        if fmap.kind == "jcm":
            u, wu = _gauss_panels(0.0, math.sqrt(x_max + 1), npanel)
            x, wx = u * u - 1, wu * 2 * u
        else:
            x, wx = _gauss_panels(-1.0, x_max, npanel)
        # inner integral over k first: chi smeared back onto the x axis
        kernel = np.exp(-2j * np.pi * np.outer(x, k))
        density = kernel @ chi_w
        phases = np.exp(2j * np.pi * np.outer(t, fmap.frequency(x)))
        return phases @ (wx * density)

    current = estimate(panels)
    for _ in range(3):
        refined = estimate(2 * panels)
        err = np.abs(refined - current).max()
        if err <= tol:
            return refined
        current, panels = refined, 2 * panels
    raise AccuracyNotReachedError(
        f"double quadrature changed by {err:.2e} on refinement", estimate=current, error=err
    )
