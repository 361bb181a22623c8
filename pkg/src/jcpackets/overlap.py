"""
Packet-zero recovery when revivals overlap.

Inside a hard window [-T, T] the observed spectrum is W~_0 plus the
window-convolved spectra of the neighbouring packets. Because
W~_{+m} + W~_{-m} = 2 cos(2 pi m (pi nu/g)^2) W~_0, this is a Fredholm
equation of the second kind for W~_0 alone:

    Wobs(nu) = W~_0(nu) + int S(nu, nu') W~_0(nu') dnu',
    S(nu, nu') = sum_{m=1}^{M} 2 cos(2 pi m (pi nu'/g)^2) sin(2 pi T (nu - nu')) / (pi (nu - nu')).

It is discretized with the rectangle rule on the FFT frequency grid and
solved densely.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from scipy.linalg import lapack

from .errors import InvalidArgumentError, SolverError
from .inversion import InversionTrace, even_extend
from .packets import DEFAULT_PAD, Spectrum, _window_samples, spectrum_of

BAND_FLOOR = 1e-6
MAX_GRID = 4096


def windowed_spectrum(trace: InversionTrace, T: float, zero_pad: int = DEFAULT_PAD) -> Spectrum:
    """
    Spectrum of the even-extended trace under the hard window [-T, T].

    Endpoint samples carry half weight (trapezoid rule), so the transform
    approximates the continuum window whose kernel is the sinc above. T is
    snapped to the nearest sample; the snapped value is recorded.
    """
    if not T > 0:
        raise InvalidArgumentError(f"window half-width must be positive, got {T}")
    dt = trace.grid.dt
    m = int(round(T / dt))
    if m < 1:
        raise InvalidArgumentError(f"window half-width {T} is below one sample ({dt})")
    if m * dt > trace.grid.t_end + 1e-9 * dt:
        raise InvalidArgumentError(f"window T={T} beyond trace end {trace.grid.t_end}")
    T_snap = m * dt
    part = _window_samples(even_extend(trace), -T_snap, T_snap)
    weighted = part.values.copy()
    weighted[0] *= 0.5
    weighted[-1] *= 0.5
    spec = spectrum_of(InversionTrace(part.grid, weighted), zero_pad)
    return Spectrum(spec.nu, spec.values, T_snap, spec.dt, spec.t0, "W", (-T_snap, T_snap))


def sinc_window_kernel(nu, nu_prime, T: float):
    """sin(2 pi T (nu - nu')) / (pi (nu - nu')), equal to 2T on the diagonal."""
    if T < 0:
        raise InvalidArgumentError("T must be >= 0")
    d = np.subtract(nu, nu_prime, dtype=float)
    small = np.abs(d) < 1e-12
    safe = np.where(small, 1.0, d)
    out = np.where(small, 2 * T, np.sin(2 * np.pi * T * safe) / (np.pi * safe))
    return float(out) if out.ndim == 0 else out


def neighbour_factor(nu, g: float, m_band: int = 1):
    """sum_{m=1}^{M} 2 cos(2 pi m (pi nu/g)^2): the +-m packets relative to W~_0."""
    if m_band not in (1, 2):
        raise InvalidArgumentError(f"m_band must be 1 or 2, got {m_band}")
    q = (np.pi * np.asarray(nu, dtype=float) / g) ** 2
    return sum(2 * np.cos(2 * np.pi * m * q) for m in range(1, m_band + 1))


@dataclass(frozen=True, eq=False)
class FredholmSystem:
    nu: np.ndarray
    observed: np.ndarray
    kernel: np.ndarray
    window_T: float
    g: float
    m_band: int
    source: Spectrum

    @property
    def dnu(self) -> float:
        return float(self.nu[1] - self.nu[0])

    @property
    def size(self) -> int:
        return self.nu.size

    def matrix(self) -> np.ndarray:
        return np.eye(self.size) + self.kernel

    def apply_forward(self, w0) -> np.ndarray:
        """(I + K) w0: the windowed spectrum predicted from a packet spectrum."""
        w0 = np.asarray(w0)
        return w0 + self.kernel @ w0


def _band_indices(spec: Spectrum, floor: float) -> np.ndarray:
    mag = np.abs(spec.values)
    above = mag > floor * mag.max()
    if not above.any():
        raise InvalidArgumentError("observed spectrum is identically zero")
    edge = np.abs(spec.nu[above]).max()
    # symmetric about 0; the unpaired -Nyquist bin is dropped
    edge = min(edge, spec.nu[-1])
    keep = np.abs(spec.nu) <= edge + 1e-12 * abs(spec.dnu)
    return np.flatnonzero(keep)


def build_fredholm_system(observed: Spectrum, g: float, m_band: int = 1, floor: float = BAND_FLOOR) -> FredholmSystem:
    """Assemble K_ij = S(nu_i, nu_j) dnu on the observed spectrum's support band."""
    if not g > 0:
        raise InvalidArgumentError("g must be positive")
    idx = _band_indices(observed, floor)
    if idx.size < 2:
        raise InvalidArgumentError("observed spectrum band is empty")
    if idx.size > MAX_GRID:
        raise InvalidArgumentError(
            f"band holds {idx.size} frequencies (> {MAX_GRID}); reduce zero padding or sampling rate"
        )
    nu = observed.nu[idx]
    dnu = observed.dnu
    weights = neighbour_factor(nu, g, m_band)
    kernel = sinc_window_kernel(nu[:, None], nu[None, :], observed.window_T) * weights[None, :] * dnu
    return FredholmSystem(nu, observed.values[idx], kernel, observed.window_T, g, m_band, observed)


@dataclass(frozen=True)
class SolverOptions:
    regularization: float = 0.0
    residual_tol: float = 1e-8
    hermitian_tol: float = 1e-6

    def __post_init__(self):
        if self.regularization < 0:
            raise InvalidArgumentError("regularization must be >= 0")


@dataclass(frozen=True)
class SolveReport:
    condition_estimate: float
    residual: float
    hermitian_error: float
    grid_size: int
    gT: float
    band: float
    regularization: float

    def to_dict(self) -> dict:
        return {
            "gT": self.gT,
            "band": self.band,
            "grid_size": self.grid_size,
            "condition_estimate": self.condition_estimate,
            "residual": self.residual,
            "hermitian_error": self.hermitian_error,
            "regularization": self.regularization,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _condition_1norm(a: np.ndarray) -> tuple[float, tuple]:
    anorm = np.abs(a).sum(0).max()
    lu, piv = la.lu_factor(a, check_finite=True)
    rcond, info = lapack.zgecon(lu, anorm, norm="1")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    return float(cond), (lu, piv)


def solve_w0(system: FredholmSystem, opts: SolverOptions = SolverOptions(), report: bool = False):
    """
    Solve (I + K) x = Wobs by LU factorization (ridge-regularized normal
    equations when ``opts.regularization`` > 0). Returns the W~_0 spectrum on
    the system's grid, plus a :class:`SolveReport` when ``report`` is set.
    """
    a = system.matrix().astype(complex)
    b = system.observed.astype(complex)
    cond, (lu, piv) = _condition_1norm(a)
    if not np.isfinite(cond) or cond > 1e14:
        raise SolverError(f"Fredholm matrix is singular (condition ~ {cond:.2e})", condition=cond)
    lam = opts.regularization
    if lam > 0:
        ah = a.conj().T
        x = la.solve(ah @ a + lam * np.eye(system.size), ah @ b, assume_a="pos")
    else:
        x = la.lu_solve((lu, piv), b)
    residual = float(np.linalg.norm(a @ x - b) / np.linalg.norm(b))
    if lam == 0 and residual >= opts.residual_tol:
        raise SolverError(f"relative residual {residual:.2e} above {opts.residual_tol:.0e}", cond, residual)
    herm = float(np.abs(x - np.conj(x[::-1])).max() / np.abs(x).max())
    if herm > opts.hermitian_tol:
        raise SolverError(f"solution violates Hermitian symmetry by {herm:.2e}", cond, residual)
    src = system.source
    spec = Spectrum(system.nu, x, system.window_T, src.dt, src.t0, "W", src.window)
    if not report:
        return spec
    rep = SolveReport(
        condition_estimate=cond,
        residual=residual,
        hermitian_error=herm,
        grid_size=system.size,
        gT=system.g * system.window_T,
        band=float(system.nu[-1]),
        regularization=lam,
    )
    return spec, rep
