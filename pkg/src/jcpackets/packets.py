"""
Packet decomposition of the inversion.

The complex inversion splits exactly into packets Z_m(t) whose spectra differ
only by a quadratic phase,

    Z~_m(nu) = Z~_0(nu) exp(-i 2 pi m (pi nu / g)^2),

so one measured packet generates all others. Spectra use the continuum
normalization Z~(nu) = int exp(-i 2 pi nu t) Z(t) dt, which puts the
positive-frequency tones of Z(t) at positive nu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AliasingError, InvalidArgumentError
from .inversion import ComplexTrace, FrequencyMap, InversionTrace, TimeGrid, even_extend
from .states import PhotonDistribution

DEFAULT_PAD = 8
_CHUNK = 1 << 22


@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    Samples of a continuum Fourier transform on a uniform ascending grid.

    ``dt`` and ``t0`` record the sampling of the source trace so the inverse
    transform can be evaluated exactly; ``source`` is ``"W"`` for spectra of
    real inversion traces and ``"Z"`` for complex traces.
    """

    nu: np.ndarray
    values: np.ndarray
    window_T: float
    dt: float
    t0: float = 0.0
    source: str = "W"
    window: tuple = field(default=None)

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if nu.ndim != 1 or nu.shape != values.shape or nu.size < 2:
            raise InvalidArgumentError("spectrum needs matching 1-d nu and values")
        steps = np.diff(nu)
        if np.abs(steps - steps[0]).max() > 1e-9 * abs(steps[0]) or steps[0] <= 0:
            raise InvalidArgumentError("spectrum frequency grid must be uniform and ascending")
        if self.source not in ("W", "Z"):
            raise InvalidArgumentError(f"unknown spectrum source {self.source!r}")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "values", values)

    @property
    def dnu(self) -> float:
        return float(self.nu[1] - self.nu[0])

    @property
    def period(self) -> float:
        """Time span after which the inverse transform repeats."""
        return 1.0 / self.dnu

    def replace(self, values) -> "Spectrum":
        return Spectrum(self.nu, values, self.window_T, self.dt, self.t0, self.source, self.window)

    def at(self, nu) -> np.ndarray:
        """Spectrum at arbitrary frequencies by 4-point Lagrange interpolation."""
        return lagrange_interpolate(self.nu, self.values, nu, points=4)


def lagrange_interpolate(grid: np.ndarray, values: np.ndarray, x, points: int = 4) -> np.ndarray:
    """Local ``points``-point Lagrange (barycentric) interpolation on a uniform grid."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = grid[1] - grid[0]
    pos = (x - grid[0]) / h
    start = np.floor(pos).astype(int) - (points // 2 - 1)
    start = np.clip(start, 0, grid.size - points)
    offsets = np.arange(points)
    idx = start[:, None] + offsets[None, :]
    s = pos[:, None] - idx  # distance to each node in units of h
    exact = np.isclose(s, 0.0, atol=1e-13)
    # barycentric weights for equispaced nodes: (-1)^j C(points-1, j)
    w = np.array([(-1) ** j * math.comb(points - 1, j) for j in range(points)], dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = w[None, :] / s
        out = (terms * values[idx]).sum(1) / terms.sum(1)
    hit = exact.any(1)
    if hit.any():
        out[hit] = values[idx[hit, exact[hit].argmax(1)]]
    return out


def spectrum_of(trace, zero_pad_factor: int = DEFAULT_PAD, window=None) -> Spectrum:
    """
    dt * sum_j exp(-i 2 pi nu t_j) x_j on the zero-padded FFT grid.

    The grid spans [-1/(2 dt), 1/(2 dt)) with spacing 1/(N pad dt).
    """
    if int(zero_pad_factor) != zero_pad_factor or zero_pad_factor < 1:
        raise InvalidArgumentError(f"zero_pad_factor must be a positive integer, got {zero_pad_factor}")
    if isinstance(trace, ComplexTrace):
        source = "Z"
    elif isinstance(trace, InversionTrace):
        source = "W"
    else:
        raise InvalidArgumentError("spectrum_of needs an InversionTrace or ComplexTrace")
    grid = trace.grid
    n_pad = grid.count * int(zero_pad_factor)
    nu = np.fft.fftshift(np.fft.fftfreq(n_pad, grid.dt))
    raw = np.fft.fftshift(np.fft.fft(trace.values, n_pad))
    values = grid.dt * raw * np.exp(-2j * np.pi * nu * grid.t_start)
    if window is None:
        window = (grid.t_start, grid.t_end)
    half = 0.5 * (window[1] - window[0])
    return Spectrum(nu, values, half, grid.dt, grid.t_start, source, tuple(window))


def _window_samples(trace, t_lo: float, t_hi: float):
    dt = trace.grid.dt
    i0 = int(math.ceil((t_lo - trace.grid.t_start) / dt - 1e-9))
    i1 = int(math.floor((t_hi - trace.grid.t_start) / dt + 1e-9))
    if i0 < 0 or i1 >= trace.grid.count:
        raise InvalidArgumentError(
            f"window [{t_lo}, {t_hi}] exceeds trace [{trace.grid.t_start}, {trace.grid.t_end}]"
        )
    if i1 - i0 < 1:
        raise InvalidArgumentError(f"window [{t_lo}, {t_hi}] holds fewer than two samples")
    grid = TimeGrid(trace.grid.t_start + i0 * dt, dt, i1 - i0 + 1)
    return type(trace)(grid, trace.values[i0 : i1 + 1])


def window_spectrum(trace, t_lo: float, t_hi: float, zero_pad_factor: int = DEFAULT_PAD) -> Spectrum:
    """Spectrum of the part of ``trace`` inside [t_lo, t_hi] (no mirroring)."""
    return spectrum_of(_window_samples(trace, t_lo, t_hi), zero_pad_factor)


def extract_packet_zero(
    trace: InversionTrace,
    window_half_width: float,
    *,
    window_end: float | None = None,
    zero_pad_factor: int = DEFAULT_PAD,
) -> Spectrum:
    """
    W~_0 from the collapse: even-extend a t >= 0 trace and transform the part
    inside [-window_half_width, window_end] (``window_end`` defaults to
    ``window_half_width``).

    An asymmetric window selects a shifted period cell of the characteristic
    function, e.g. collapse plus the intermediate revival of a cat state.
    """
    if not window_half_width > 0:
        raise InvalidArgumentError(f"window half-width must be positive, got {window_half_width}")
    if window_end is None:
        window_end = window_half_width
    if window_end > trace.grid.t_end + 1e-9 * trace.grid.dt or window_half_width > trace.grid.t_end + 1e-9 * trace.grid.dt:
        raise InvalidArgumentError(
            f"window reaches t={max(window_end, window_half_width)} beyond trace end {trace.grid.t_end}"
        )
    full = even_extend(trace)
    return window_spectrum(full, -window_half_width, window_end, zero_pad_factor)


def propagate_packet(base: Spectrum, m: int, g: float) -> Spectrum:
    """
    Multiply by exp(-i 2 pi m (pi nu/g)^2) at nu > 0 and by the conjugate
    phase at nu < 0, so real packets stay real.
    """
    phase = 2 * np.pi * m * (np.pi * base.nu / g) ** 2
    factor = np.exp(-1j * np.sign(base.nu) * phase)
    return base.replace(base.values * factor)


def _to_complex_values(spec: Spectrum) -> np.ndarray:
    if spec.source == "Z":
        return spec.values
    # Z~ = 2 W~ on nu > 0 and vanishes on nu < 0
    return np.where(spec.nu > 0, 2 * spec.values, np.where(spec.nu == 0, spec.values, 0))


def to_complex_spectrum(spec: Spectrum) -> Spectrum:
    """Z~ from W~ (analytic-signal spectrum of the same packet)."""
    return Spectrum(spec.nu, _to_complex_values(spec), spec.window_T, spec.dt, spec.t0, "Z", spec.window)


def packet_time_domain(spec: Spectrum, grid: TimeGrid) -> ComplexTrace:
    """
    Inverse transform dnu * sum_k S(nu_k) exp(i 2 pi nu_k t) on ``grid``.

    Exact (to rounding) on the source sampling; grids finer than the source
    are evaluated by direct summation, i.e. band-limited interpolation.
    """
    if grid.dt > spec.dt * (1 + 1e-9):
        raise AliasingError(f"grid dt={grid.dt} coarser than the spectrum's sampling dt={spec.dt}")
    if grid.t_end - grid.t_start >= spec.period:
        raise AliasingError(
            f"grid span {grid.t_end - grid.t_start:.4g} exceeds the spectrum's period {spec.period:.4g}"
        )
    offset = (grid.t_start - spec.t0) / spec.dt
    if abs(grid.dt - spec.dt) <= 1e-12 * spec.dt and abs(offset - round(offset)) < 1e-9:
        n_pad = spec.nu.size
        # undo the fftshift and the t0 phase, then a plain inverse FFT
        raw = np.fft.ifftshift(spec.values * np.exp(2j * np.pi * spec.nu * spec.t0)) / spec.dt
        x = np.fft.ifft(raw)
        idx = (int(round(offset)) + np.arange(grid.count)) % n_pad
        return ComplexTrace(grid, x[idx])
    t = grid.times
    out = np.empty(t.size, dtype=complex)
    step = max(1, _CHUNK // spec.nu.size)
    for i in range(0, t.size, step):
        out[i : i + step] = np.exp(2j * np.pi * np.outer(t[i : i + step], spec.nu)) @ spec.values
    return ComplexTrace(grid, out * spec.dnu)


def packet_center_time(m: int, n_tilde: float, g: float) -> float:
    """Centre t_m = 2 pi sqrt(n_tilde + 1) m / g of the m-th packet."""
    if n_tilde < 0:
        raise InvalidArgumentError(f"n_tilde must be >= 0, got {n_tilde}")
    return 2 * math.pi * math.sqrt(n_tilde + 1) * m / g


def dominant_photon_number(spec: Spectrum, fmap: FrequencyMap) -> float:
    """Photon number whose tone frequency carries the spectral maximum (nu > 0)."""
    pos = spec.nu > 0
    if not pos.any():
        raise InvalidArgumentError("spectrum has no positive frequencies")
    nu_peak = spec.nu[pos][np.argmax(np.abs(spec.values[pos]))]
    return max(0.0, float(fmap.photon_number(nu_peak)))


def estimate_n_tilde(trace: InversionTrace, fmap: FrequencyMap) -> float:
    """
    Dominant-frequency photon number of a whole trace.

    Traces starting at t = 0 are even-extended first; the one-sided
    transform's sinc sidelobes interfere and can shift the argmax by a tone.
    """
    if abs(trace.grid.t_start) <= 1e-12 * max(1.0, trace.grid.dt):
        trace = even_extend(trace)
    return dominant_photon_number(spectrum_of(trace, 4), fmap)


def auto_window(trace: InversionTrace, fmap: FrequencyMap, n_tilde: float | None = None) -> tuple[float, float]:
    """(n_tilde, T) with T = t_1/2, half the first packet's centre time."""
    if n_tilde is None:
        n_tilde = estimate_n_tilde(trace, fmap)
    return n_tilde, 0.5 * packet_center_time(1, n_tilde, fmap.g)


def default_m_range(t_end: float, n_tilde: float, g: float) -> range:
    """m = 0..ceil(g T / (2 pi sqrt(n_tilde + 1))) + 1 for the interval [0, T]."""
    tau = packet_center_time(1, n_tilde, g)
    return range(0, int(math.ceil(t_end / tau)) + 2)


@dataclass(frozen=True, eq=False)
class PacketSet:
    m_indices: list
    packets: list
    base_spectrum: Spectrum
    g: float
    n_tilde: float | None = None

    @property
    def grid(self) -> TimeGrid:
        return self.packets[0].grid

    def total(self) -> InversionTrace:
        return InversionTrace(self.grid, sum(p.values.real for p in self.packets))


def decompose(base: Spectrum, m_values, grid: TimeGrid, g: float, n_tilde: float | None = None) -> PacketSet:
    """Propagate ``base`` to every m and return the packets on ``grid``."""
    m_values = list(m_values)
    packets = [packet_time_domain(propagate_packet(base, m, g), grid) for m in m_values]
    return PacketSet(m_values, packets, base, g, n_tilde)


def sum_packets(base: Spectrum, m_range, grid: TimeGrid, g: float) -> InversionTrace:
    """Sum over m of Re Z_m(t): the inversion rebuilt from a single packet."""
    m_values = list(m_range)
    if 0 not in m_values:
        raise InvalidArgumentError("m range must contain 0")
    return decompose(base, m_values, grid, g).total()


def ideal_packet_spectrum(
    dist: PhotonDistribution,
    fmap: FrequencyMap,
    nu,
    *,
    source: str = "W",
    cell_start: float = -0.5,
) -> np.ndarray:
    """
    Exact packet-zero spectrum of a known distribution.

    Z~_0(nu) = D(x) / f'(x) at the root x of f(x) = nu, where
    D(x) = integral over one period [c, c+1) of chi(k) exp(-i 2 pi k x) dk
         = sum_n P_n exp(-i 2 pi (c + 1/2)(x - n)) sinc(x - n).
    Returns W~_0 (Hermitian part) for ``source="W"``.
    """
    nu = np.asarray(nu, dtype=float)

    def z0(freq):
        x = fmap.photon_number(freq)
        ok = np.isfinite(x)
        out = np.zeros(freq.shape, dtype=complex)
        xs = x[ok]
        d = np.zeros(xs.shape, dtype=complex)
        shift = cell_start + 0.5
        for n, p in zip(dist.n, dist.probs):
            if p == 0:
                continue
            d += p * np.sinc(xs - n) * np.exp(-2j * np.pi * shift * (xs - n))
        out[ok] = d / fmap.derivative(xs)
        return out

    zp = z0(nu)
    if source == "Z":
        return zp
    return 0.5 * (zp + np.conj(z0(-nu)))
