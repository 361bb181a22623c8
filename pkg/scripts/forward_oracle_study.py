"""
Where the forward model (I + K) W0 misses the observed windowed spectrum.

Compares the kernel prediction with the windowed spectrum for a weak
coherent field, across neighbour bands and sampling, then splits the
mismatch in the time domain: the part of W0 outside the window, and the
packets |m| >= 2 inside it, both of which the one-band model drops.
"""

from dataclasses import dataclass

import numpy as np

from _common import out_dir, parse_into
from jcpackets.cli import write_csv
from jcpackets.inversion import FrequencyMap, TimeGrid, aligned_dt, auto_dt, inversion_trace
from jcpackets.overlap import build_fredholm_system, windowed_spectrum
from jcpackets.packets import Spectrum, ideal_packet_spectrum, packet_time_domain, propagate_packet
from jcpackets.states import coherent_distribution


@dataclass
class Params:
    n_bar: float = 1.0
    window: float = 5.0


def forward_error(dist, fmap, T, oversample, pad, band):
    dt = aligned_dt(auto_dt(fmap, dist.n_max, oversample), T)
    trace = inversion_trace(dist, fmap, TimeGrid.span(T, dt))
    system = build_fredholm_system(windowed_spectrum(trace, T, pad), fmap.g, band)
    pred = system.apply_forward(ideal_packet_spectrum(dist, fmap, system.nu))
    return np.linalg.norm(pred - system.observed) / np.linalg.norm(system.observed)


def time_domain_split(dist, fmap, T):
    # W0 and its neighbours on a long fine grid from the analytic spectrum
    dt = 0.02
    n = 2 ** 16
    nu = np.fft.fftshift(np.fft.fftfreq(n, dt))
    base = Spectrum(nu, ideal_packet_spectrum(dist, fmap, nu), np.inf, dt)
    grid = TimeGrid.symmetric(3 * T, dt)
    t = grid.times
    inside = np.abs(t) <= T
    w = {m: packet_time_domain(propagate_packet(base, m, fmap.g), grid).values.real for m in range(-3, 4)}
    direct = inversion_trace(dist, fmap, grid).values
    norm = np.sqrt(np.sum(direct[inside] ** 2))
    return {
        "sum_check": np.abs(sum(w.values()) - direct)[inside].max(),
        "w0_outside": np.sqrt(np.sum(w[0][~inside] ** 2)) / norm,
        "w_pm2_inside": np.sqrt(np.sum((w[2] + w[-2])[inside] ** 2)) / norm,
        "w_pm3_inside": np.sqrt(np.sum((w[3] + w[-3])[inside] ** 2)) / norm,
    }


def main():
    p, out = parse_into(Params, __doc__)
    out = out_dir(out, "forward_oracle")
    fmap = FrequencyMap("jcm", 1.0)
    dist = coherent_distribution(p.n_bar)
    rows = []
    for band in (1, 2):
        for oversample, pad in ((8, 8), (16, 8), (8, 16)):
            err = forward_error(dist, fmap, p.window, oversample, pad, band)
            rows.append((band, oversample, pad, err))
            print(f"band +-{band} oversample {oversample:2d} pad {pad:2d}: relative L2 {err:.4f}")
    write_csv(out / "forward_error.csv", "band,oversample,pad,rel_l2", list(zip(*rows)))
    split = time_domain_split(dist, fmap, p.window)
    for k, v in split.items():
        print(f"{k:14s} {v:.4f}")


if __name__ == "__main__":
    main()
