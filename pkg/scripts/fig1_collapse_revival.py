"""Collapse and revivals of the inversion for a coherent field (JCM map)."""

from dataclasses import dataclass

import numpy as np

from _common import out_dir, parse_into
from jcpackets.cli import write_csv
from jcpackets.inversion import FrequencyMap, TimeGrid, auto_dt, inversion_trace, locate_revivals
from jcpackets.packets import estimate_n_tilde, packet_center_time
from jcpackets.states import coherent_distribution


@dataclass
class Params:
    n_bar: float = 20.0
    g: float = 1.0
    t_end: float = 140.0


def main():
    p, out = parse_into(Params, __doc__)
    out = out_dir(out, "fig1")
    fmap = FrequencyMap("jcm", p.g)
    dist = coherent_distribution(p.n_bar)
    trace = inversion_trace(dist, fmap, TimeGrid.span(p.t_end, auto_dt(fmap, dist.n_max)))
    tau = packet_center_time(1, p.n_bar, p.g)
    write_csv(out / "trace.csv", "gt,W,t_over_tau", [p.g * trace.times, trace.values, trace.times / tau])
    m = np.arange(1, int(trace.grid.t_end / tau - 1 / 3) + 1)
    peaks = locate_revivals(trace, tau, m)
    write_csv(out / "revivals.csv", "m,t_formula,t_peak", [m, m * tau, peaks])
    n_hat = estimate_n_tilde(trace, fmap)
    print(f"tau formula {tau:.4f}, first peak {peaks[0]:.4f}, dominant n {n_hat:.3f}")
    print("peak offsets:", np.round(peaks - m * tau, 3))


if __name__ == "__main__":
    main()
