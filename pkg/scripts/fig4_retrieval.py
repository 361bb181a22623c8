"""Photon-number retrieval from the m = 0 and m = 1 packets of a coherent trace."""

from dataclasses import dataclass

import numpy as np

from _common import out_dir, parse_into
from jcpackets.cli import write_csv
from jcpackets.inversion import FrequencyMap, TimeGrid, auto_dt, inversion_trace
from jcpackets.packets import auto_window, extract_packet_zero, propagate_packet
from jcpackets.retrieval import retrieval_curve, retrieve_distribution
from jcpackets.states import coherent_distribution


@dataclass
class Params:
    n_bar: float = 20.0
    g: float = 1.0
    n_max: int = 45


def main():
    p, out = parse_into(Params, __doc__)
    out = out_dir(out, "fig4")
    fmap = FrequencyMap("jcm", p.g)
    dist = coherent_distribution(p.n_bar)
    trace = inversion_trace(dist, fmap, TimeGrid.span(60.0, auto_dt(fmap, dist.n_max)))
    _, T = auto_window(trace, fmap)
    base = extract_packet_zero(trace, T)
    first = propagate_packet(base, 1, p.g)
    n_fine = np.linspace(0, p.n_max, 40 * p.n_max + 1)
    write_csv(out / "curves.csv", "n,P_m0,P_m1",
              [n_fine, retrieval_curve(base, fmap, n_fine), retrieval_curve(first, fmap, n_fine)])
    r0 = retrieve_distribution(base, fmap, p.n_max)
    r1 = retrieve_distribution(first, fmap, p.n_max)
    truth = dist.padded(p.n_max)
    write_csv(out / "points.csv", "n,P_true,P_m0,P_m1", [np.arange(p.n_max + 1), truth, r0.probs_raw, r1.probs_raw])
    print(f"max error m=0 {np.abs(r0.probs_raw - truth).max():.2e}, m=1 {np.abs(r1.probs_raw - truth).max():.2e}")


if __name__ == "__main__":
    main()
