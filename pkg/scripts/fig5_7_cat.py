"""
Cat state: inversion, packets holding two revivals each, and retrieval from
three windows (collapse only, collapse plus intermediate revival, and the
intermediate revival alone).
"""

import math
from dataclasses import dataclass

import numpy as np

from _common import out_dir, parse_into
from jcpackets.cli import write_csv
from jcpackets.inversion import FrequencyMap, TimeGrid, auto_dt, even_extend, inversion_trace
from jcpackets.packets import decompose, extract_packet_zero, packet_center_time, window_spectrum
from jcpackets.retrieval import retrieve_distribution, validate_retrieval
from jcpackets.states import CatParams, cat_distribution


@dataclass
class Params:
    alpha2: float = 20.0
    phi: float = math.pi
    g: float = 1.0
    t_end: float = 140.0
    n_max: int = 45


def main():
    p, out = parse_into(Params, __doc__)
    out = out_dir(out, "fig5_7")
    fmap = FrequencyMap("jcm", p.g)
    cat = cat_distribution(CatParams(math.sqrt(p.alpha2), p.phi))
    trace = inversion_trace(cat, fmap, TimeGrid.span(p.t_end, auto_dt(fmap, cat.n_max)))
    tau = packet_center_time(1, p.alpha2, p.g)
    q = tau / 4
    write_csv(out / "trace.csv", "gt,W", [p.g * trace.times, trace.values])

    spectra = {
        "collapse": extract_packet_zero(trace, q),
        "collapse_intermediate": extract_packet_zero(trace, q, window_end=3 * q, zero_pad_factor=16),
        "intermediate": window_spectrum(even_extend(trace), q, 3 * q),
    }
    results = {k: retrieve_distribution(s, fmap, p.n_max) for k, s in spectra.items()}
    n = np.arange(p.n_max + 1)
    write_csv(out / "retrieval.csv", "n,P_true," + ",".join(f"P_{k}" for k in results),
              [n, cat.padded(p.n_max)] + [r.probs_raw for r in results.values()])
    for k, r in results.items():
        check = validate_retrieval(r, trace, fmap)
        print(f"{k:22s} min raw {r.residual_negativity:+.3f}  odd max {r.probs_raw[1::2].max():.2e}  "
              f"round-trip Linf {check.linf:.3f} flagged={check.flagged}")

    packets = decompose(spectra["collapse_intermediate"], range(4), trace.grid, p.g)
    write_csv(out / "packets.csv", "gt," + ",".join(f"W_{m}" for m in packets.m_indices) + ",W_sum,W_direct",
              [p.g * trace.times] + [z.values.real for z in packets.packets]
              + [packets.total().values, trace.values])


if __name__ == "__main__":
    main()
