"""Inversion under the linear frequency map: exactly periodic with period pi/g."""

import math
from dataclasses import dataclass

import numpy as np

from _common import out_dir, parse_into
from jcpackets.cli import write_csv
from jcpackets.inversion import FrequencyMap, TimeGrid, inversion_trace
from jcpackets.states import coherent_distribution


@dataclass
class Params:
    n_bar: float = 20.0
    g: float = 1.0
    periods: int = 4
    samples_per_period: int = 512


def main():
    p, out = parse_into(Params, __doc__)
    out = out_dir(out, "fig2")
    fmap = FrequencyMap("linear", p.g)
    period = math.pi / p.g
    grid = TimeGrid(0.0, period / p.samples_per_period, p.periods * p.samples_per_period + 1)
    trace = inversion_trace(coherent_distribution(p.n_bar), fmap, grid)
    write_csv(out / "trace.csv", "gt,W", [p.g * trace.times, trace.values])
    s = p.samples_per_period
    print(f"max |W(t) - W(t + pi/g)| = {np.abs(trace.values[:-s] - trace.values[s:]).max():.2e}")


if __name__ == "__main__":
    main()
