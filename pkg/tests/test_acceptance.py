"""
Acceptance gate: the ten primary criteria at their stated tolerances.

Each test prints one PASS/FAIL line (also collected into the terminal
summary) with the measured figure and its wall-clock time against the
budget. Run standalone with ``python tests/test_acceptance.py``.
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from jcpackets.charfn import packet_zero_quadrature
from jcpackets.inversion import (
    FrequencyMap,
    TimeGrid,
    aligned_dt,
    auto_dt,
    complex_trace,
    even_extend,
    inversion_trace,
    locate_revivals,
)
from jcpackets.overlap import build_fredholm_system, solve_w0, windowed_spectrum
from jcpackets.packets import (
    auto_window,
    extract_packet_zero,
    ideal_packet_spectrum,
    packet_time_domain,
    propagate_packet,
    sum_packets,
    to_complex_spectrum,
    window_spectrum,
)
from jcpackets.retrieval import retrieve_distribution, validate_retrieval
from jcpackets.states import CatParams, cat_distribution, coherent_distribution

JCM = FrequencyMap("jcm", 1.0)
TAU20 = 2 * math.pi * math.sqrt(21)
RESULTS: dict[int, str] = {}


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def report(num: int, title: str, passed: bool, detail: str, clock: Clock, budget: float) -> None:
    ok = bool(passed) and clock.elapsed < budget
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d} {title}: {detail} ({clock.elapsed:.2f}s / {budget:g}s)"
    RESULTS[num] = line
    print(line)
    assert ok, line


def _coherent20_trace(t_end):
    dist = coherent_distribution(20)
    return dist, inversion_trace(dist, JCM, TimeGrid.span(t_end, auto_dt(JCM, dist.n_max)))


def test_c01_revival_spacing():
    with Clock() as clock:
        _, trace = _coherent20_trace(4.5 * TAU20)
        peaks = locate_revivals(trace, TAU20, [1, 2, 3, 4])
        offsets = peaks - TAU20 * np.arange(1, 5)
    detail = "peak offsets " + ", ".join(f"{o:+.3f}" for o in offsets) + " (limit 0.5)"
    report(1, "revival spacing", np.all(np.abs(offsets) < 0.5), detail, clock, 1.0)


def test_c02_exact_periodicity():
    with Clock() as clock:
        linear = FrequencyMap("linear", 1.0)
        shift = 512
        dt = math.pi / shift  # pi/g lands exactly on the grid
        w = inversion_trace(coherent_distribution(20), linear, TimeGrid(0.0, dt, 8 * shift + 1)).values
        gap = np.abs(w[:-shift] - w[shift:]).max()
    report(2, "exact periodicity", gap < 1e-12, f"max |W(t) - W(t + pi/g)| = {gap:.2e} (limit 1e-12)", clock, 1.0)


def test_c03_packet_reconstruction():
    with Clock() as clock:
        _, trace = _coherent20_trace(140.0)
        _, T = auto_window(trace, JCM)
        base = extract_packet_zero(trace, T, zero_pad_factor=16)
        t = trace.times
        err4 = np.abs(sum_packets(base, range(5), trace.grid, 1.0).values - trace.values)
        err5 = np.abs(sum_packets(base, range(6), trace.grid, 1.0).values - trace.values)
        early = err4[t <= 100].max()
        late4, late5 = err4[t >= 110].max(), err5[t >= 110].max()
    detail = f"Linf[0,100] = {early:.4f} (limit 0.02); Linf[110,140] m<=4 {late4:.3f} -> m<=5 {late5:.3f}"
    report(3, "packet reconstruction", early < 0.02 and late5 < late4, detail, clock, 5.0)


def test_c04_resolved_retrieval():
    with Clock() as clock:
        dist, trace = _coherent20_trace(60.0)
        _, T = auto_window(trace, JCM)
        base = extract_packet_zero(trace, T)
        r0 = retrieve_distribution(base, JCM, n_max=60)
        r1 = retrieve_distribution(propagate_packet(base, 1, 1.0), JCM, n_max=60)
        err0 = np.abs(r0.probs_raw - dist.padded(60)).max()
        gap01 = np.abs(r1.probs_raw - r0.probs_raw).max()
    detail = f"max|P - Poisson| = {err0:.2e}, max|P(m=1) - P(m=0)| = {gap01:.2e} (limits 0.01)"
    report(4, "resolved retrieval", err0 < 0.01 and gap01 < 0.01, detail, clock, 5.0)


def test_c05_cat_pitfall_and_fix():
    with Clock() as clock:
        cat = cat_distribution(CatParams(math.sqrt(20), math.pi))
        poisson = coherent_distribution(20).padded(60)
        trace = inversion_trace(cat, JCM, TimeGrid.span(100.0, auto_dt(JCM, cat.n_max)))
        quarter = TAU20 / 4
        collapse = retrieve_distribution(extract_packet_zero(trace, quarter), JCM, n_max=60)
        pitfall_err = np.abs(collapse.probs_raw - poisson).max()
        flagged = validate_retrieval(collapse, trace, JCM).flagged
        fixed = retrieve_distribution(extract_packet_zero(trace, quarter, window_end=3 * quarter), JCM, n_max=60)
        odd_max = fixed.probs_raw[1::2].max()
        even_err = np.abs(fixed.probs_raw[::2] - cat.padded(60)[::2]).max()
        inter = window_spectrum(even_extend(trace), quarter, 3 * quarter)
        negativity = retrieve_distribution(inter, JCM, n_max=60).residual_negativity
    passed = pitfall_err < 0.01 and flagged and odd_max < 0.005 and even_err < 0.01 and negativity < -0.01
    detail = (
        f"collapse-only ~Poisson ({pitfall_err:.1e}), flagged={flagged}; "
        f"fixed odd max {odd_max:.1e}, even err {even_err:.1e}; intermediate min {negativity:.3f}"
    )
    report(5, "cat pitfall and fix", passed, detail, clock, 10.0)


def test_c06_quadratic_phase_lemma():
    with Clock() as clock:
        dist = coherent_distribution(20)
        half = TAU20 / 2
        dt = aligned_dt(auto_dt(JCM, dist.n_max), half)
        z = complex_trace(dist, JCM, TimeGrid.span(3 * half, dt, -half))
        z0 = window_spectrum(z, -half, half)
        z1 = window_spectrum(z, half, 3 * half)
        nu = z0.nu
        power = np.abs(z0.values) ** 2
        order = np.argsort(power)[::-1]
        band = order[: np.searchsorted(np.cumsum(power[order]) / power.sum(), 0.99) + 1]
        undo = z1.at(nu) * np.exp(2j * np.pi * (np.pi * nu) ** 2)
        err = np.abs(undo - z0.values)[band].max() / np.abs(z0.values).max()
    report(6, "quadratic-phase lemma", err < 0.02, f"max rel deviation on 99% band = {err:.4f} (limit 0.02)", clock, 5.0)


def test_c07_fredholm_forward_oracle():
    with Clock() as clock:
        dist = coherent_distribution(1)
        dt = aligned_dt(auto_dt(JCM, dist.n_max), 5.0)
        trace = inversion_trace(dist, JCM, TimeGrid.span(5.0, dt))
        system = build_fredholm_system(windowed_spectrum(trace, 5.0), 1.0)
        w0 = ideal_packet_spectrum(dist, JCM, system.nu)
        predicted = system.apply_forward(w0)
        rel = np.linalg.norm(predicted - system.observed) / np.linalg.norm(system.observed)
    report(7, "Fredholm forward oracle", rel < 0.02, f"relative L2 = {rel:.4f} (limit 0.02)", clock, 5.0)


def test_c08_overlap_retrieval():
    with Clock() as clock:
        dist = coherent_distribution(1)
        dt = aligned_dt(auto_dt(JCM, dist.n_max), 5.0)
        trace = inversion_trace(dist, JCM, TimeGrid.span(5.0, dt))
        observed = windowed_spectrum(trace, 5.0)
        w0, rep = solve_w0(build_fredholm_system(observed, 1.0), report=True)
        truth = dist.padded(8)
        naive = np.abs(retrieve_distribution(observed, JCM, n_max=8).probs_raw - truth).max()
        fixed = np.abs(retrieve_distribution(w0, JCM, n_max=8).probs_raw - truth).max()
    passed = naive > 0.05 and fixed < 0.02 and rep.residual < 1e-8
    detail = f"naive err {naive:.3f} (> 0.05), corrected err {fixed:.4f} (< 0.02), residual {rep.residual:.1e}"
    report(8, "overlap retrieval", passed, detail, clock, 10.0)


def test_c09_property_suites():
    root = Path(__file__).resolve().parents[1]
    with Clock() as clock:
        proc = subprocess.run(
            [sys.executable, "-m", "pytest", "-m", "property", "-q", "-p", "no:cacheprovider", "tests"],
            cwd=root, capture_output=True, text=True,
        )
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr.strip()[-200:]
    report(9, "property suites", proc.returncode == 0, f"pytest -m property: {summary}", clock, 10.0)


@pytest.mark.expensive
def test_c10_quadrature_oracle():
    with Clock() as clock:
        dist, trace = _coherent20_trace(60.0)
        _, T = auto_window(trace, JCM)
        base = to_complex_spectrum(extract_packet_zero(trace, T, zero_pad_factor=16))
        times = np.linspace(0.0, 6.0, 10)
        fft_z0 = np.array([packet_time_domain(base, TimeGrid(t, trace.grid.dt, 1)).values[0] for t in times])
        quad_z0 = packet_zero_quadrature(dist, JCM, times)
        err = np.abs(fft_z0 - quad_z0).max()
    report(10, "quadrature oracle", err < 1e-2, f"max |Z0_fft - Z0_quad| at 10 times = {err:.1e} (limit 1e-2)", clock, 30.0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
