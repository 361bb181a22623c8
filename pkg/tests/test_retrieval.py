import json
import math

import numpy as np
import pytest

from jcpackets.errors import CoverageError, InvalidArgumentError
from jcpackets.inversion import FrequencyMap, TimeGrid, inversion_trace
from jcpackets.packets import (
    Spectrum,
    auto_window,
    extract_packet_zero,
    ideal_packet_spectrum,
    propagate_packet,
)
from jcpackets.retrieval import (
    nu_n,
    retrieval_curve,
    retrieve_distribution,
    validate_retrieval,
)
from jcpackets.states import fock_distribution

from conftest import TAU20


@pytest.fixture(scope="module")
def base20(trace20, jcm):
    _, T = auto_window(trace20, jcm)
    return extract_packet_zero(trace20, T)


@pytest.fixture(scope="module")
def result20(base20, jcm):
    return retrieve_distribution(base20, jcm, n_max=60)


def _ideal(dist, fmap, T, dt, pad):
    count = 2 * int(round(T / dt)) + 1
    n_fft = count * pad
    nu = np.fft.fftshift(np.fft.fftfreq(n_fft, dt))
    return Spectrum(nu, ideal_packet_spectrum(dist, fmap, nu), T, dt)


class TestNuN:
    def test_values(self, jcm):
        assert nu_n(jcm, 0) == pytest.approx(1 / np.pi)
        assert nu_n(jcm, 3) == pytest.approx(2 / np.pi)
        assert nu_n(FrequencyMap("linear"), 3) == pytest.approx(3 / np.pi)

    def test_increasing(self, jcm):
        assert np.all(np.diff(nu_n(jcm, np.arange(80))) > 0)

    def test_rejects_negative(self, jcm):
        with pytest.raises(InvalidArgumentError):
            nu_n(jcm, -1)


class TestResolvedRetrieval:
    def test_poisson(self, result20, coherent20):
        err = np.abs(result20.probs_raw - coherent20.padded(60)).max()
        assert err < 0.01

    def test_m1_agrees(self, base20, result20, jcm):
        m1 = retrieve_distribution(propagate_packet(base20, 1, 1.0), jcm, n_max=60)
        assert np.abs(m1.probs_raw - result20.probs_raw).max() < 0.01

    def test_clean_diagnostics(self, result20):
        assert result20.clean
        assert 0.97 <= result20.diagnostics["sum_raw"] <= 1.03
        assert result20.diagnostics["warnings"] == []

    def test_curve_hits_integers(self, base20, result20, jcm):
        curve = retrieval_curve(base20, jcm, np.arange(61))
        np.testing.assert_allclose(curve, result20.probs_raw, atol=1e-12)

    def test_default_n_max_has_guard(self, base20, jcm):
        res = retrieve_distribution(base20, jcm)
        assert nu_n(jcm, res.n_max) <= 0.9 * base20.nu[-1]

    def test_coverage_error(self, base20, jcm):
        with pytest.raises(CoverageError):
            retrieve_distribution(base20, jcm, n_max=10_000)

    def test_json(self, result20):
        data = json.loads(result20.to_json())
        assert set(data) == {"g", "n_max", "probs_raw", "probs_clean", "residual_negativity", "diagnostics"}
        assert data["n_max"] == 60

    def test_z_spectrum_same_answer(self, ztrace20, result20, jcm):
        from jcpackets.packets import window_spectrum

        zspec = window_spectrum(ztrace20, -TAU20 / 2, TAU20 / 2)
        res = retrieve_distribution(zspec, jcm, n_max=60)
        assert np.abs(res.probs_raw - result20.probs_raw).max() < 0.01


class TestIdealSpectra:
    def test_fock3(self, jcm):
        res = retrieve_distribution(_ideal(fock_distribution(3), jcm, 10.0, 0.1, 8), jcm, n_max=8)
        expect = np.eye(9)[3]
        assert np.abs(res.probs_raw - expect).max() < 1e-3

    def test_interpolation_error_halves(self, coherent20, jcm):
        dt, T = 0.05, 14.4
        errors = []
        for pad in (8, 16):
            res = retrieve_distribution(_ideal(coherent20, jcm, T, dt, pad), jcm, n_max=60)
            errors.append(np.abs(res.probs_raw - coherent20.padded(60)).max())
        assert errors[0] < 1e-3
        assert errors[1] <= errors[0] / 2


class TestValidation:
    def test_correct_retrieval_round_trip(self, result20, coherent20, jcm):
        trace = inversion_trace(coherent20, jcm, TimeGrid.span(60.0, 0.05))
        report = validate_retrieval(result20, trace, jcm)
        assert report.linf < 0.02 and not report.flagged

    def test_cat_collapse_only_flagged(self, cat_trace, jcm):
        tau = 2 * math.pi * math.sqrt(21)
        spec = extract_packet_zero(cat_trace, tau / 4)
        res = retrieve_distribution(spec, jcm, n_max=60)
        assert validate_retrieval(res, cat_trace, jcm).flagged

    def test_negativity_reported(self, cat_trace, jcm):
        from jcpackets.packets import window_spectrum
        from jcpackets.inversion import even_extend

        tau = 2 * math.pi * math.sqrt(21)
        spec = window_spectrum(even_extend(cat_trace), tau / 4, 3 * tau / 4)
        res = retrieve_distribution(spec, jcm, n_max=60)
        assert res.residual_negativity < -0.01
        assert any("negative" in w for w in res.diagnostics["warnings"])
        assert res.probs_clean.probs.min() >= 0
