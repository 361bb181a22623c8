import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jcpackets.charfn import chi_eval
from jcpackets.errors import InvalidArgumentError
from jcpackets.inversion import (
    FrequencyMap,
    InversionTrace,
    TimeGrid,
    aligned_dt,
    auto_dt,
    complex_trace,
    even_extend,
    inversion_trace,
    locate_revivals,
    rabi_populations,
)
from jcpackets.states import fock_distribution

from strategies import distributions

LINEAR = FrequencyMap("linear", 1.0)


class TestFrequencyMap:
    def test_values(self):
        assert FrequencyMap("jcm", 2.0).frequency(3) == pytest.approx(4 / np.pi)
        assert LINEAR.frequency(3) == pytest.approx(3 / np.pi)

    @pytest.mark.parametrize("kind", ["jcm", "linear"])
    def test_inverse(self, kind):
        fmap = FrequencyMap(kind, 1.7)
        x = np.linspace(0, 50, 11)
        np.testing.assert_allclose(fmap.photon_number(fmap.frequency(x)), x, atol=1e-12)

    def test_strictly_increasing(self, jcm):
        assert np.all(np.diff(jcm.frequency(np.arange(100))) > 0)

    @pytest.mark.parametrize("kw", [{"kind": "quadratic"}, {"g": 0.0}, {"g": -1.0}])
    def test_rejects(self, kw):
        with pytest.raises(InvalidArgumentError):
            FrequencyMap(**kw)


class TestTimeGrid:
    def test_span_reaches_end(self):
        grid = TimeGrid.span(10.0, 0.3)
        assert grid.t_end >= 10.0 and grid.t_end - 0.3 < 10.0

    def test_symmetric(self):
        grid = TimeGrid.symmetric(1.0, 0.25)
        np.testing.assert_allclose(grid.times, [-1, -0.75, -0.5, -0.25, 0, 0.25, 0.5, 0.75, 1])

    def test_aligned_dt(self):
        dt = aligned_dt(0.07, 5.0)
        assert dt <= 0.07 and (5.0 / dt) == pytest.approx(round(5.0 / dt), abs=1e-9)

    def test_auto_dt_margin(self, jcm):
        dt = auto_dt(jcm, 60)
        assert jcm.frequency(60) * dt == pytest.approx(1 / 8)

    def test_rejects(self):
        with pytest.raises(InvalidArgumentError):
            TimeGrid(0.0, 0.0, 4)
        with pytest.raises(InvalidArgumentError):
            TimeGrid(0.0, 0.1, 0)


class TestRabi:
    def test_initially_excited(self):
        assert rabi_populations(4, 1.0, 0.0) == (1.0, 0.0)

    def test_quarter_period(self):
        pe, pg = rabi_populations(0, 1.0, np.pi / 2)
        assert pe == pytest.approx(0, abs=1e-15) and pg == pytest.approx(1)

    @given(st.integers(0, 200), st.floats(0.01, 10), st.floats(-1e3, 1e3))
    def test_conservation(self, n, g, t):
        pe, pg = rabi_populations(n, g, t)
        assert pe + pg == 1.0

    def test_matches_fock_inversion(self):
        grid = TimeGrid(0.0, 0.05, 400)
        w = inversion_trace(fock_distribution(5), FrequencyMap(), grid).values
        pe, pg = rabi_populations(5, 1.0, grid.times)
        np.testing.assert_allclose(w, pe - pg, atol=1e-12)

    @pytest.mark.parametrize("n,g", [(-1, 1.0), (1, 0.0)])
    def test_rejects(self, n, g):
        with pytest.raises(InvalidArgumentError):
            rabi_populations(n, g, 0.0)


class TestTraces:
    def test_fock5_cosine(self, jcm):
        grid = TimeGrid(0.0, 0.01, 3000)
        w = inversion_trace(fock_distribution(5), jcm, grid).values
        np.testing.assert_allclose(w, np.cos(2 * math.sqrt(6) * grid.times), atol=1e-12)

    def test_fock_complex_unit_modulus(self, jcm):
        grid = TimeGrid(0.0, 0.37, 500)
        z = complex_trace(fock_distribution(9), jcm, grid).values
        np.testing.assert_allclose(z, np.exp(2j * math.sqrt(10) * grid.times), atol=1e-12)

    def test_initial_value(self, coherent20, jcm):
        assert inversion_trace(coherent20, jcm, TimeGrid(0.0, 0.1, 2)).values[0] == pytest.approx(1, abs=1e-12)

    def test_real_part(self, coherent20, jcm):
        grid = TimeGrid(0.0, 0.1, 300)
        z = complex_trace(coherent20, jcm, grid)
        np.testing.assert_array_equal(z.real.values, inversion_trace(coherent20, jcm, grid).values)

    @pytest.mark.property
    @given(distributions(), st.floats(-200, 200))
    @settings(max_examples=40, deadline=None)
    def test_linear_map_is_chi(self, dist, t0):
        grid = TimeGrid(t0, 0.173, 64)
        z = complex_trace(dist, LINEAR, grid).values
        np.testing.assert_allclose(z, chi_eval(dist, grid.times / np.pi), atol=1e-12, rtol=0)

    @pytest.mark.property
    @given(distributions(max_n=60))
    @settings(max_examples=30, deadline=None)
    def test_amplitude_bound(self, dist):
        w = inversion_trace(dist, FrequencyMap(), TimeGrid(0.0, 0.21, 800)).values
        assert np.abs(w).max() <= 1 + 1e-12

    @pytest.mark.property
    def test_linear_periodicity(self, coherent20):
        dt = np.pi / 400
        w = inversion_trace(coherent20, LINEAR, TimeGrid(0.0, dt, 2001)).values
        assert np.abs(w[:-400] - w[400:]).max() < 1e-12

    @pytest.mark.property
    def test_symmetric_grid_even(self, coherent20, jcm):
        w = inversion_trace(coherent20, jcm, TimeGrid.symmetric(40.0, 0.05)).values
        assert np.abs(w - w[::-1]).max() < 1e-9

    def test_parseval_long_time(self, coherent20, jcm):
        grid = TimeGrid.span(1e4, auto_dt(jcm, coherent20.n_max))
        z = complex_trace(coherent20, jcm, grid).values
        assert np.mean(np.abs(z) ** 2) == pytest.approx(np.sum(coherent20.probs**2), abs=1e-2)

    def test_first_revival(self, trace20):
        peak = locate_revivals(trace20, 2 * np.pi * math.sqrt(21), [1])[0]
        assert abs(peak - 2 * np.pi * math.sqrt(21)) < 0.5


class TestEvenExtend:
    @pytest.mark.property
    def test_mirror(self):
        tr = InversionTrace(TimeGrid(0.0, 0.5, 3), [1.0, 0.5, -0.2])
        out = even_extend(tr)
        assert out.values.tolist() == [-0.2, 0.5, 1.0, 0.5, -0.2]
        np.testing.assert_allclose(out.times, [-1, -0.5, 0, 0.5, 1])

    def test_single_sample(self):
        tr = InversionTrace(TimeGrid(0.0, 0.5, 1), [0.3])
        assert even_extend(tr).values.tolist() == [0.3]

    @pytest.mark.property
    def test_equals_symmetric_simulation(self, coherent20, jcm):
        dt = 0.05
        ext = even_extend(inversion_trace(coherent20, jcm, TimeGrid(0.0, dt, 801)))
        direct = inversion_trace(coherent20, jcm, TimeGrid(-800 * dt, dt, 1601))
        np.testing.assert_allclose(ext.values, direct.values, atol=1e-12)

    def test_requires_origin(self):
        with pytest.raises(InvalidArgumentError):
            even_extend(InversionTrace(TimeGrid(1.0, 0.5, 3), [1, 2, 3]))
