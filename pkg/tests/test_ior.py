import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gazesim.ior import InhibitionMap, IorParams, gaussian_footprint, ior_step

PARAMS = IorParams(beta=0.1, sigma=14.0)


class TestIorStep:
    def test_long_step_reaches_fixed_point(self):
        imap = InhibitionMap.zeros(32, 32)
        out = ior_step(imap, (10.0, 12.0), 1e6, PARAMS)
        g = gaussian_footprint(32, 32, (10.0, 12.0), 14.0)
        np.testing.assert_allclose(out.values, g, atol=1e-9)

    def test_closed_form_at_focus(self):
        imap = InhibitionMap.zeros(32, 32)
        out = ior_step(imap, (16.0, 16.0), 1.0, PARAMS)
        assert out.values[16, 16] == pytest.approx(1.0 - np.exp(-0.1), rel=1e-12)

    def test_equilibrium_is_stationary(self):
        g = gaussian_footprint(32, 32, (8.0, 20.0), 14.0)
        out = ior_step(InhibitionMap(g), (8.0, 20.0), 7.3, PARAMS)
        np.testing.assert_allclose(out.values, g, atol=1e-12)

    def test_decay_far_from_focus(self):
        sigma = 2.0
        params = IorParams(beta=0.1, sigma=sigma)
        values = np.zeros((64, 64))
        values[32, 52] = 0.5  # 10 sigma away from the focus at (32, 32)
        out = ior_step(InhibitionMap(values), (32.0, 32.0), 1.0, params)
        assert out.values[32, 52] == pytest.approx(0.5 * np.exp(-0.1), abs=1e-6)

    def test_non_positive_dt(self):
        with pytest.raises(ValueError):
            ior_step(InhibitionMap.zeros(8, 8), (0.0, 0.0), 0.0, PARAMS)

    def test_param_validation(self):
        with pytest.raises(ValueError):
            IorParams(beta=1.0)
        with pytest.raises(ValueError):
            IorParams(beta=0.1, sigma=0.0)

    def test_map_bounds_validation(self):
        with pytest.raises(ValueError):
            InhibitionMap(np.full((4, 4), 1.5))


class TestIorProperties:
    @given(
        dt=st.floats(1e-3, 10.0),
        beta=st.floats(0.01, 0.99),
        sigma=st.floats(1.0, 50.0),
        ax=st.floats(0.0, 31.0),
        ay=st.floats(0.0, 31.0),
    )
    @settings(max_examples=40, deadline=None)
    def test_semigroup(self, dt, beta, sigma, ax, ay):
        params = IorParams(beta=beta, sigma=sigma)
        start = InhibitionMap(np.random.default_rng(0).random((32, 32)))
        two_steps = ior_step(ior_step(start, (ax, ay), dt, params), (ax, ay), dt, params)
        one_step = ior_step(start, (ax, ay), 2.0 * dt, params)
        np.testing.assert_allclose(two_steps.values, one_step.values, atol=1e-12)

    def test_bounded_over_many_steps(self):
        rng = np.random.default_rng(1)
        imap = InhibitionMap.zeros(32, 32)
        for k in range(10_000):
            focus = (float(31 * rng.random()), float(31 * rng.random()))
            imap = ior_step(imap, focus, 0.02, PARAMS)
            assert 0.0 <= imap.values.min() and imap.values.max() <= 1.0

    def test_monotone_convergence_rate(self):
        params = IorParams(beta=0.3, sigma=5.0)
        focus = (16.0, 16.0)
        g = gaussian_footprint(32, 32, focus, 5.0)
        imap = InhibitionMap(np.random.default_rng(2).random((32, 32)))
        dt = 0.5
        prev_gap = np.abs(imap.values - g).max()
        for _ in range(20):
            imap = ior_step(imap, focus, dt, params)
            gap = np.abs(imap.values - g).max()
            assert gap == pytest.approx(prev_gap * np.exp(-params.beta * dt), rel=1e-9)
            prev_gap = gap
