import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from difflab import ConfigError, ContractError
from difflab.diffusion import (NoiseSchedule, flow_interpolant, forward_noise,
                               linear_schedule)


class TestLinearSchedule:
    def test_hand_values(self):
        s = linear_schedule(2, 0.1, 0.2)
        assert np.allclose(s.beta, [0.1, 0.2])
        assert np.allclose(s.alpha, [0.9, 0.8])
        assert np.allclose(s.alpha_bar, [0.9, 0.72])

    def test_degenerate_T1(self):
        s = linear_schedule(1, 0.05, 0.3)
        assert np.allclose(s.beta, [0.05])

    def test_bounds_rejected(self):
        with pytest.raises(ConfigError):
            linear_schedule(0, 0.1, 0.2)
        with pytest.raises(ConfigError):
            linear_schedule(10, 0.2, 0.1)
        with pytest.raises(ConfigError):
            linear_schedule(10, 0.0, 0.1)

    @given(T=st.integers(1, 200),
           bmin=st.floats(1e-6, 0.5),
           span=st.floats(0.0, 0.49))
    @settings(max_examples=50, deadline=None)
    def test_alpha_bar_strictly_decreasing(self, T, bmin, span):
        s = linear_schedule(T, bmin, min(bmin + span, 0.999))
        assert np.all(np.diff(s.alpha_bar) < 0) or T == 1
        assert s.alpha_bar[-1] <= s.alpha_bar[0] < 1.0

    def test_abar_zero_convention(self):
        s = linear_schedule(5, 0.1, 0.2)
        assert s.abar(0) == 1.0
        with pytest.raises(ContractError):
            s.abar(6)


class TestForwardNoise:
    def test_hand_value(self):
        s = linear_schedule(2, 0.1, 0.2)  # abar_2 = 0.72
        out = forward_noise(np.array([1.0, 1.0]), 2, np.zeros(2), s)
        assert np.allclose(out, np.sqrt(0.72), atol=1e-12)
        assert abs(out[0] - 0.8485) < 1e-4

    def test_abar_one_identity_limit(self):
        # tiny beta makes abar ~ 1: x_k ~ x0
        s = linear_schedule(1, 1e-12, 1e-12)
        x0 = np.array([0.3, -0.7])
        out = forward_noise(x0, 1, np.array([5.0, 5.0]), s)
        assert np.allclose(out, x0, atol=1e-5)

    def test_out_of_range(self):
        s = linear_schedule(3, 0.1, 0.2)
        with pytest.raises(ContractError):
            forward_noise(np.zeros(2), 0, np.zeros(2), s)
        with pytest.raises(ContractError):
            forward_noise(np.zeros(2), 4, np.zeros(2), s)

    @pytest.mark.parametrize("k", [1, 25, 50])
    def test_monte_carlo_marginal(self, k):
        s = linear_schedule(50, 1e-4, 0.05)
        x0 = np.array([0.3, -0.7])
        N = 100_000
        rng = np.random.default_rng(k)
        eps = rng.standard_normal((N, 2))
        out = forward_noise(x0, k, eps, s)
        ab = s.alpha_bar[k - 1]
        mean_tol = 4.0 * np.sqrt((1.0 - ab) / N)
        assert np.all(np.abs(out.mean(axis=0) - np.sqrt(ab) * x0) < mean_tol)
        var = out.var(axis=0)
        assert np.all(np.abs(var / (1.0 - ab) - 1.0) < 0.02)


class TestFlowInterpolant:
    def test_endpoints(self):
        z = np.array([1.0, 2.0])
        x1 = np.array([-3.0, 0.5])
        xs, v = flow_interpolant(z, x1, 0.0)
        assert np.allclose(xs, z) and np.allclose(v, x1 - z)
        xs, v = flow_interpolant(z, x1, 1.0)
        assert np.allclose(xs, x1) and np.allclose(v, x1 - z)

    def test_hand_quarter(self):
        xs, v = flow_interpolant(np.zeros(2), np.array([2.0, -2.0]), 0.25)
        assert np.allclose(xs, [0.5, -0.5])
        assert np.allclose(v, [2.0, -2.0])

    def test_affine_slope_matches_velocity(self):
        rng = np.random.default_rng(0)
        z = rng.standard_normal(2)
        x1 = rng.standard_normal(2)
        h = 1e-6
        for s in (0.2, 0.5, 0.8):
            lo, v = flow_interpolant(z, x1, s - h)
            hi, _ = flow_interpolant(z, x1, s + h)
            slope = (hi - lo) / (2 * h)
            assert np.all(np.abs(slope - v) < 1e-9)

    def test_batched(self):
        rng = np.random.default_rng(1)
        z = rng.standard_normal((5, 2))
        x1 = rng.standard_normal((5, 2))
        s = rng.uniform(size=5)
        xs, v = flow_interpolant(z, x1, s)
        assert xs.shape == (5, 2)
        for i in range(5):
            xi, vi = flow_interpolant(z[i], x1[i], s[i])
            assert np.allclose(xs[i], xi) and np.allclose(v[i], vi)
