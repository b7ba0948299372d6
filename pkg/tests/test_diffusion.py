"""Forward-process identities and loss behavior."""

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from waverestore.diffusion import (
    NoiseDraw,
    draw_noise,
    forward_chain_step,
    forward_sample,
    refine_loss,
    simple_loss,
)
from waverestore.schedule import make_linear_schedule

SCHED = make_linear_schedule()


class TestForwardSample:
    def test_pure_signal_scaling(self):
        # eps = 0 leaves sqrt(abar_t) * x0; t=100 value frozen from the
        # 50-digit reference
        x0 = np.ones((2, 2, 1))
        out = forward_sample(x0, 100, np.zeros_like(x0), SCHED)
        np.testing.assert_allclose(out, 0.94711041894541545, rtol=1e-12)

    def test_pure_noise_scaling(self):
        x0 = np.zeros((2, 2, 1))
        eps = np.ones_like(x0)
        out = forward_sample(x0, 1000, eps, SCHED)
        expected = np.sqrt(1.0 - 4.0358297653756833e-05)
        np.testing.assert_allclose(out, expected, rtol=1e-12)

    def test_accepts_noise_draw(self):
        rng = np.random.default_rng(0)
        x0 = rng.normal(size=(4, 4, 3))
        draw = draw_noise(x0.shape, np.random.default_rng(1), lineage="test")
        out = forward_sample(x0, 500, draw, SCHED)
        out2 = forward_sample(x0, 500, draw.values, SCHED)
        np.testing.assert_array_equal(out, out2)
        assert draw.lineage == "test"

    @pytest.mark.parametrize("t", [0, -3, 1001])
    def test_t_bounds(self, t):
        x = np.zeros((2, 2, 1))
        with pytest.raises(ValueError, match="t must be"):
            forward_sample(x, t, x, SCHED)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            forward_sample(np.zeros((2, 2, 1)), 10, np.zeros((2, 2, 2)), SCHED)


class TestChainVsClosedForm:
    def test_zero_noise_path_matches_closed_form(self):
        # with all draws zero the chain collapses to sqrt(abar_t) * x0
        rng = np.random.default_rng(42)
        x0 = rng.normal(size=(3, 3, 2))
        x = x0
        z = np.zeros_like(x0)
        for t in range(1, 301):
            x = forward_chain_step(x, t, z, SCHED)
        np.testing.assert_allclose(x, np.sqrt(SCHED.alpha_bar[300]) * x0, rtol=1e-12)

    def test_variance_recursion_matches_closed_form(self):
        # v_t = (1 - beta_t) v_{t-1} + beta_t propagated exactly equals 1 - abar_t
        v = 0.0
        for t in range(1, SCHED.T + 1):
            v = (1.0 - SCHED.beta[t]) * v + SCHED.beta[t]
            assert abs(v - (1.0 - SCHED.alpha_bar[t])) < 1e-12

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2 ** 31 - 1), t=st.integers(1, 1000))
    def test_single_chain_step_identity(self, seed, t):
        # one chained step from a closed-form state lands on a closed-form
        # state with the correctly combined noise
        rng = np.random.default_rng(seed)
        x0 = rng.normal(size=(2, 2, 1))
        eps = rng.normal(size=(2, 2, 1))
        z = rng.normal(size=(2, 2, 1))
        if t == 1:
            x_prev = x0
        else:
            x_prev = forward_sample(x0, t - 1, eps, SCHED)
        x_t = forward_chain_step(x_prev, t, z, SCHED)
        ab_prev = SCHED.alpha_bar[t - 1]
        ab = SCHED.alpha_bar[t]
        combined = (np.sqrt(1.0 - SCHED.beta[t]) * np.sqrt(1.0 - ab_prev) * eps
                    + np.sqrt(SCHED.beta[t]) * z)
        expected = np.sqrt(ab) * x0 + combined
        np.testing.assert_allclose(x_t, expected, atol=1e-12)
        # the combined noise has variance exactly 1 - abar_t
        var = (1.0 - SCHED.beta[t]) * (1.0 - ab_prev) + SCHED.beta[t]
        assert abs(var - (1.0 - ab)) < 1e-12


class TestLosses:
    def test_simple_loss_known_value(self):
        pred = np.array([1.0, 2.0, 3.0])
        true = np.array([0.0, 0.0, 0.0])
        assert simple_loss(pred, true) == pytest.approx(14.0 / 3.0)

    def test_refine_loss_known_value(self):
        pred = np.array([[1.0, -2.0]])
        true = np.array([[0.0, 2.0]])
        assert refine_loss(pred, true) == pytest.approx(2.5)

    def test_losses_work_on_torch_tensors(self):
        pred = torch.tensor([1.0, 2.0], requires_grad=True)
        true = torch.tensor([0.0, 0.0])
        loss = simple_loss(pred, true)
        assert isinstance(loss, torch.Tensor)
        loss.backward()
        np.testing.assert_allclose(pred.grad.numpy(), [1.0, 2.0])
        l1 = refine_loss(torch.tensor([1.0, -1.0]), torch.tensor([0.0, 0.0]))
        assert float(l1) == pytest.approx(1.0)

    def test_loss_shape_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            simple_loss(np.zeros(3), np.zeros(4))
        with pytest.raises(ValueError, match="mismatch"):
            refine_loss(np.zeros(3), np.zeros(4))

    def test_zero_loss_at_equality(self):
        x = np.random.default_rng(0).normal(size=(5, 5))
        assert simple_loss(x, x) == 0.0
        assert refine_loss(x, x) == 0.0


class TestNoiseDraw:
    def test_draw_shape_and_reproducibility(self):
        a = draw_noise((3, 3, 2), np.random.default_rng(9), "train")
        b = draw_noise((3, 3, 2), np.random.default_rng(9), "train")
        assert isinstance(a, NoiseDraw)
        assert a.values.shape == (3, 3, 2)
        np.testing.assert_array_equal(a.values, b.values)
