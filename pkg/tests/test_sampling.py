"""Reverse-step algebra and sampling-loop behavior.

The frozen scalars below were derived by hand from the step formulas on a
small synthetic table (alpha_t = 0.99 with abar_t = 0.5, and abar = 0.25)
and cross-checked at 50-digit precision.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from waverestore.diffusion import NumericError, forward_sample
from waverestore.sampling import (
    SamplerTrace,
    ddim_sample,
    ddim_step,
    ddpm_ancestral_step,
    ddpm_sample,
    ecs_sample,
    predict_x0,
    sample,
    sigma_family_step,
)
from waverestore.schedule import (
    NoiseSchedule,
    make_ddim_plan,
    make_ddpm_plan,
    make_ecs_plan,
    make_linear_schedule,
)

SCHED = make_linear_schedule()


def handcrafted_schedule():
    """Tiny table exercising the step formulas with round numbers.

    Deliberately not a product-consistent table; the container allows it so
    scalar cases stay hand-checkable.
    """
    return NoiseSchedule(
        T=2,
        beta=np.array([0.0, 0.01, 0.02]),
        alpha=np.array([1.0, 0.99, 0.98]),
        alpha_bar=np.array([1.0, 0.5, 0.25]),
        posterior_variance=np.array([0.0, 0.0, (1.0 - 0.5) / (1.0 - 0.25) * 0.02]),
    )


def oracle_estimator(x0_low, sched):
    """Noise estimator with perfect knowledge of the clean low bands."""

    def est(x_t, cond_high, cond_spec, t):
        ab = sched.alpha_bar[t]
        return (x_t - np.sqrt(ab) * x0_low) / np.sqrt(1.0 - ab)

    return est


class TestStepScalars:
    def test_ancestral_mean_frozen_scalar(self):
        s = handcrafted_schedule()
        x = np.array([[[1.0]]])
        eps = np.array([[[0.5]]])
        out = ddpm_ancestral_step(x, eps, 1, np.array([[[99.0]]]), s)
        np.testing.assert_allclose(out, 0.997931124714025, rtol=1e-12)

    def test_ancestral_noise_injected_above_t1(self):
        s = handcrafted_schedule()
        x = np.array([[[1.0]]])
        eps = np.array([[[0.0]]])
        z = np.array([[[1.0]]])
        base = ddpm_ancestral_step(x, eps, 2, np.zeros_like(z), s)
        noisy = ddpm_ancestral_step(x, eps, 2, z, s)
        sigma = np.sqrt(s.posterior_variance[2])
        np.testing.assert_allclose(noisy - base, sigma, rtol=1e-12)

    def test_predict_x0_frozen_scalar(self):
        s = handcrafted_schedule()
        out = predict_x0(np.array([1.0]), np.array([0.5]), 2, s)
        np.testing.assert_allclose(out, 1.1339745962155614, rtol=1e-12)

    def test_ddim_step_endpoint_values(self):
        # stepping to t_prev=0 returns predict_x0 exactly (abar_0 = 1)
        s = handcrafted_schedule()
        x = np.array([1.0])
        eps = np.array([0.5])
        np.testing.assert_allclose(
            ddim_step(x, eps, 2, 0, s), predict_x0(x, eps, 2, s), rtol=1e-15
        )

    def test_ddim_step_bounds(self):
        with pytest.raises(ValueError, match="t_prev"):
            ddim_step(np.zeros(1), np.zeros(1), 10, 10, SCHED)
        with pytest.raises(ValueError, match="t_prev"):
            ddim_step(np.zeros(1), np.zeros(1), 10, -1, SCHED)
        with pytest.raises(ValueError, match="t must be"):
            predict_x0(np.zeros(1), np.zeros(1), 0, SCHED)


class TestStepFamily:
    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2 ** 31 - 1), t=st.integers(2, 1000))
    def test_ancestral_is_sigma_family_member(self, seed, t):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(3, 3, 2))
        eps = rng.normal(size=(3, 3, 2))
        z = rng.normal(size=(3, 3, 2))
        sigma = float(np.sqrt(SCHED.posterior_variance[t]))
        a = ddpm_ancestral_step(x, eps, t, z, SCHED)
        b = sigma_family_step(x, eps, t, t - 1, sigma, z, SCHED)
        np.testing.assert_allclose(a, b, atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2 ** 31 - 1), t=st.integers(2, 1000), gap=st.integers(1, 200))
    def test_ddim_is_zero_sigma_member(self, seed, t, gap):
        rng = np.random.default_rng(seed)
        t_prev = max(0, t - gap)
        x = rng.normal(size=(2, 2, 3))
        eps = rng.normal(size=(2, 2, 3))
        a = ddim_step(x, eps, t, t_prev, SCHED)
        b = sigma_family_step(x, eps, t, t_prev, 0.0, None, SCHED)
        np.testing.assert_allclose(a, b, atol=1e-14)

    def test_sigma_beyond_budget_rejected(self):
        with pytest.raises(ValueError, match="variance"):
            sigma_family_step(np.zeros(1), np.zeros(1), 500, 499, 5.0, np.zeros(1), SCHED)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2 ** 31 - 1), t=st.integers(1, 1000))
    def test_predict_x0_inverts_forward(self, seed, t):
        rng = np.random.default_rng(seed)
        x0 = rng.normal(size=(4, 4, 3))
        eps = rng.normal(size=(4, 4, 3))
        x_t = forward_sample(x0, t, eps, SCHED)
        np.testing.assert_allclose(predict_x0(x_t, eps, t, SCHED), x0, atol=1e-9)


class CountingEstimator:
    def __init__(self, inner):
        self.inner = inner
        self.calls = 0

    def __call__(self, x_t, cond_high, cond_spec, t):
        self.calls += 1
        return self.inner(x_t, cond_high, cond_spec, t)


@pytest.fixture
def oracle_setup():
    rng = np.random.default_rng(123)
    x0 = rng.uniform(-1, 1, size=(8, 8, 3))
    cond_high = rng.normal(size=(8, 8, 45))
    cond_spec = rng.normal(size=(8, 8, 48))
    return x0, cond_high, cond_spec


class TestLoops:
    def test_ddim_oracle_recovers_signal(self, oracle_setup):
        x0, ch, cs = oracle_setup
        est = CountingEstimator(oracle_estimator(x0, SCHED))
        plan = make_ddim_plan(1000, 25)
        out, trace = ddim_sample(est, ch, cs, plan, SCHED, np.random.default_rng(7))
        rmse = float(np.sqrt(np.mean((out - x0) ** 2)))
        assert rmse < 1e-10
        assert est.calls == 25
        assert trace.eval_count == 25
        assert len(trace.records) == 26

    def test_ecs_oracle_recovers_signal_across_grid(self, oracle_setup):
        x0, ch, cs = oracle_setup
        for stride, max_evals in ((100, 10), (40, 25)):
            for evals in range(1, max_evals + 1):
                est = CountingEstimator(oracle_estimator(x0, SCHED))
                plan = make_ecs_plan(1000, stride, evals)
                out, trace = ecs_sample(est, ch, cs, plan, SCHED, np.random.default_rng(7))
                rmse = float(np.sqrt(np.mean((out - x0) ** 2)))
                assert rmse < 1e-10, (stride, evals, rmse)
                assert est.calls == evals
                assert trace.eval_count == evals

    def test_ecs_exact_eval_budget(self, oracle_setup):
        x0, ch, cs = oracle_setup
        est = CountingEstimator(oracle_estimator(x0, SCHED))
        plan = make_ecs_plan(1000, 100, 4)
        ecs_sample(est, ch, cs, plan, SCHED, np.random.default_rng(0))
        assert est.calls == 4

    def test_ddpm_oracle_recovers_signal_small_T(self):
        sched = make_linear_schedule(T=50)
        rng = np.random.default_rng(5)
        x0 = rng.uniform(-1, 1, size=(4, 4, 3))
        ch = rng.normal(size=(4, 4, 45))
        cs = rng.normal(size=(4, 4, 48))
        est = CountingEstimator(oracle_estimator(x0, sched))
        plan = make_ddpm_plan(50)
        out, trace = ddpm_sample(est, ch, cs, plan, sched, np.random.default_rng(3))
        np.testing.assert_allclose(out, x0, atol=1e-8)
        assert est.calls == 50

    def test_seeded_runs_bit_identical(self, oracle_setup):
        x0, ch, cs = oracle_setup
        plan = make_ecs_plan(1000, 100, 4)
        est = oracle_estimator(x0, SCHED)
        a, _ = ecs_sample(est, ch, cs, plan, SCHED, np.random.default_rng(99))
        b, _ = ecs_sample(est, ch, cs, plan, SCHED, np.random.default_rng(99))
        np.testing.assert_array_equal(a, b)

    def test_sample_dispatch(self, oracle_setup):
        x0, ch, cs = oracle_setup
        est = oracle_estimator(x0, SCHED)
        plan = make_ddim_plan(1000, 10)
        via_dispatch, _ = sample(est, ch, cs, plan, SCHED, np.random.default_rng(1))
        direct, _ = ddim_sample(est, ch, cs, plan, SCHED, np.random.default_rng(1))
        np.testing.assert_array_equal(via_dispatch, direct)

    def test_mode_mismatch_rejected(self, oracle_setup):
        x0, ch, cs = oracle_setup
        est = oracle_estimator(x0, SCHED)
        with pytest.raises(ValueError, match="mode"):
            ddim_sample(est, ch, cs, make_ecs_plan(1000, 100, 4), SCHED, np.random.default_rng(0))
        with pytest.raises(ValueError, match="mode"):
            ecs_sample(est, ch, cs, make_ddim_plan(1000, 25), SCHED, np.random.default_rng(0))

    def test_plan_schedule_T_mismatch(self, oracle_setup):
        x0, ch, cs = oracle_setup
        est = oracle_estimator(x0, SCHED)
        with pytest.raises(ValueError, match="T="):
            ddim_sample(est, ch, cs, make_ddim_plan(500, 25), SCHED, np.random.default_rng(0))

    def test_estimator_shape_violation(self, oracle_setup):
        _, ch, cs = oracle_setup
        bad = lambda x, c1, c2, t: np.zeros((1, 1, 1))
        plan = make_ddim_plan(1000, 25)
        with pytest.raises(ValueError, match="estimator returned"):
            ddim_sample(bad, ch, cs, plan, SCHED, np.random.default_rng(0))

    def test_estimator_nonfinite_flagged(self, oracle_setup):
        _, ch, cs = oracle_setup

        def bad(x, c1, c2, t):
            out = np.zeros_like(x)
            out[0, 0, 0] = np.inf
            return out

        with pytest.raises(NumericError, match="non-finite"):
            ecs_sample(bad, ch, cs, make_ecs_plan(1000, 100, 4), SCHED, np.random.default_rng(0))

    def test_all_bands_conditioned_rejected(self):
        cs = np.zeros((4, 4, 8))
        ch = np.zeros((4, 4, 8))
        est = lambda x, c1, c2, t: x
        with pytest.raises(ValueError, match="nothing left"):
            ddim_sample(est, ch, cs, make_ddim_plan(1000, 25), SCHED, np.random.default_rng(0))


class TestTrace:
    def test_trace_records_and_csv(self, tmp_path, oracle_setup):
        x0, ch, cs = oracle_setup
        est = oracle_estimator(x0, SCHED)
        plan = make_ecs_plan(1000, 100, 4)
        _, trace = ecs_sample(est, ch, cs, plan, SCHED, np.random.default_rng(0), keep_snapshots=True)
        ts = [t for t, _ in trace.records]
        assert ts == [1000, 900, 800, 700, 0]
        assert set(trace.snapshots) == {1000, 900, 800, 700, 0}
        out = trace.write_csv(tmp_path / "trace.csv")
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "t,mean_abs"
        assert len(lines) == 6

    def test_trace_default_no_snapshots(self):
        tr = SamplerTrace()
        tr.log(10, np.ones((2, 2)))
        assert tr.snapshots == {}
        assert tr.records == [(10, 1.0)]
