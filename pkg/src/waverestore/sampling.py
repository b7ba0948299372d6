"""Reverse-process steps and sampling loops.

An estimator is any callable (x_t_low, cond_high, cond_spectrum, t) ->
predicted noise with the same shape as x_t_low.  The loops count every
estimator call and enforce the budget promised by the plan.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .diffusion import NumericError, _noise_values
from .schedule import DDIM, DDPM_FULL, ECS, NoiseSchedule, SamplingPlan


@dataclass
class SamplerTrace:
    """Per-step records (t, mean |x|) plus optional state snapshots."""

    records: list[tuple[int, float]] = field(default_factory=list)
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)
    eval_count: int = 0

    def log(self, t: int, x: np.ndarray, keep_snapshot: bool = False):
        self.records.append((int(t), float(np.mean(np.abs(x)))))
        if keep_snapshot:
            self.snapshots[int(t)] = np.array(x, copy=True)

    def write_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "mean_abs"])
            for t, m in self.records:
                w.writerow([t, f"{m:.9g}"])
        return path


def _check_step_t(t: int, sched: NoiseSchedule):
    if not 1 <= t <= sched.T:
        raise ValueError(f"t must be in [1, {sched.T}], got {t}")


def predict_x0(x_t, eps_pred, t: int, sched: NoiseSchedule):
    """Invert the closed-form forward map under the predicted noise:
    (x_t - sqrt(1 - abar_t) eps) / sqrt(abar_t)."""
    _check_step_t(t, sched)
    ab = sched.alpha_bar[t]
    return (np.asarray(x_t) - np.sqrt(1.0 - ab) * np.asarray(eps_pred)) / np.sqrt(ab)


def ddpm_ancestral_step(x_t, eps_pred, t: int, z, sched: NoiseSchedule):
    """One stochastic reverse step t -> t-1.

    Mean is (x_t - beta_t / sqrt(1 - abar_t) * eps) / sqrt(alpha_t); noise
    scale is the posterior sigma, forced to zero at t=1 (the table already
    holds 0 there, and z is ignored entirely).
    """
    _check_step_t(t, sched)
    x_t = np.asarray(x_t)
    b = sched.beta[t]
    ab = sched.alpha_bar[t]
    mean = (x_t - b / np.sqrt(1.0 - ab) * np.asarray(eps_pred)) / np.sqrt(sched.alpha[t])
    if t == 1:
        return mean
    sigma = np.sqrt(sched.posterior_variance[t])
    return mean + sigma * _noise_values(z)


def ddim_step(x_t, eps_pred, t: int, t_prev: int, sched: NoiseSchedule):
    """Deterministic implicit step t -> t_prev (t_prev may be 0)."""
    _check_step_t(t, sched)
    if not 0 <= t_prev < t:
        raise ValueError(f"need 0 <= t_prev < t, got t_prev={t_prev}, t={t}")
    ab_prev = sched.alpha_bar[t_prev]
    x0_hat = predict_x0(x_t, eps_pred, t, sched)
    return np.sqrt(ab_prev) * x0_hat + np.sqrt(1.0 - ab_prev) * np.asarray(eps_pred)


def sigma_family_step(x_t, eps_pred, t: int, t_prev: int, sigma: float, z, sched: NoiseSchedule):
    """Generalized implicit step with injected noise scale sigma.

    sigma=0 recovers the deterministic step; sigma=sqrt(posterior variance)
    with t_prev=t-1 recovers the ancestral step.
    """
    _check_step_t(t, sched)
    if not 0 <= t_prev < t:
        raise ValueError(f"need 0 <= t_prev < t, got t_prev={t_prev}, t={t}")
    ab_prev = sched.alpha_bar[t_prev]
    var = 1.0 - ab_prev - sigma ** 2
    if var < -1e-12:
        raise ValueError(f"sigma={sigma} exceeds the available variance at t_prev={t_prev}")
    x0_hat = predict_x0(x_t, eps_pred, t, sched)
    out = np.sqrt(ab_prev) * x0_hat + np.sqrt(max(var, 0.0)) * np.asarray(eps_pred)
    if sigma > 0.0:
        out = out + sigma * _noise_values(z)
    return out


def _init_state(cond_high, cond_spectrum, rng):
    h, w, total = cond_spectrum.shape
    n_low = total - cond_high.shape[2]
    if n_low < 1:
        raise ValueError(
            f"conditioner covers {cond_high.shape[2]} of {total} bands; nothing left to sample"
        )
    return rng.standard_normal((h, w, n_low))


def _call_estimator(est, x, cond_high, cond_spectrum, t, trace):
    eps = est(x, cond_high, cond_spectrum, t)
    eps = np.asarray(eps)
    if eps.shape != x.shape:
        raise ValueError(f"estimator returned shape {eps.shape}, expected {x.shape}")
    if not np.all(np.isfinite(eps)):
        raise NumericError(f"estimator produced non-finite values at t={t}")
    trace.eval_count += 1
    return eps


def ddim_sample(est, cond_high, cond_spectrum, plan: SamplingPlan, sched: NoiseSchedule,
                rng: np.random.Generator, keep_snapshots: bool = False):
    """Deterministic implicit sampling along plan.timestamps down to 0."""
    if plan.mode != DDIM:
        raise ValueError(f"plan mode is {plan.mode!r}, expected {DDIM!r}")
    _check_plan_compat(plan, sched)
    trace = SamplerTrace()
    x = _init_state(cond_high, cond_spectrum, rng)
    trace.log(plan.T, x, keep_snapshots)
    for t, t_prev in zip(plan.timestamps, plan.timestamps[1:]):
        eps = _call_estimator(est, x, cond_high, cond_spectrum, t, trace)
        x = ddim_step(x, eps, t, t_prev, sched)
        trace.log(t_prev, x, keep_snapshots)
    assert trace.eval_count == plan.evals
    return x, trace


def ecs_sample(est, cond_high, cond_spectrum, plan: SamplingPlan, sched: NoiseSchedule,
               rng: np.random.Generator, keep_snapshots: bool = False):
    """Truncated implicit sampling: strided deterministic steps from T down to
    the truncation point, then one direct clean-signal prediction there."""
    if plan.mode != ECS:
        raise ValueError(f"plan mode is {plan.mode!r}, expected {ECS!r}")
    _check_plan_compat(plan, sched)
    trace = SamplerTrace()
    x = _init_state(cond_high, cond_spectrum, rng)
    trace.log(plan.T, x, keep_snapshots)
    for t, t_prev in zip(plan.timestamps, plan.timestamps[1:]):
        eps = _call_estimator(est, x, cond_high, cond_spectrum, t, trace)
        x = ddim_step(x, eps, t, t_prev, sched)
        trace.log(t_prev, x, keep_snapshots)
    t_stop = plan.timestamps[-1]
    eps = _call_estimator(est, x, cond_high, cond_spectrum, t_stop, trace)
    x0 = predict_x0(x, eps, t_stop, sched)
    trace.log(0, x0, keep_snapshots)
    assert trace.eval_count == plan.evals
    return x0, trace


def ddpm_sample(est, cond_high, cond_spectrum, plan: SamplingPlan, sched: NoiseSchedule,
                rng: np.random.Generator, keep_snapshots: bool = False):
    """Full stochastic ancestral pass from T down to 0."""
    if plan.mode != DDPM_FULL:
        raise ValueError(f"plan mode is {plan.mode!r}, expected {DDPM_FULL!r}")
    _check_plan_compat(plan, sched)
    trace = SamplerTrace()
    x = _init_state(cond_high, cond_spectrum, rng)
    trace.log(plan.T, x, keep_snapshots)
    for t in range(plan.T, 0, -1):
        eps = _call_estimator(est, x, cond_high, cond_spectrum, t, trace)
        z = rng.standard_normal(x.shape) if t > 1 else 0.0
        x = ddpm_ancestral_step(x, eps, t, z, sched)
        trace.log(t - 1, x, keep_snapshots)
    assert trace.eval_count == plan.evals
    return x, trace


def sample(est, cond_high, cond_spectrum, plan: SamplingPlan, sched: NoiseSchedule,
           rng: np.random.Generator, keep_snapshots: bool = False):
    """Dispatch on plan.mode."""
    runner = {DDIM: ddim_sample, ECS: ecs_sample, DDPM_FULL: ddpm_sample}[plan.mode]
    return runner(est, cond_high, cond_spectrum, plan, sched, rng, keep_snapshots)


def _check_plan_compat(plan: SamplingPlan, sched: NoiseSchedule):
    if plan.T != sched.T:
        raise ValueError(f"plan built for T={plan.T} but schedule has T={sched.T}")
