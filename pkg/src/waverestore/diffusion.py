"""Forward noising process and training losses.

Losses are written against the array protocol only (shape, arithmetic,
mean), so the same functions serve numpy arrays in tests and torch tensors
inside training loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .schedule import NoiseSchedule


class NumericError(RuntimeError):
    """A computation produced non-finite values; carries where and what."""


@dataclass
class NoiseDraw:
    """A unit-normal draw plus a note on which stream produced it."""

    values: np.ndarray
    lineage: str = ""


def draw_noise(shape, rng: np.random.Generator, lineage: str = "") -> NoiseDraw:
    return NoiseDraw(values=rng.standard_normal(shape), lineage=lineage)


def _noise_values(eps):
    return eps.values if isinstance(eps, NoiseDraw) else np.asarray(eps)


def _check_t(t: int, sched: NoiseSchedule):
    if not 1 <= t <= sched.T:
        raise ValueError(f"t must be in [1, {sched.T}], got {t}")


def forward_sample(x0, t: int, eps, sched: NoiseSchedule):
    """Closed-form jump to step t: sqrt(abar_t) x0 + sqrt(1 - abar_t) eps."""
    _check_t(t, sched)
    x0 = np.asarray(x0)
    e = _noise_values(eps)
    if e.shape != x0.shape:
        raise ValueError(f"noise shape {e.shape} does not match signal shape {x0.shape}")
    ab = sched.alpha_bar[t]
    return np.sqrt(ab) * x0 + np.sqrt(1.0 - ab) * e


def forward_chain_step(x_prev, t: int, z, sched: NoiseSchedule):
    """Single forward step t-1 -> t: sqrt(1 - beta_t) x_{t-1} + sqrt(beta_t) z."""
    _check_t(t, sched)
    x_prev = np.asarray(x_prev)
    zv = _noise_values(z)
    if zv.shape != x_prev.shape:
        raise ValueError(f"noise shape {zv.shape} does not match signal shape {x_prev.shape}")
    b = sched.beta[t]
    return np.sqrt(1.0 - b) * x_prev + np.sqrt(b) * zv


def simple_loss(pred, target):
    """Mean squared error between predicted and true noise (mean reduction)."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    d = pred - target
    return (d * d).mean()


def refine_loss(pred, target):
    """Mean absolute error for the high-band refiner (mean reduction)."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    return abs(pred - target).mean()
