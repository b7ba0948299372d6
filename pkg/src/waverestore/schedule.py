"""Variance schedules and sampling plans.

Tables are stored with length T+1 so index t matches timestep t directly;
slot 0 holds the conventions beta=0, alpha=1, alpha_bar=1, posterior
variance 0, which makes t_prev=0 lookups fall out naturally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_T = 1000
DEFAULT_BETA_START = 1e-4
DEFAULT_BETA_END = 0.02

DDPM_FULL = "ddpm_full"
DDIM = "ddim"
ECS = "ecs"
MODES = (DDPM_FULL, DDIM, ECS)


@dataclass
class NoiseSchedule:
    """Precomputed per-step tables, each of length T+1 (index 0 is t=0).

    A plain container: the factory functions below validate their inputs,
    so tests can assemble edge-case tables directly.
    """

    T: int
    beta: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray
    posterior_variance: np.ndarray

    def __post_init__(self):
        for name in ("beta", "alpha", "alpha_bar", "posterior_variance"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (self.T + 1,):
                raise ValueError(f"{name} must have shape ({self.T + 1},), got {arr.shape}")
            setattr(self, name, arr)


def _tables_from_betas(betas: np.ndarray) -> NoiseSchedule:
    T = betas.shape[0]
    beta = np.concatenate([[0.0], betas])
    alpha = 1.0 - beta
    alpha_bar = np.cumprod(alpha)
    posterior = np.zeros(T + 1)
    # sigma_tilde^2(t) = (1 - abar_{t-1}) / (1 - abar_t) * beta_t; zero at t=1
    posterior[1:] = (1.0 - alpha_bar[:-1]) / (1.0 - alpha_bar[1:]) * beta[1:]
    return NoiseSchedule(T=T, beta=beta, alpha=alpha, alpha_bar=alpha_bar, posterior_variance=posterior)


def from_betas(betas) -> NoiseSchedule:
    """Build the full table set from a per-step beta sequence (t=1..T)."""
    betas = np.asarray(betas, dtype=np.float64)
    if betas.ndim != 1 or betas.shape[0] < 1:
        raise ValueError("betas must be a non-empty 1-d sequence")
    if np.any(betas <= 0.0) or np.any(betas >= 1.0):
        raise ValueError("betas must lie strictly inside (0, 1)")
    if np.any(np.diff(betas) < 0.0):
        raise ValueError("betas must be non-decreasing")
    return _tables_from_betas(betas)


def make_linear_schedule(
    T: int = DEFAULT_T,
    beta_start: float = DEFAULT_BETA_START,
    beta_end: float = DEFAULT_BETA_END,
) -> NoiseSchedule:
    """Linearly spaced betas from beta_start to beta_end over T steps."""
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if not 0.0 < beta_start <= beta_end < 1.0:
        raise ValueError(
            f"need 0 < beta_start <= beta_end < 1, got ({beta_start}, {beta_end})"
        )
    return _tables_from_betas(np.linspace(beta_start, beta_end, T))


def ddim_subsequence(T: int, S: int) -> np.ndarray:
    """Ascending implicit-sampling timestamps [0, T/S, 2T/S, ..., T - T/S]."""
    if S < 1:
        raise ValueError(f"S must be >= 1, got {S}")
    if T % S != 0:
        raise ValueError(f"S must divide T, got T={T}, S={S}")
    stride = T // S
    return np.arange(0, T, stride)


@dataclass(frozen=True)
class SamplingPlan:
    """A reverse-process itinerary: which timestamps are visited, how many
    estimator evaluations that costs, and how the trajectory terminates."""

    mode: str
    T: int
    stride: int
    evals: int
    truncation: int
    timestamps: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        ts = self.timestamps
        if not ts or ts[0] != self.T:
            raise ValueError("timestamps must start at T")
        if any(b >= a for a, b in zip(ts, ts[1:])):
            raise ValueError("timestamps must be strictly decreasing")


def make_ddpm_plan(T: int = DEFAULT_T) -> SamplingPlan:
    """Full ancestral reverse pass: T stochastic steps, T evaluations."""
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    return SamplingPlan(
        mode=DDPM_FULL,
        T=T,
        stride=1,
        evals=T,
        truncation=0,
        timestamps=tuple(range(T, -1, -1)),
    )


def make_ddim_plan(T: int, S: int) -> SamplingPlan:
    """Deterministic implicit sampling over an S-point subsequence down to 0."""
    sub = ddim_subsequence(T, S)
    ts = (T,) + tuple(int(t) for t in sub[::-1])
    return SamplingPlan(mode=DDIM, T=T, stride=T // S, evals=S, truncation=0, timestamps=ts)


def make_ecs_plan(T: int, stride: int, evals: int) -> SamplingPlan:
    """Truncated implicit sampling: evals-1 strided deterministic steps from T
    down to M = T - (evals-1)*stride, then one direct clean-signal prediction
    at M.  Exactly `evals` estimator calls."""
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if T % stride != 0:
        raise ValueError(f"stride must divide T, got T={T}, stride={stride}")
    if evals < 1:
        raise ValueError(f"evals must be >= 1, got {evals}")
    truncation = T - (evals - 1) * stride
    if truncation < 1:
        raise ValueError(
            f"evals={evals} at stride={stride} walks past t=1 "
            f"(truncation point {truncation}); use a full implicit plan instead"
        )
    ts = tuple(range(T, truncation - 1, -stride))
    return SamplingPlan(mode=ECS, T=T, stride=stride, evals=evals, truncation=truncation, timestamps=ts)
