"""Run configuration: one flat dataclass, `key = value` files, env seed."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .schedule import (
    DDIM,
    DDPM_FULL,
    ECS,
    SamplingPlan,
    make_ddim_plan,
    make_ddpm_plan,
    make_ecs_plan,
    make_linear_schedule,
)
from .wavelet import default_gamma

SEED_ENV_VAR = "WAVERESTORE_SEED"


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}")


def _opt_float(s: str) -> float | None:
    return None if s.lower() in ("none", "null", "") else float(s)


_PARSERS = {
    "seed": int,
    "levels": int,
    "n_low": int,
    "gamma": _opt_float,
    "T": int,
    "beta_start": float,
    "beta_end": float,
    "mode": str,
    "ddim_steps": int,
    "ecs_stride": int,
    "ecs_evals": int,
    "width": int,
    "refiner_width": int,
    "refiner_depth": int,
    "iterations": int,
    "refiner_iterations": int,
    "batch_size": int,
    "lr": float,
    "ema_decay": _opt_float,
    "optimizer": str,
    "dataset": str,
}


@dataclass
class RunConfig:
    """Every knob a command needs; echoed into each output directory so a
    run is reproducible from the echo plus the seed."""

    seed: int = field(default_factory=default_seed)
    levels: int = 2
    n_low: int = 3
    gamma: float | None = None
    T: int = 1000
    beta_start: float = 1e-4
    beta_end: float = 0.02
    mode: str = ECS
    ddim_steps: int = 25
    ecs_stride: int = 100
    ecs_evals: int = 4
    width: int = 32
    refiner_width: int = 32
    refiner_depth: int = 3
    iterations: int = 4000
    refiner_iterations: int = 1500
    batch_size: int = 16
    lr: float = 2e-4
    ema_decay: float | None = None
    optimizer: str = "adam"
    dataset: str = ""

    def resolved_gamma(self) -> float:
        return default_gamma(self.levels) if self.gamma is None else self.gamma

    def make_schedule(self):
        return make_linear_schedule(self.T, self.beta_start, self.beta_end)

    def make_plan(self) -> SamplingPlan:
        if self.mode == ECS:
            return make_ecs_plan(self.T, self.ecs_stride, self.ecs_evals)
        if self.mode == DDIM:
            return make_ddim_plan(self.T, self.ddim_steps)
        if self.mode == DDPM_FULL:
            return make_ddpm_plan(self.T)
        raise ValueError(f"unknown sampling mode {self.mode!r}")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        cfg = cls()
        for lineno, line in enumerate(path.read_text().splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in _PARSERS:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                setattr(cfg, key, _PARSERS[key](value))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad value {value!r} for {key}")
        return cfg

    def to_file(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {'none' if v is None else v}")
        path.write_text("\n".join(lines) + "\n")
        return path

    def apply_flags(self, args, names=None) -> "RunConfig":
        """Overlay non-None argparse attributes onto this config."""
        for f in fields(self):
            if names is not None and f.name not in names:
                continue
            v = getattr(args, f.name, None)
            if v is not None:
                setattr(self, f.name, v)
        return self
