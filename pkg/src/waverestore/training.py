"""Training loops for the refiner and the conditional noise estimator."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch

from .checkpoint import Checkpoint
from .diffusion import NumericError, forward_sample, refine_loss, simple_loss
from .images import load_image, normalize
from .schedule import NoiseSchedule
from .wavelet import apply_scale, default_gamma, dwt2


@dataclass
class TrainConfig:
    iterations: int = 2000
    batch_size: int = 16
    lr: float = 2e-4
    optimizer: str = "adam"
    ema_decay: float | None = None
    seed: int = 0
    levels: int = 2
    n_low: int = 3
    gamma: float | None = None
    dataset: str = ""

    def resolved_gamma(self) -> float:
        return default_gamma(self.levels) if self.gamma is None else self.gamma

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gamma"] = self.resolved_gamma()
        return d


@dataclass
class SpectrumPairs:
    """Scaled degraded/clean spectrum stacks, (N, h, w, bands) float32."""

    degraded: np.ndarray
    clean: np.ndarray
    levels: int
    n_low: int
    gamma: float
    names: list[str] | None = None

    def __post_init__(self):
        if self.degraded.shape != self.clean.shape:
            raise ValueError(
                f"degraded {self.degraded.shape} and clean {self.clean.shape} stacks differ"
            )
        if self.degraded.ndim != 4:
            raise ValueError("spectrum stacks must be (N, h, w, bands)")
        if not 1 <= self.n_low <= self.degraded.shape[3]:
            raise ValueError(f"n_low={self.n_low} out of range for {self.degraded.shape[3]} bands")

    @property
    def n(self) -> int:
        return self.degraded.shape[0]

    @property
    def n_bands(self) -> int:
        return self.degraded.shape[3]

    @property
    def clean_low(self) -> np.ndarray:
        return self.clean[:, :, :, : self.n_low]

    @property
    def clean_high(self) -> np.ndarray:
        return self.clean[:, :, :, self.n_low :]


def _image_to_spectrum(img01, levels: int, gamma: float) -> np.ndarray:
    spec = dwt2(normalize(img01), levels)
    return apply_scale(spec, gamma).data


def pairs_from_arrays(degraded01, clean01, levels: int, n_low: int,
                      gamma: float | None = None, names=None) -> SpectrumPairs:
    """Build training spectra from matched [0, 1] image stacks."""
    from .wavelet import ImageGrid

    g = default_gamma(levels) if gamma is None else gamma
    deg = np.stack(
        [_image_to_spectrum(ImageGrid(d, (0.0, 1.0)), levels, g) for d in degraded01]
    ).astype(np.float32)
    cln = np.stack(
        [_image_to_spectrum(ImageGrid(c, (0.0, 1.0)), levels, g) for c in clean01]
    ).astype(np.float32)
    return SpectrumPairs(degraded=deg, clean=cln, levels=levels, n_low=n_low, gamma=g, names=names)


def pairs_from_manifest(manifest_path, levels: int, n_low: int,
                        gamma: float | None = None) -> SpectrumPairs:
    """Load degraded/clean pairs listed in a manifest CSV (degraded,clean)."""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise FileNotFoundError(f"manifest not found: {manifest_path}")
    base = manifest_path.parent
    deg_paths, cln_paths = [], []
    with manifest_path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"degraded", "clean"} <= set(reader.fieldnames):
            raise ValueError(f"{manifest_path}: manifest needs 'degraded' and 'clean' columns")
        for row in reader:
            deg_paths.append(base / row["degraded"])
            cln_paths.append(base / row["clean"])
    if not deg_paths:
        raise ValueError(f"{manifest_path}: manifest lists no pairs")
    deg = np.stack([load_image(p).data for p in deg_paths])
    cln = np.stack([load_image(p).data for p in cln_paths])
    return pairs_from_arrays(deg, cln, levels, n_low, gamma,
                             names=[p.name for p in deg_paths])


def _nchw(stack: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(np.ascontiguousarray(stack.transpose(0, 3, 1, 2))).float()


def _make_optimizer(net, cfg: TrainConfig):
    if cfg.optimizer == "adam":
        return torch.optim.Adam(net.parameters(), lr=cfg.lr)
    if cfg.optimizer == "sgd":
        return torch.optim.SGD(net.parameters(), lr=cfg.lr)
    raise ValueError(f"unknown optimizer {cfg.optimizer!r}; expected 'adam' or 'sgd'")


class _Ema:
    def __init__(self, net, decay: float):
        self.decay = decay
        self.shadow = {k: v.detach().clone() for k, v in net.state_dict().items()}

    def update(self, net):
        with torch.no_grad():
            for k, v in net.state_dict().items():
                self.shadow[k].mul_(self.decay).add_(v, alpha=1.0 - self.decay)

    def copy_to(self, net):
        net.load_state_dict(self.shadow)


def _check_finite(loss, it: int, what: str):
    if not torch.isfinite(loss):
        raise NumericError(f"{what} loss became non-finite at iteration {it}")


def train_refiner(net, data: SpectrumPairs, cfg: TrainConfig):
    """L1-train the high-band refiner; returns (checkpoint, loss curve)."""
    if data.n == 0:
        raise ValueError("dataset is empty")
    expected_out = data.n_bands - data.n_low
    if net.in_channels != data.n_bands or net.out_channels != expected_out:
        raise ValueError(
            f"refiner maps {net.in_channels}->{net.out_channels} channels but data "
            f"needs {data.n_bands}->{expected_out}"
        )
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    opt = _make_optimizer(net, cfg)
    ema = _Ema(net, cfg.ema_decay) if cfg.ema_decay else None
    xd = _nchw(data.degraded)
    target = _nchw(data.clean_high)
    losses = np.empty(cfg.iterations)
    net.train()
    for it in range(cfg.iterations):
        idx = rng.integers(0, data.n, size=cfg.batch_size)
        pred = net(xd[idx])
        loss = refine_loss(pred, target[idx])
        _check_finite(loss, it, "refiner")
        opt.zero_grad()
        loss.backward()
        opt.step()
        if ema:
            ema.update(net)
        losses[it] = float(loss.detach())
    if ema:
        ema.copy_to(net)
    ckpt = Checkpoint.from_net(net, schedule=None, train_config=cfg.to_dict(),
                               iteration=cfg.iterations)
    return ckpt, losses


def refine_stack(refiner, degraded: np.ndarray, chunk: int = 64) -> np.ndarray:
    """Run the (frozen) refiner over a spectrum stack, returning numpy."""
    refiner.eval()
    outs = []
    with torch.no_grad():
        for i in range(0, degraded.shape[0], chunk):
            out = refiner(_nchw(degraded[i : i + chunk]))
            outs.append(out.permute(0, 2, 3, 1).numpy())
    return np.concatenate(outs, axis=0)


def train_estimator(net, refiner_ckpt, data: SpectrumPairs, sched: NoiseSchedule,
                    cfg: TrainConfig):
    """Train the conditional noise estimator against a frozen refiner.

    refiner_ckpt may be None when every band is diffused (n_low == n_bands);
    the conditioning then carries zero refined channels.
    """
    if data.n == 0:
        raise ValueError("dataset is empty")
    if data.n_low < data.n_bands:
        if refiner_ckpt is None:
            raise ValueError("a refiner checkpoint is required when n_low < n_bands")
        rc = refiner_ckpt.train_config or {}
        for key, ours in (("levels", data.levels), ("n_low", data.n_low), ("gamma", data.gamma)):
            theirs = rc.get(key)
            if theirs is not None and not np.isclose(theirs, ours):
                raise ValueError(
                    f"refiner was trained with {key}={theirs}, estimator data uses {ours}"
                )
        refiner = refiner_ckpt.build_net()
        cond_high = refine_stack(refiner, data.degraded).astype(np.float32)
    else:
        cond_high = np.zeros(data.degraded.shape[:3] + (0,), dtype=np.float32)
    expected_in = data.n_low + cond_high.shape[3] + data.n_bands
    if net.in_channels != expected_in or net.out_channels != data.n_low:
        raise ValueError(
            f"estimator maps {net.in_channels}->{net.out_channels} channels but data "
            f"needs {expected_in}->{data.n_low}"
        )
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    opt = _make_optimizer(net, cfg)
    ema = _Ema(net, cfg.ema_decay) if cfg.ema_decay else None
    x0_low = data.clean_low.astype(np.float64)
    cond = np.concatenate([cond_high, data.degraded], axis=3)
    cond_t = _nchw(cond)
    losses = np.empty(cfg.iterations)
    net.train()
    for it in range(cfg.iterations):
        idx = rng.integers(0, data.n, size=cfg.batch_size)
        ts = rng.integers(1, sched.T + 1, size=cfg.batch_size)
        eps = rng.standard_normal((cfg.batch_size,) + x0_low.shape[1:])
        x_t = np.stack(
            [forward_sample(x0_low[i], int(t), e, sched) for i, t, e in zip(idx, ts, eps)]
        )
        inp = torch.cat([_nchw(x_t), cond_t[idx]], dim=1)
        pred = net(inp, torch.from_numpy(ts.astype(np.float32)))
        loss = simple_loss(pred, _nchw(eps))
        _check_finite(loss, it, "estimator")
        opt.zero_grad()
        loss.backward()
        opt.step()
        if ema:
            ema.update(net)
        losses[it] = float(loss.detach())
    if ema:
        ema.copy_to(net)
    ckpt = Checkpoint.from_net(net, schedule=sched, train_config=cfg.to_dict(),
                               iteration=cfg.iterations)
    return ckpt, losses


def write_loss_curve(losses, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "loss"])
        for i, v in enumerate(losses):
            w.writerow([i, f"{v:.6g}"])
    return path
