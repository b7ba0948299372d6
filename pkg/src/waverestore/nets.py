"""Networks: the conditional noise estimator and the high-band refiner.

Arrays cross the numpy/torch boundary only through the functional wrappers
at the bottom, which take and return (H, W, C) float arrays; everything
torch-side is NCHW float32.
"""

from __future__ import annotations

import math

import numpy as np
import torch
from torch import nn


def _norm(channels: int) -> nn.GroupNorm:
    groups = 8 if channels % 8 == 0 else 1
    return nn.GroupNorm(groups, channels)


class SinusoidalTimeEmbedding(nn.Module):
    """Classic sin/cos positional features of the scalar timestep."""

    def __init__(self, dim: int):
        super().__init__()
        if dim % 2 != 0:
            raise ValueError(f"embedding dim must be even, got {dim}")
        self.dim = dim

    def forward(self, t: torch.Tensor) -> torch.Tensor:
        half = self.dim // 2
        freqs = torch.exp(
            -math.log(10000.0) * torch.arange(half, dtype=torch.float32, device=t.device) / max(half - 1, 1)
        ).to(t.dtype if t.is_floating_point() else torch.float32)
        args = t.float()[:, None] * freqs[None, :]
        return torch.cat([torch.sin(args), torch.cos(args)], dim=1)


class ResidualBlock(nn.Module):
    """GroupNorm conv block with an additive timestep projection."""

    def __init__(self, in_ch: int, out_ch: int, emb_dim: int):
        super().__init__()
        self.norm1 = _norm(in_ch)
        self.conv1 = nn.Conv2d(in_ch, out_ch, 3, padding=1)
        self.emb_proj = nn.Linear(emb_dim, out_ch)
        self.norm2 = _norm(out_ch)
        self.conv2 = nn.Conv2d(out_ch, out_ch, 3, padding=1)
        self.skip = nn.Conv2d(in_ch, out_ch, 1) if in_ch != out_ch else nn.Identity()

    def forward(self, x: torch.Tensor, emb: torch.Tensor) -> torch.Tensor:
        h = self.conv1(torch.nn.functional.silu(self.norm1(x)))
        h = h + self.emb_proj(torch.nn.functional.silu(emb))[:, :, None, None]
        h = self.conv2(torch.nn.functional.silu(self.norm2(h)))
        return h + self.skip(x)


class NoiseEstimator(nn.Module):
    """Small conditional U-Net over packed spectra.

    Input channels carry [sampled low bands | refined high bands | full
    degraded spectrum]; output channels predict the noise on the low bands
    only.  Two stride-2 stages, so spatial dims must be divisible by 4... or
    rather survive two halvings (1x1 maps are fine).
    """

    def __init__(self, in_channels: int = 96, out_channels: int = 3, base_width: int = 32):
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.base_width = base_width
        w = base_width
        emb_dim = 4 * w
        self.time_mlp = nn.Sequential(
            SinusoidalTimeEmbedding(w),
            nn.Linear(w, emb_dim),
            nn.SiLU(),
            nn.Linear(emb_dim, emb_dim),
        )
        self.stem = nn.Conv2d(in_channels, w, 3, padding=1)
        self.enc1 = ResidualBlock(w, w, emb_dim)
        self.down1 = nn.Conv2d(w, w, 3, stride=2, padding=1)
        self.enc2 = ResidualBlock(w, 2 * w, emb_dim)
        self.down2 = nn.Conv2d(2 * w, 2 * w, 3, stride=2, padding=1)
        self.mid = ResidualBlock(2 * w, 2 * w, emb_dim)
        self.up2 = nn.ConvTranspose2d(2 * w, 2 * w, 4, stride=2, padding=1)
        self.dec2 = ResidualBlock(4 * w, w, emb_dim)
        self.up1 = nn.ConvTranspose2d(w, w, 4, stride=2, padding=1)
        self.dec1 = ResidualBlock(2 * w, w, emb_dim)
        self.out_norm = _norm(w)
        self.out_conv = nn.Conv2d(w, out_channels, 3, padding=1)

    def forward(self, x: torch.Tensor, t: torch.Tensor) -> torch.Tensor:
        if x.shape[1] != self.in_channels:
            raise ValueError(f"expected {self.in_channels} input channels, got {x.shape[1]}")
        emb = self.time_mlp(t)
        h0 = self.stem(x)
        h1 = self.enc1(h0, emb)
        h2 = self.enc2(self.down1(h1), emb)
        m = self.mid(self.down2(h2), emb)
        u2 = self.dec2(torch.cat([self.up2(m), h2], dim=1), emb)
        u1 = self.dec1(torch.cat([self.up1(u2), h1], dim=1), emb)
        return self.out_conv(torch.nn.functional.silu(self.out_norm(u1)))

    def arch(self) -> dict:
        return {
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
            "base_width": self.base_width,
        }


class PlainBlock(nn.Module):
    def __init__(self, width: int):
        super().__init__()
        self.conv1 = nn.Conv2d(width, width, 3, padding=1)
        self.conv2 = nn.Conv2d(width, width, 3, padding=1)

    def forward(self, x):
        return x + self.conv2(torch.relu(self.conv1(x)))


class HighBandRefiner(nn.Module):
    """Time-independent map from the degraded spectrum to clean high bands."""

    def __init__(self, in_channels: int = 48, out_channels: int = 45, width: int = 32, depth: int = 3):
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.width = width
        self.depth = depth
        self.stem = nn.Conv2d(in_channels, width, 3, padding=1)
        self.blocks = nn.ModuleList([PlainBlock(width) for _ in range(depth)])
        self.tail = nn.Conv2d(width, out_channels, 3, padding=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[1] != self.in_channels:
            raise ValueError(f"expected {self.in_channels} input channels, got {x.shape[1]}")
        h = torch.relu(self.stem(x))
        for blk in self.blocks:
            h = blk(h)
        return self.tail(h)

    def arch(self) -> dict:
        return {
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
            "width": self.width,
            "depth": self.depth,
        }


def _to_torch(*arrays) -> torch.Tensor:
    """Stack (H, W, C) arrays channel-wise into a (1, C_total, H, W) tensor."""
    cat = np.concatenate([np.asarray(a) for a in arrays], axis=2)
    return torch.from_numpy(np.ascontiguousarray(cat.transpose(2, 0, 1))[None]).float()


def _to_numpy(x: torch.Tensor) -> np.ndarray:
    return x.detach()[0].permute(1, 2, 0).numpy().astype(np.float64)


def estimator_forward(net: NoiseEstimator, x_t_low, cond_high, cond_spectrum, t: int) -> np.ndarray:
    """One conditioned noise prediction on numpy arrays."""
    x_t_low = np.asarray(x_t_low)
    total = x_t_low.shape[2] + np.asarray(cond_high).shape[2] + np.asarray(cond_spectrum).shape[2]
    if total != net.in_channels:
        raise ValueError(
            f"conditioning stack has {total} channels, estimator expects {net.in_channels}"
        )
    if x_t_low.shape[2] != net.out_channels:
        raise ValueError(
            f"sampled bands have {x_t_low.shape[2]} channels, estimator predicts {net.out_channels}"
        )
    net.eval()
    with torch.no_grad():
        out = net(_to_torch(x_t_low, cond_high, cond_spectrum), torch.tensor([float(t)]))
    return _to_numpy(out)


def hfrm_forward(net: HighBandRefiner, cond_spectrum) -> np.ndarray:
    """One high-band refinement pass on a numpy spectrum."""
    cond_spectrum = np.asarray(cond_spectrum)
    if cond_spectrum.shape[2] != net.in_channels:
        raise ValueError(
            f"spectrum has {cond_spectrum.shape[2]} bands, refiner expects {net.in_channels}"
        )
    net.eval()
    with torch.no_grad():
        out = net(_to_torch(cond_spectrum))
    return _to_numpy(out)


class TorchEstimator:
    """Adapter giving a NoiseEstimator the sampling-loop calling convention."""

    def __init__(self, net: NoiseEstimator):
        self.net = net

    def __call__(self, x_t_low, cond_high, cond_spectrum, t):
        return estimator_forward(self.net, x_t_low, cond_high, cond_spectrum, t)
