"""Fidelity metrics on float images."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

PSNR_CAP_DB = 100.0
_SSIM_WIN = 11
_SSIM_SIGMA = 1.5


def _as_array(x) -> np.ndarray:
    return np.asarray(getattr(x, "data", x), dtype=np.float64)


def psnr(a, b, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB, capped at 100 for (near-)identical pairs."""
    a = _as_array(a)
    b = _as_array(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * np.log10(peak ** 2 / mse), PSNR_CAP_DB)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    r = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(r ** 2) / (2.0 * sigma ** 2))
    k = np.outer(g, g)
    return k / k.sum()


def _ssim_channel(x: np.ndarray, y: np.ndarray, peak: float) -> float:
    win = _gaussian_window(_SSIM_WIN, _SSIM_SIGMA)
    filt = lambda arr: ndimage.correlate(arr, win, mode="reflect")
    mu_x = filt(x)
    mu_y = filt(y)
    # raw second moments; no small-sample covariance correction
    var_x = filt(x * x) - mu_x ** 2
    var_y = filt(y * y) - mu_y ** 2
    cov = filt(x * y) - mu_x * mu_y
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x ** 2 + mu_y ** 2 + c1) * (var_x + var_y + c2)
    smap = num / den
    pad = _SSIM_WIN // 2
    return float(np.mean(smap[pad:-pad, pad:-pad]))


def ssim(a, b, peak: float = 1.0) -> float:
    """Mean structural similarity (11x11 gaussian window, sigma 1.5),
    computed per channel and averaged."""
    a = _as_array(a)
    b = _as_array(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.ndim == 2:
        a = a[:, :, None]
        b = b[:, :, None]
    if min(a.shape[0], a.shape[1]) < _SSIM_WIN:
        raise ValueError(
            f"image {a.shape[0]}x{a.shape[1]} is smaller than the {_SSIM_WIN}x{_SSIM_WIN} window"
        )
    return float(np.mean([_ssim_channel(a[:, :, c], b[:, :, c], peak) for c in range(a.shape[2])]))
