"""Orthonormal Haar analysis/synthesis with uniform band packing.

A multi-level 2-D Haar transform of an (H, W, C) image is stored as a single
(H/2^L, W/2^L, C*4^L) stack of equal-sized bands.  The deepest approximation
(LL) occupies the first C bands; detail bands from shallower levels are
space-to-depth packed down to the same spatial size, so one array holds the
whole pyramid and channel-wise ops apply uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SUBBANDS = ("LL", "LH", "HL", "HH")

_INV_SQRT2 = 0.5 ** 0.5


@dataclass
class ImageGrid:
    """An (H, W, C) float image plus the value range its pixels live in.

    The range is declared, not enforced: restored images may spill slightly
    outside it before quantization.
    """

    data: np.ndarray
    value_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 3:
            raise ValueError(f"image data must be (H, W, C), got shape {self.data.shape}")
        if not np.issubdtype(self.data.dtype, np.floating):
            self.data = self.data.astype(np.float64)
        if not np.all(np.isfinite(self.data)):
            raise ValueError("image data contains non-finite values")
        lo, hi = self.value_range
        if not lo < hi:
            raise ValueError(f"value_range must have lo < hi, got {self.value_range}")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class BandLayout:
    """Names the bands of a packed spectrum, in storage order.

    Each entry is (level, subband, channel).  Level 1 holds the finest
    details (first analysis step); level `levels` is the deepest, where the
    LL group lives.  Detail triples from level ell appear 4^(levels-ell)
    times because space-to-depth packing splits one band of side
    2^(levels-ell) * base into that many base-sized polyphase bands.
    """

    levels: int
    source_channels: int
    ordering: tuple[tuple[int, str, int], ...] = field(default=())

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        if self.source_channels < 1:
            raise ValueError(f"source_channels must be >= 1, got {self.source_channels}")
        if not self.ordering:
            object.__setattr__(self, "ordering", self._canonical_ordering())

    def _canonical_ordering(self) -> tuple[tuple[int, str, int], ...]:
        # Deepest LL group first, then detail groups deepest-to-finest.
        # Each group is [LH(all ch), HL(all ch), HH(all ch)] with every
        # triple repeated once per polyphase sub-band of the packing.
        order = [(self.levels, "LL", c) for c in range(self.source_channels)]
        for lv in range(self.levels, 0, -1):
            repeat = 4 ** (self.levels - lv)
            for sb in ("LH", "HL", "HH"):
                for c in range(self.source_channels):
                    order.extend([(lv, sb, c)] * repeat)
        return tuple(order)

    @property
    def n_bands(self) -> int:
        return self.source_channels * 4 ** self.levels

    def band_indices(self, subband: str | None = None, level: int | None = None) -> np.ndarray:
        """Indices of bands matching the given subband and/or level."""
        hits = [
            i
            for i, (lv, sb, _c) in enumerate(self.ordering)
            if (subband is None or sb == subband) and (level is None or lv == level)
        ]
        return np.asarray(hits, dtype=np.intp)


@dataclass
class WaveletSpectrum:
    """Packed multi-level spectrum: (bands_height, bands_width, n_bands)."""

    layout: BandLayout
    data: np.ndarray
    scale_applied: float = 1.0
    source_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 3:
            raise ValueError(f"spectrum data must be 3-d, got shape {self.data.shape}")
        if self.data.shape[2] != self.layout.n_bands:
            raise ValueError(
                f"spectrum has {self.data.shape[2]} bands but layout "
                f"(levels={self.layout.levels}, channels={self.layout.source_channels}) "
                f"requires {self.layout.n_bands}"
            )

    @property
    def bands_height(self) -> int:
        return self.data.shape[0]

    @property
    def bands_width(self) -> int:
        return self.data.shape[1]

    @property
    def n_bands(self) -> int:
        return self.data.shape[2]

    def energy(self) -> float:
        return float(np.sum(self.data.astype(np.float64) ** 2))


@dataclass
class SpectrumSplit:
    """A spectrum partitioned into the first n_low bands and the rest."""

    layout: BandLayout
    low: np.ndarray
    high: np.ndarray
    scale_applied: float = 1.0
    source_range: tuple[float, float] = (0.0, 1.0)

    @property
    def n_low(self) -> int:
        return self.low.shape[2]


def _analyze_one_level(arr: np.ndarray) -> np.ndarray:
    """One separable Haar step: (H, W, C) -> (H/2, W/2, 4C) as [LL|LH|HL|HH].

    Rows first (along width), then columns (along height).  LH carries the
    horizontal high-pass (along rows), HL the vertical one.
    """
    lo_w = (arr[:, 0::2, :] + arr[:, 1::2, :]) * _INV_SQRT2
    hi_w = (arr[:, 0::2, :] - arr[:, 1::2, :]) * _INV_SQRT2
    ll = (lo_w[0::2, :, :] + lo_w[1::2, :, :]) * _INV_SQRT2
    hl = (lo_w[0::2, :, :] - lo_w[1::2, :, :]) * _INV_SQRT2
    lh = (hi_w[0::2, :, :] + hi_w[1::2, :, :]) * _INV_SQRT2
    hh = (hi_w[0::2, :, :] - hi_w[1::2, :, :]) * _INV_SQRT2
    return np.concatenate([ll, lh, hl, hh], axis=2)


def _synthesize_one_level(stack: np.ndarray) -> np.ndarray:
    """Inverse of _analyze_one_level: (h, w, 4C) -> (2h, 2w, C)."""
    h, w, four_c = stack.shape
    c = four_c // 4
    ll, lh, hl, hh = (stack[:, :, i * c : (i + 1) * c] for i in range(4))
    lo_w = np.empty((2 * h, w, c), dtype=stack.dtype)
    hi_w = np.empty((2 * h, w, c), dtype=stack.dtype)
    lo_w[0::2] = (ll + hl) * _INV_SQRT2
    lo_w[1::2] = (ll - hl) * _INV_SQRT2
    hi_w[0::2] = (lh + hh) * _INV_SQRT2
    hi_w[1::2] = (lh - hh) * _INV_SQRT2
    out = np.empty((2 * h, 2 * w, c), dtype=stack.dtype)
    out[:, 0::2, :] = (lo_w + hi_w) * _INV_SQRT2
    out[:, 1::2, :] = (lo_w - hi_w) * _INV_SQRT2
    return out


def _space_to_depth(stack: np.ndarray) -> np.ndarray:
    """(h, w, b) -> (h/2, w/2, 4b); each band splits into its 4 polyphase
    sub-bands, kept adjacent in row-major phase order (0,0),(0,1),(1,0),(1,1)."""
    h, w, b = stack.shape
    phases = np.stack(
        [stack[0::2, 0::2, :], stack[0::2, 1::2, :], stack[1::2, 0::2, :], stack[1::2, 1::2, :]],
        axis=3,
    )
    return phases.reshape(h // 2, w // 2, 4 * b)


def _depth_to_space(stack: np.ndarray) -> np.ndarray:
    """Inverse of _space_to_depth: (h, w, 4b) -> (2h, 2w, b)."""
    h, w, four_b = stack.shape
    b = four_b // 4
    phases = stack.reshape(h, w, b, 4)
    out = np.empty((2 * h, 2 * w, b), dtype=stack.dtype)
    out[0::2, 0::2, :] = phases[:, :, :, 0]
    out[0::2, 1::2, :] = phases[:, :, :, 1]
    out[1::2, 0::2, :] = phases[:, :, :, 2]
    out[1::2, 1::2, :] = phases[:, :, :, 3]
    return out


def _analyze(arr: np.ndarray, levels: int) -> np.ndarray:
    c = arr.shape[2]
    stack = _analyze_one_level(arr)
    if levels == 1:
        return stack
    deeper = _analyze(stack[:, :, :c], levels - 1)
    details = stack[:, :, c:]
    for _ in range(levels - 1):
        details = _space_to_depth(details)
    return np.concatenate([deeper, details], axis=2)


def _synthesize(stack: np.ndarray, levels: int, c: int) -> np.ndarray:
    if levels == 1:
        return _synthesize_one_level(stack)
    n_deep = c * 4 ** (levels - 1)
    ll = _synthesize(stack[:, :, :n_deep], levels - 1, c)
    details = stack[:, :, n_deep:]
    for _ in range(levels - 1):
        details = _depth_to_space(details)
    return _synthesize_one_level(np.concatenate([ll, details], axis=2))


def dwt2(image: ImageGrid, levels: int) -> WaveletSpectrum:
    """Multi-level orthonormal Haar transform into a packed spectrum."""
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    h, w, c = image.data.shape
    div = 2 ** levels
    if h % div != 0:
        raise ValueError(f"height {h} is not divisible by {div} (levels={levels})")
    if w % div != 0:
        raise ValueError(f"width {w} is not divisible by {div} (levels={levels})")
    return WaveletSpectrum(
        layout=BandLayout(levels=levels, source_channels=c),
        data=_analyze(image.data, levels),
        scale_applied=1.0,
        source_range=image.value_range,
    )


def idwt2(spectrum: WaveletSpectrum) -> ImageGrid:
    """Exact inverse of dwt2.

    Synthesizes whatever coefficients it is given; callers that applied a
    spectrum scale are expected to undo it first.
    """
    lay = spectrum.layout
    arr = _synthesize(spectrum.data, lay.levels, lay.source_channels)
    return ImageGrid(data=arr, value_range=spectrum.source_range)


def split_spectrum(spectrum: WaveletSpectrum, n_low: int) -> SpectrumSplit:
    """Partition the band stack into [:n_low] and [n_low:]."""
    if not 1 <= n_low <= spectrum.n_bands:
        raise ValueError(f"n_low must be in [1, {spectrum.n_bands}], got {n_low}")
    return SpectrumSplit(
        layout=spectrum.layout,
        low=spectrum.data[:, :, :n_low],
        high=spectrum.data[:, :, n_low:],
        scale_applied=spectrum.scale_applied,
        source_range=spectrum.source_range,
    )


def merge_spectrum(split: SpectrumSplit) -> WaveletSpectrum:
    """Reassemble a split back into a full spectrum (inverse of split_spectrum)."""
    data = np.concatenate([split.low, split.high], axis=2)
    return WaveletSpectrum(
        layout=split.layout,
        data=data,
        scale_applied=split.scale_applied,
        source_range=split.source_range,
    )


def apply_scale(spectrum: WaveletSpectrum, gamma: float) -> WaveletSpectrum:
    """Multiply all coefficients by gamma, tracking the cumulative factor."""
    if gamma == 0:
        raise ValueError("scale factor must be non-zero")
    return WaveletSpectrum(
        layout=spectrum.layout,
        data=spectrum.data * gamma,
        scale_applied=spectrum.scale_applied * gamma,
        source_range=spectrum.source_range,
    )


def default_gamma(levels: int) -> float:
    """Spectrum scale that keeps deep-LL coefficients in the signal range.

    Each analysis level grows the LL magnitude by 2, so 2^-levels undoes it.
    """
    return 2.0 ** (-levels)
