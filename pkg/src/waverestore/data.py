"""Synthetic texture generation and deterministic degradations.

Everything here is seeded through numpy SeedSequence spawns keyed on
(seed, image index), so regenerating a dataset is byte-identical.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .images import load_image, save_image
from .wavelet import ImageGrid

GAUSSIAN_NOISE = "gaussian_noise"
BOX_BLUR = "box_blur"
OCCLUSION_DROPS = "occlusion_drops"
DEGRADATION_KINDS = (GAUSSIAN_NOISE, BOX_BLUR, OCCLUSION_DROPS)


@dataclass
class DegradationSpec:
    kind: str
    sigma: float = 25.0 / 255.0
    radius: int = 2
    count: int = 8
    opacity: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DEGRADATION_KINDS:
            raise ValueError(f"kind must be one of {DEGRADATION_KINDS}, got {self.kind!r}")
        if self.kind == GAUSSIAN_NOISE and not 0.0 < self.sigma <= 1.0:
            raise ValueError(f"sigma must be in (0, 1], got {self.sigma}")
        if self.kind == BOX_BLUR and self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")
        if self.kind == OCCLUSION_DROPS:
            if self.count < 1:
                raise ValueError(f"count must be >= 1, got {self.count}")
            if self.radius < 1:
                raise ValueError(f"radius must be >= 1, got {self.radius}")
            if not 0.0 < self.opacity <= 1.0:
                raise ValueError(f"opacity must be in (0, 1], got {self.opacity}")


def degrade(img01: np.ndarray, spec: DegradationSpec, rng: np.random.Generator) -> np.ndarray:
    """Apply one degradation to a [0, 1] image; output stays in [0, 1]."""
    img01 = np.asarray(img01, dtype=np.float64)
    if spec.kind == GAUSSIAN_NOISE:
        return np.clip(img01 + rng.normal(0.0, spec.sigma, img01.shape), 0.0, 1.0)
    if spec.kind == BOX_BLUR:
        size = 2 * spec.radius + 1
        return ndimage.uniform_filter(img01, size=(size, size, 1), mode="reflect")
    # occlusion drops: translucent bright discs with a soft 1px edge
    h, w, _ = img01.shape
    out = img01.copy()
    yy, xx = np.mgrid[0:h, 0:w]
    for _ in range(spec.count):
        cy = rng.uniform(0, h)
        cx = rng.uniform(0, w)
        tint = rng.uniform(0.7, 0.95, size=3)
        dist = np.sqrt((yy - cy) ** 2 + (xx - cx) ** 2)
        mask = np.clip(spec.radius - dist + 1.0, 0.0, 1.0) * spec.opacity
        out = out * (1.0 - mask[:, :, None]) + tint[None, None, :] * mask[:, :, None]
    return np.clip(out, 0.0, 1.0)


def _one_texture(size: int, channels: int, rng: np.random.Generator) -> np.ndarray:
    # smooth random field shared across channels, per-channel affine color,
    # a sinusoidal grating, and a couple of soft geometric inserts
    field = ndimage.gaussian_filter(rng.normal(size=(size, size)), rng.uniform(1.5, 5.0))
    img = np.empty((size, size, channels))
    for c in range(channels):
        img[:, :, c] = rng.uniform(0.4, 1.6) * field + rng.uniform(-0.3, 0.3)
    yy, xx = np.mgrid[0:size, 0:size] / size
    fx, fy = rng.uniform(1.0, 6.0, size=2)
    phase = rng.uniform(0, 2 * np.pi)
    grating = np.sin(2 * np.pi * (fx * xx + fy * yy) + phase)
    img += rng.uniform(0.1, 0.5) * grating[:, :, None]
    for _ in range(rng.integers(1, 4)):
        cy, cx = rng.uniform(0, size, size=2)
        r = rng.uniform(size / 8, size / 3)
        blob = np.clip(1.0 - np.sqrt((yy * size - cy) ** 2 + (xx * size - cx) ** 2) / r, 0, 1)
        img += rng.uniform(-0.6, 0.6) * blob[:, :, None]
    lo, hi = img.min(), img.max()
    if hi - lo < 1e-9:
        return np.full_like(img, 0.5)
    return 0.05 + 0.9 * (img - lo) / (hi - lo)


def generate_textures(n: int, size: int, seed: int, channels: int = 3) -> np.ndarray:
    """(n, size, size, channels) stack of procedural textures in [0.05, 0.95]."""
    if n < 1 or size < 4:
        raise ValueError(f"need n >= 1 and size >= 4, got n={n}, size={size}")
    out = np.empty((n, size, size, channels))
    for i in range(n):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        out[i] = _one_texture(size, channels, rng)
    return out


def synthesize_pairs(out_dir, spec: DegradationSpec, n: int, size: int,
                     clean: np.ndarray | None = None) -> Path:
    """Write a clean/degraded PNG dataset plus its manifest.

    Generates textures unless a clean stack is supplied.  Returns the
    manifest path; rerunning with the same arguments reproduces every byte.
    """
    out_dir = Path(out_dir)
    (out_dir / "clean").mkdir(parents=True, exist_ok=True)
    (out_dir / "degraded").mkdir(parents=True, exist_ok=True)
    if clean is None:
        clean = generate_textures(n, size, spec.seed)
    else:
        n = clean.shape[0]
    rows = []
    for i in range(n):
        grid = ImageGrid(clean[i], (0.0, 1.0))
        # quantize the clean source first so pairs live on the 8-bit lattice
        clean_path = save_image(grid, out_dir / "clean" / f"{i:05d}.png")
        quantized = load_image(clean_path).data
        rng = np.random.default_rng(np.random.SeedSequence([spec.seed, i, 1]))
        deg = degrade(quantized, spec, rng)
        deg_path = save_image(ImageGrid(deg, (0.0, 1.0)), out_dir / "degraded" / f"{i:05d}.png")
        rows.append((deg_path.relative_to(out_dir), clean_path.relative_to(out_dir)))
    manifest = out_dir / "manifest.csv"
    with manifest.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["degraded", "clean"])
        for d, c in rows:
            w.writerow([str(d), str(c)])
    with (out_dir / "degradation.json").open("w") as fh:
        json.dump(asdict(spec), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def read_manifest(manifest_path) -> list[tuple[Path, Path]]:
    """(degraded, clean) absolute path pairs from a manifest CSV."""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise FileNotFoundError(f"manifest not found: {manifest_path}")
    base = manifest_path.parent
    pairs = []
    with manifest_path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"degraded", "clean"} <= set(reader.fieldnames):
            raise ValueError(f"{manifest_path}: manifest needs 'degraded' and 'clean' columns")
        for row in reader:
            pairs.append((base / row["degraded"], base / row["clean"]))
    if not pairs:
        raise ValueError(f"{manifest_path}: manifest lists no pairs")
    return pairs
