"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 missing input artifact, 3 numeric
failure during computation.  The default seed comes from WAVERESTORE_SEED
when set.  Every command that owns an output directory echoes its full
RunConfig there as run_config.txt.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import torch

from .checkpoint import (
    KIND_ESTIMATOR,
    KIND_REFINER,
    Checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from .config import SEED_ENV_VAR, RunConfig
from .data import DEGRADATION_KINDS, DegradationSpec, synthesize_pairs
from .diffusion import NumericError
from .images import crop_to, load_image, pad_to_multiple, save_image
from .metrics import psnr as psnr_db
from .metrics import ssim as ssim_index
from .nets import HighBandRefiner, NoiseEstimator
from .pipeline import evaluate, restore, write_report
from .schedule import DDIM, DDPM_FULL, ECS, make_ddim_plan, make_ddpm_plan, make_ecs_plan
from .training import TrainConfig, pairs_from_manifest, train_estimator, train_refiner, write_loss_curve
from .wavelet import BandLayout, ImageGrid, WaveletSpectrum, apply_scale, dwt2, idwt2


class _Parser(argparse.ArgumentParser):
    """argparse flags usage problems with exit code 2; we promise 1."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_cfg(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if getattr(args, "config", None) else RunConfig()
    cfg.apply_flags(args)
    if getattr(args, "manifest", None):
        cfg.dataset = str(args.manifest)
    return cfg


def _echo(cfg: RunConfig, out_dir) -> None:
    cfg.to_file(Path(out_dir) / "run_config.txt")


def _train_cfg(cfg: RunConfig, iterations: int) -> TrainConfig:
    return TrainConfig(
        iterations=iterations,
        batch_size=cfg.batch_size,
        lr=cfg.lr,
        optimizer=cfg.optimizer,
        ema_decay=cfg.ema_decay,
        seed=cfg.seed,
        levels=cfg.levels,
        n_low=cfg.n_low,
        gamma=cfg.resolved_gamma(),
        dataset=cfg.dataset,
    )


# ---------------------------------------------------------------- transforms

def _cmd_dwt(args) -> int:
    cfg = _load_cfg(args)
    img = load_image(args.input)
    padded, orig = pad_to_multiple(img.data, 2 ** cfg.levels)
    spec = dwt2(ImageGrid(padded, img.value_range), cfg.levels)
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    np.savez(
        out,
        data=spec.data,
        levels=cfg.levels,
        channels=spec.layout.source_channels,
        scale_applied=spec.scale_applied,
        orig_height=orig[0],
        orig_width=orig[1],
    )
    cfg.to_file(out.parent / (out.stem + ".config.txt"))
    print(f"wrote {spec.n_bands} bands of {spec.bands_height}x{spec.bands_width} to {out}")
    return 0


def _cmd_idwt(args) -> int:
    path = Path(args.spectrum)
    if not path.exists():
        raise FileNotFoundError(f"spectrum not found: {path}")
    with np.load(path) as z:
        spec = WaveletSpectrum(
            layout=BandLayout(levels=int(z["levels"]), source_channels=int(z["channels"])),
            data=z["data"],
            scale_applied=float(z["scale_applied"]),
        )
        orig = (int(z["orig_height"]), int(z["orig_width"]))
    if spec.scale_applied != 1.0:
        spec = apply_scale(spec, 1.0 / spec.scale_applied)
    img = idwt2(spec)
    out = save_image(ImageGrid(crop_to(img.data, orig), (0.0, 1.0)), args.output)
    print(f"wrote {out}")
    return 0


# ----------------------------------------------------------------- synth-data

def _cmd_synth_data(args) -> int:
    cfg = _load_cfg(args)
    spec = DegradationSpec(
        kind=args.kind,
        sigma=args.sigma,
        radius=args.radius,
        count=args.count,
        opacity=args.opacity,
        seed=cfg.seed,
    )
    manifest = synthesize_pairs(args.out_dir, spec, n=args.n, size=args.size)
    _echo(cfg, args.out_dir)
    print(f"wrote {args.n} pairs under {args.out_dir} (manifest: {manifest})")
    return 0


# ------------------------------------------------------------------- training

def _cmd_train_hfrm(args) -> int:
    cfg = _load_cfg(args)
    data = pairs_from_manifest(args.manifest, cfg.levels, cfg.n_low, cfg.resolved_gamma())
    torch.manual_seed(cfg.seed)
    net = HighBandRefiner(
        in_channels=data.n_bands,
        out_channels=data.n_bands - cfg.n_low,
        width=cfg.refiner_width,
        depth=cfg.refiner_depth,
    )
    ckpt, losses = train_refiner(net, data, _train_cfg(cfg, cfg.refiner_iterations))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = save_checkpoint(ckpt, out_dir / "hfrm.ckpt")
    write_loss_curve(losses, out_dir / "hfrm_loss.csv")
    _echo(cfg, out_dir)
    print(
        f"refiner trained for {cfg.refiner_iterations} iterations "
        f"(final loss {float(np.mean(losses[-20:])):.5g}) -> {path}"
    )
    return 0


def _cmd_train_diffusion(args) -> int:
    cfg = _load_cfg(args)
    data = pairs_from_manifest(args.manifest, cfg.levels, cfg.n_low, cfg.resolved_gamma())
    refiner_ckpt = None
    if cfg.n_low < data.n_bands:
        if not args.hfrm:
            raise ValueError("--hfrm is required when n_low < total bands")
        refiner_ckpt = load_checkpoint(args.hfrm)
        if refiner_ckpt.kind != KIND_REFINER:
            raise ValueError(f"{args.hfrm} is a {refiner_ckpt.kind} checkpoint, not a refiner")
    sched = cfg.make_schedule()
    torch.manual_seed(cfg.seed)
    refined_bands = 0 if refiner_ckpt is None else data.n_bands - cfg.n_low
    net = NoiseEstimator(
        in_channels=cfg.n_low + refined_bands + data.n_bands,
        out_channels=cfg.n_low,
        base_width=cfg.width,
    )
    ckpt, losses = train_estimator(net, refiner_ckpt, data, sched, _train_cfg(cfg, cfg.iterations))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = save_checkpoint(ckpt, out_dir / "estimator.ckpt")
    write_loss_curve(losses, out_dir / "diffusion_loss.csv")
    _echo(cfg, out_dir)
    print(
        f"estimator trained for {cfg.iterations} iterations "
        f"(final loss {float(np.mean(losses[-20:])):.5g}) -> {path}"
    )
    return 0


# ------------------------------------------------------------------ inference

def _restoration_context(args, cfg: RunConfig):
    """Load checkpoints, rebuild nets, and derive the restoration settings."""
    est_ckpt = load_checkpoint(args.estimator)
    if est_ckpt.kind != KIND_ESTIMATOR:
        raise ValueError(f"{args.estimator} is a {est_ckpt.kind} checkpoint, not an estimator")
    if est_ckpt.schedule is None:
        raise ValueError(f"{args.estimator} carries no schedule; cannot sample")
    tc = est_ckpt.train_config or {}
    levels = int(tc.get("levels", cfg.levels))
    n_low = int(tc.get("n_low", cfg.n_low))
    gamma = tc.get("gamma", cfg.resolved_gamma())
    total = (est_ckpt.arch["in_channels"] + 0) // 2
    est = est_ckpt.build_net()
    refiner = None
    if n_low < total:
        if not args.hfrm:
            raise ValueError("--hfrm is required: the estimator expects refined high bands")
        ref_ckpt = load_checkpoint(args.hfrm)
        if ref_ckpt.kind != KIND_REFINER:
            raise ValueError(f"{args.hfrm} is a {ref_ckpt.kind} checkpoint, not a refiner")
        rtc = ref_ckpt.train_config or {}
        for key, ours in (("levels", levels), ("n_low", n_low), ("gamma", gamma)):
            theirs = rtc.get(key)
            if theirs is not None and not np.isclose(theirs, ours):
                raise ValueError(f"refiner/estimator mismatch: {key} {theirs} vs {ours}")
        refiner = ref_ckpt.build_net()
    sched = est_ckpt.schedule
    cfg.T = sched.T
    plan = cfg.make_plan()
    return refiner, est, plan, sched, levels, n_low, gamma


def _dump_trace(trace, out_dir, n_low: int) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace.write_csv(out_dir / "trace.csv")
    for t, snap in sorted(trace.snapshots.items()):
        if snap.shape[2] == 3:
            view = snap
        else:
            view = np.mean(np.abs(snap), axis=2, keepdims=True)
        lo, hi = float(view.min()), float(view.max())
        scaled = (view - lo) / (hi - lo) if hi > lo else np.full_like(view, 0.5)
        save_image(ImageGrid(scaled, (0.0, 1.0)), out_dir / f"state_t{t:04d}.png")


def _cmd_restore(args) -> int:
    cfg = _load_cfg(args)
    refiner, est, plan, sched, levels, n_low, gamma = _restoration_context(args, cfg)
    img = load_image(args.input)
    padded, orig = pad_to_multiple(img.data, 2 ** levels)
    rng = np.random.default_rng(cfg.seed)
    res = restore(
        ImageGrid(padded, (0.0, 1.0)), refiner, est, plan, sched, rng,
        levels=levels, n_low=n_low, gamma=gamma,
        keep_snapshots=args.trace_dir is not None,
    )
    out = Path(args.output)
    restored = ImageGrid(crop_to(res.restored.data, orig), (0.0, 1.0))
    save_image(restored, out)
    cfg.to_file(out.parent / (out.stem + ".config.txt"))
    if args.trace_dir:
        _dump_trace(res.trace, args.trace_dir, n_low)
    print(f"restored {out} in {res.wall_time:.2f}s with {res.eval_count} network evaluations")
    if args.truth:
        truth = load_image(args.truth)
        print(
            f"psnr {psnr_db(restored, truth):.2f} dB, "
            f"ssim {ssim_index(restored, truth):.4f} vs {args.truth}"
        )
    return 0


def _cmd_eval(args) -> int:
    cfg = _load_cfg(args)
    refiner, est, plan, sched, levels, n_low, gamma = _restoration_context(args, cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = evaluate(
        args.manifest, refiner, est, plan, sched, seed=cfg.seed,
        levels=levels, n_low=n_low, gamma=gamma,
        report_path=out_dir / "report.csv",
        restored_dir=(out_dir / "restored") if args.save_images else None,
        limit=args.limit,
    )
    _echo(cfg, out_dir)
    agg = rows[-1]
    print(
        f"aggregate over {len(rows) - 1} images: psnr {agg['psnr_db']:.2f} dB, "
        f"ssim {agg['ssim']:.4f}, {agg['eval_count']} evals, "
        f"{agg['wall_time_s']:.3f}s/image -> {out_dir / 'report.csv'}"
    )
    return 0


# ------------------------------------------------------------------ ablations

def _parse_plan_token(token: str, T: int):
    parts = token.strip().split(":")
    try:
        if parts[0] == ECS and len(parts) == 3:
            return make_ecs_plan(T, int(parts[1]), int(parts[2]))
        if parts[0] == DDIM and len(parts) == 2:
            return make_ddim_plan(T, int(parts[1]))
        if parts[0] in (DDPM_FULL, "ddpm") and len(parts) == 1:
            return make_ddpm_plan(T)
    except ValueError as e:
        raise ValueError(f"bad plan token {token!r}: {e}")
    raise ValueError(
        f"bad plan token {token!r}; expected ecs:STRIDE:EVALS, ddim:STEPS, or ddpm_full"
    )


def _cmd_ablate_ecs(args) -> int:
    cfg = _load_cfg(args)
    refiner, est, _, sched, levels, n_low, gamma = _restoration_context(args, cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for token in args.plans.split(","):
        plan = _parse_plan_token(token, sched.T)
        res = evaluate(args.manifest, refiner, est, plan, sched, seed=cfg.seed,
                       levels=levels, n_low=n_low, gamma=gamma, limit=args.limit)
        agg = res[-1]
        rows.append({
            "plan": token.strip(),
            "evals": agg["eval_count"],
            "psnr_db": agg["psnr_db"],
            "ssim": agg["ssim"],
            "mean_wall_s": agg["wall_time_s"],
        })
        print(
            f"{token.strip():>14}: psnr {agg['psnr_db']:.2f} dB, ssim {agg['ssim']:.4f}, "
            f"{agg['eval_count']} evals, {agg['wall_time_s']:.3f}s/image"
        )
    _write_rows(rows, out_dir / "ecs_ablation.csv")
    _echo(cfg, out_dir)
    return 0


def _train_variant(cfg: RunConfig, data):
    """Train a refiner (when needed) and an estimator for one ablation row."""
    torch.manual_seed(cfg.seed)
    refiner_ckpt = None
    if cfg.n_low < data.n_bands:
        refiner = HighBandRefiner(
            in_channels=data.n_bands,
            out_channels=data.n_bands - cfg.n_low,
            width=cfg.refiner_width,
            depth=cfg.refiner_depth,
        )
        refiner_ckpt, _ = train_refiner(refiner, data, _train_cfg(cfg, cfg.refiner_iterations))
    sched = cfg.make_schedule()
    refined_bands = 0 if refiner_ckpt is None else data.n_bands - cfg.n_low
    net = NoiseEstimator(
        in_channels=cfg.n_low + refined_bands + data.n_bands,
        out_channels=cfg.n_low,
        base_width=cfg.width,
    )
    est_ckpt, _ = train_estimator(net, refiner_ckpt, data, sched, _train_cfg(cfg, cfg.iterations))
    built_refiner = refiner_ckpt.build_net() if refiner_ckpt is not None else None
    return built_refiner, est_ckpt.build_net(), sched


def _cmd_ablate_bands(args) -> int:
    cfg = _load_cfg(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for n_low in (int(s) for s in args.n_low_list.split(",")):
        cfg.n_low = n_low
        data = pairs_from_manifest(args.manifest, cfg.levels, n_low, cfg.resolved_gamma())
        refiner, est, sched = _train_variant(cfg, data)
        cfg.T = sched.T
        plan = cfg.make_plan()
        res = evaluate(args.manifest, refiner, est, plan, sched, seed=cfg.seed,
                       levels=cfg.levels, n_low=n_low, gamma=cfg.resolved_gamma(),
                       limit=args.limit)
        agg = res[-1]
        rows.append({
            "n_low": n_low,
            "psnr_db": agg["psnr_db"],
            "ssim": agg["ssim"],
            "mean_wall_s": agg["wall_time_s"],
        })
        print(f"n_low={n_low:>3}: psnr {agg['psnr_db']:.2f} dB, ssim {agg['ssim']:.4f}")
    _write_rows(rows, out_dir / "bands_ablation.csv")
    _echo(cfg, out_dir)
    return 0


def _cmd_ablate_levels(args) -> int:
    cfg = _load_cfg(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for levels in (int(s) for s in args.levels_list.split(",")):
        cfg.levels = levels
        cfg.gamma = None
        data = pairs_from_manifest(args.manifest, levels, cfg.n_low, cfg.resolved_gamma())
        refiner, est, sched = _train_variant(cfg, data)
        cfg.T = sched.T
        plan = cfg.make_plan()
        res = evaluate(args.manifest, refiner, est, plan, sched, seed=cfg.seed,
                       levels=levels, n_low=cfg.n_low, gamma=cfg.resolved_gamma(),
                       limit=args.limit)
        agg = res[-1]
        rows.append({
            "levels": levels,
            "psnr_db": agg["psnr_db"],
            "ssim": agg["ssim"],
            "mean_wall_s": agg["wall_time_s"],
        })
        print(
            f"levels={levels}: psnr {agg['psnr_db']:.2f} dB, ssim {agg['ssim']:.4f}, "
            f"{agg['wall_time_s']:.3f}s/image"
        )
    _write_rows(rows, out_dir / "levels_ablation.csv")
    _echo(cfg, out_dir)
    return 0


def _write_rows(rows: list[dict], path: Path) -> None:
    import csv

    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.4f}" if isinstance(v, float) else v) for k, v in r.items()})


# --------------------------------------------------------------------- parser

def _add_cfg_flag(p):
    p.add_argument("--config", help="run-config file (key = value lines)")
    p.add_argument("--seed", type=int, default=None,
                   help=f"RNG seed (default: ${SEED_ENV_VAR} or 0)")


def _add_transform_flags(p):
    p.add_argument("--levels", type=int, default=None, help="decomposition depth")
    p.add_argument("--n-low", dest="n_low", type=int, default=None,
                   help="bands reconstructed by sampling (the rest come from the refiner)")
    p.add_argument("--gamma", type=float, default=None,
                   help="spectrum scale (default 2**-levels)")


def _add_train_flags(p):
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--optimizer", default=None, choices=["adam", "sgd"])
    p.add_argument("--ema-decay", dest="ema_decay", type=float, default=None)


def _add_plan_flags(p):
    p.add_argument("--mode", default=None, choices=[ECS, DDIM, DDPM_FULL])
    p.add_argument("--stride", dest="ecs_stride", type=int, default=None)
    p.add_argument("--evals", dest="ecs_evals", type=int, default=None)
    p.add_argument("--steps", dest="ddim_steps", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="waverestore", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("dwt", help="decompose a PNG into a packed spectrum (.npz)")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="output .npz path")
    _add_cfg_flag(p)
    _add_transform_flags(p)
    p.set_defaults(handler=_cmd_dwt)

    p = sub.add_parser("idwt", help="synthesize a PNG back from a spectrum (.npz)")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(handler=_cmd_idwt)

    p = sub.add_parser("synth-data", help="generate a clean/degraded texture dataset")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--size", type=int, default=32)
    p.add_argument("--kind", default="gaussian_noise", choices=DEGRADATION_KINDS)
    p.add_argument("--sigma", type=float, default=25.0 / 255.0)
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--count", type=int, default=8)
    p.add_argument("--opacity", type=float, default=0.7)
    _add_cfg_flag(p)
    p.set_defaults(handler=_cmd_synth_data)

    p = sub.add_parser("train-hfrm", help="train the high-band refiner")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--iterations", dest="refiner_iterations", type=int, default=None)
    p.add_argument("--width", dest="refiner_width", type=int, default=None)
    p.add_argument("--depth", dest="refiner_depth", type=int, default=None)
    _add_cfg_flag(p)
    _add_transform_flags(p)
    _add_train_flags(p)
    p.set_defaults(handler=_cmd_train_hfrm)

    p = sub.add_parser("train-diffusion", help="train the conditional noise estimator")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--hfrm", help="refiner checkpoint (required when n_low < total bands)")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--T", dest="T", type=int, default=None)
    p.add_argument("--beta-start", dest="beta_start", type=float, default=None)
    p.add_argument("--beta-end", dest="beta_end", type=float, default=None)
    _add_cfg_flag(p)
    _add_transform_flags(p)
    _add_train_flags(p)
    p.set_defaults(handler=_cmd_train_diffusion)

    p = sub.add_parser("restore", help="restore one degraded image")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--estimator", required=True, help="estimator checkpoint")
    p.add_argument("--hfrm", help="refiner checkpoint")
    p.add_argument("--truth", help="clean reference; prints psnr/ssim when given")
    p.add_argument("--trace-dir", dest="trace_dir",
                   help="dump per-step trace csv and intermediate-state images here")
    _add_cfg_flag(p)
    _add_plan_flags(p)
    p.set_defaults(handler=_cmd_restore)

    p = sub.add_parser("eval", help="restore every pair in a manifest and report metrics")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--estimator", required=True)
    p.add_argument("--hfrm")
    p.add_argument("--save-images", action="store_true")
    p.add_argument("--limit", type=int, default=None)
    _add_cfg_flag(p)
    _add_plan_flags(p)
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("ablate-ecs", help="sweep sampling plans over a trained model")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--estimator", required=True)
    p.add_argument("--hfrm")
    p.add_argument("--plans", default="ddim:25,ecs:100:2,ecs:100:4,ecs:100:8",
                   help="comma list of ecs:STRIDE:EVALS / ddim:STEPS / ddpm_full")
    p.add_argument("--limit", type=int, default=None)
    _add_cfg_flag(p)
    p.set_defaults(handler=_cmd_ablate_ecs)

    p = sub.add_parser("ablate-bands", help="train and score variants that diffuse more bands")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n-low-list", dest="n_low_list", default="3,48")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--refiner-iterations", dest="refiner_iterations", type=int, default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--limit", type=int, default=None)
    _add_cfg_flag(p)
    _add_transform_flags(p)
    _add_train_flags(p)
    _add_plan_flags(p)
    p.set_defaults(handler=_cmd_ablate_bands)

    p = sub.add_parser("ablate-levels", help="train and score variants at other depths")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--levels-list", dest="levels_list", default="1,2,3")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--refiner-iterations", dest="refiner_iterations", type=int, default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--limit", type=int, default=None)
    _add_cfg_flag(p)
    _add_train_flags(p)
    _add_plan_flags(p)
    p.set_defaults(handler=_cmd_ablate_levels)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if not hasattr(args, "handler"):
        parser.print_help()
        return 1
    try:
        return args.handler(args) or 0
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
