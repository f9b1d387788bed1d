"""Command-line entry points: run, synth, score, bench.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 stream
failure while processing frames.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import io as uio
from . import pipeline as pl
from .attention import load_mga_weights
from .errors import (
    ConfigError,
    DecodeError,
    ParseError,
    UavMotionError,
    ValidationError,
    WriteError,
)
from .pipeline import PipelineConfig
from .synth import EgoMotionSpec, SynthConfig, generate_sequence

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_STREAM = 3


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_pipeline_config(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    cfg = uio.parse_config(path)
    if not isinstance(cfg, PipelineConfig):
        raise ValidationError("expected a pipeline config, got a synth one")
    return cfg


def _dims_arg(text: str) -> tuple[int, int]:
    try:
        h, w = (int(v) for v in text.lower().split("x"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("dims must look like 480x640") from exc
    if h < 1 or w < 1:
        raise argparse.ArgumentTypeError("dims must be positive")
    return (h, w)


def _as_rgb(image: np.ndarray) -> np.ndarray:
    if image.ndim == 2:
        return np.repeat(image[:, :, None], 3, axis=2)
    return image


def _input_frame_paths(source: str) -> list[str]:
    """A manifest path or a directory of .pgm/.png frames in sorted order."""
    if os.path.isdir(source):
        names = sorted(
            n for n in os.listdir(source) if n.lower().endswith((".png", ".pgm"))
        )
        if not names:
            raise ParseError(f"no .png/.pgm frames in {source}")
        return [os.path.join(source, n) for n in names]
    paths, _ = uio.load_manifest(source)
    return paths


def _apply_overrides(cfg: PipelineConfig, args: argparse.Namespace) -> PipelineConfig:
    changes = {}
    if getattr(args, "mode", None):
        changes["mode"] = args.mode
    if getattr(args, "emit", None):
        changes["emit"] = tuple(e.strip() for e in args.emit.split(",") if e.strip())
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = _apply_overrides(_load_pipeline_config(args.config), args)
        weights = load_mga_weights(args.weights) if args.weights else None
    except (ParseError, ValidationError, ConfigError) as exc:
        return _fail(EXIT_CONFIG, str(exc))

    try:
        frame_paths = _input_frame_paths(args.input)
    except ParseError as exc:
        return _fail(EXIT_IO, str(exc))

    masks_dir = os.path.join(args.out, "masks")
    comp_dir = os.path.join(args.out, "composites")
    try:
        os.makedirs(args.out, exist_ok=True)
        if "masks" in cfg.emit:
            os.makedirs(masks_dir, exist_ok=True)
        if "composite" in cfg.emit:
            os.makedirs(comp_dir, exist_ok=True)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))

    def frames():
        for i, fp in enumerate(frame_paths):
            yield uio.load_frame(fp, index=i)

    records = []
    try:
        for record in pl.run_stream(cfg, frames(), mga_weights=weights):
            records.append(record)
            if "masks" in cfg.emit:
                uio.save_mask(
                    os.path.join(masks_dir, f"{record.index:06d}.png"), record.mask
                )
            if "composite" in cfg.emit:
                rgb = _as_rgb(uio.load_image(frame_paths[record.index]))
                raster, _ = pl.letterbox_channel_aware(rgb, record.mask, cfg.target_dims)
                uio.save_image(
                    os.path.join(comp_dir, f"{record.index:06d}.png"), raster
                )
    except (DecodeError, WriteError, OSError) as exc:
        return _fail(EXIT_IO, str(exc))
    except UavMotionError as exc:
        return _fail(EXIT_STREAM, str(exc))

    if not records:
        return _fail(EXIT_IO, "input produced no frames")

    if "report" in cfg.emit:
        report = {
            "config": uio.pipeline_config_to_dict(cfg),
            **pl.run_report(records),
        }
        try:
            uio.write_report(os.path.join(args.out, "report.json"), report)
        except (WriteError, OSError) as exc:
            return _fail(EXIT_IO, str(exc))

    if args.profile:
        try:
            uio.write_report(
                os.path.join(args.out, "profile.json"), pl.profile_report(records)
            )
        except (WriteError, OSError) as exc:
            return _fail(EXIT_IO, str(exc))

    fallbacks = sum(1 for r in records if r.fallback_used)
    print(
        f"processed {len(records)} frames "
        f"({sum(1 for r in records if r.warmup)} warm-up, {fallbacks} fallback) "
        f"-> {args.out}"
    )
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    try:
        if args.config:
            cfg = uio.parse_config(args.config)
            if not isinstance(cfg, SynthConfig):
                raise ValidationError("expected a synth config, got a pipeline one")
        else:
            cfg = SynthConfig()
        seq = generate_sequence(cfg)
    except (ParseError, ValidationError, ConfigError) as exc:
        return _fail(EXIT_CONFIG, str(exc))
    try:
        os.makedirs(args.out, exist_ok=True)
        manifest = uio.export_sequence(seq, args.out, image_format=args.format)
    except (WriteError, OSError) as exc:
        return _fail(EXIT_IO, str(exc))
    print(f"wrote {cfg.frames} frames -> {manifest}")
    return EXIT_OK


def _mask_files(directory: str) -> list[str]:
    try:
        names = sorted(
            n for n in os.listdir(directory) if n.lower().endswith((".png", ".pgm"))
        )
    except OSError as exc:
        raise DecodeError(f"cannot list {directory}: {exc}") from exc
    if not names:
        raise DecodeError(f"no mask images in {directory}")
    return [os.path.join(directory, n) for n in names]


def score_masks(pred_dir: str, gt_dir: str, skip: int = 0) -> dict:
    """Precision/recall/IoU between aligned mask directories."""
    pred_paths = _mask_files(pred_dir)
    gt_paths = _mask_files(gt_dir)
    if len(pred_paths) != len(gt_paths):
        raise DecodeError(
            f"mask count mismatch: {len(pred_paths)} predicted vs "
            f"{len(gt_paths)} ground truth"
        )
    if not (0 <= skip < len(pred_paths)):
        raise ValidationError("skip outside the sequence")
    per_frame = []
    for i in range(skip, len(pred_paths)):
        pred = uio.load_mask(pred_paths[i]).data.astype(bool)
        gt = uio.load_mask(gt_paths[i]).data.astype(bool)
        if pred.shape != gt.shape:
            raise DecodeError(f"mask dims differ at frame {i}")
        tp = int(np.count_nonzero(pred & gt))
        fp = int(np.count_nonzero(pred & ~gt))
        fn = int(np.count_nonzero(~pred & gt))
        union = tp + fp + fn
        per_frame.append(
            {
                "index": i,
                "precision": tp / (tp + fp) if tp + fp else 1.0,
                "recall": tp / (tp + fn) if tp + fn else 1.0,
                "iou": tp / union if union else 1.0,
                "pred_pixels": tp + fp,
                "gt_pixels": tp + fn,
            }
        )
    return {
        "frames_scored": len(per_frame),
        "skipped": skip,
        "mean_precision": float(np.mean([f["precision"] for f in per_frame])),
        "mean_recall": float(np.mean([f["recall"] for f in per_frame])),
        "mean_iou": float(np.mean([f["iou"] for f in per_frame])),
        "per_frame": per_frame,
    }


def _cmd_score(args: argparse.Namespace) -> int:
    try:
        report = score_masks(args.pred, args.gt, skip=args.skip)
    except ValidationError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    except (DecodeError, ParseError, OSError) as exc:
        return _fail(EXIT_IO, str(exc))
    print(
        f"scored {report['frames_scored']} frames: "
        f"precision={report['mean_precision']:.3f} "
        f"recall={report['mean_recall']:.3f} iou={report['mean_iou']:.3f}"
    )
    if args.report:
        try:
            uio.write_report(args.report, report)
        except (WriteError, OSError) as exc:
            return _fail(EXIT_IO, str(exc))
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    """Time the pipeline stages over a stream and emit the profile."""
    try:
        cfg = _apply_overrides(_load_pipeline_config(args.config), args)
    except (ParseError, ValidationError, ConfigError) as exc:
        return _fail(EXIT_CONFIG, str(exc))

    if args.input:
        try:
            frame_paths = _input_frame_paths(args.input)[: args.frames]
        except ParseError as exc:
            return _fail(EXIT_IO, str(exc))

        def frames():
            for i, fp in enumerate(frame_paths):
                yield uio.load_frame(fp, index=i)

    else:
        # no input: synthesize a panning textured stream at the given dims
        try:
            synth_cfg = SynthConfig(
                dims=args.dims,
                frames=args.frames,
                ego_motion=EgoMotionSpec(pan=(2.0, 0.0), jitter=1.0),
                seed=0,
            )
            seq = generate_sequence(synth_cfg)
        except ConfigError as exc:
            return _fail(EXIT_CONFIG, str(exc))

        def frames():
            yield from seq.frames

    try:
        records = list(pl.run_stream(cfg, frames()))
        profile = pl.profile_report(records)
    except (DecodeError, OSError) as exc:
        return _fail(EXIT_IO, str(exc))
    except UavMotionError as exc:
        return _fail(EXIT_STREAM, str(exc))

    print(f"{'stage':<12} {'mean ms':>9} {'p50 ms':>9} {'p95 ms':>9}")
    for stage, stats in profile["stages"].items():
        print(
            f"{stage:<12} {stats['mean_ms']:>9.3f} {stats['p50_ms']:>9.3f} "
            f"{stats['p95_ms']:>9.3f}"
        )
    print(f"fps {profile['fps']:.2f} over {profile['profiled_frames']} profiled frames")
    if args.report:
        try:
            uio.write_report(args.report, profile)
        except (WriteError, OSError) as exc:
            return _fail(EXIT_IO, str(exc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uavmotion",
        description="Motion-guided detection frontend for moving-camera video.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="process a frame sequence")
    p_run.add_argument("--input", required=True, help="manifest JSON or frame directory")
    p_run.add_argument("--config", help="pipeline config JSON")
    p_run.add_argument("--mode", choices=pl.MODES, help="override config mode")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--emit", help="comma list: masks,composite,report")
    p_run.add_argument("--weights", help="attention weights JSON")
    p_run.add_argument(
        "--profile", action="store_true", help="also write stage timing percentiles"
    )
    p_run.set_defaults(func=_cmd_run)

    p_synth = sub.add_parser("synth", help="generate a synthetic sequence")
    p_synth.add_argument("--config", help="synth config JSON (defaults if omitted)")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--format", choices=("pgm", "png"), default="pgm")
    p_synth.set_defaults(func=_cmd_synth)

    p_score = sub.add_parser("score", help="compare predicted masks to ground truth")
    p_score.add_argument("--pred", required=True, help="predicted mask directory")
    p_score.add_argument("--gt", required=True, help="ground-truth mask directory")
    p_score.add_argument("--skip", type=int, default=0, help="frames to skip (warm-up)")
    p_score.add_argument("--report", help="write the score report here")
    p_score.set_defaults(func=_cmd_score)

    p_bench = sub.add_parser("bench", help="profile pipeline stages over a stream")
    p_bench.add_argument("--input", help="manifest JSON or frame directory")
    p_bench.add_argument("--config", help="pipeline config JSON")
    p_bench.add_argument("--mode", choices=pl.MODES, help="override config mode")
    p_bench.add_argument("--frames", type=int, default=60)
    p_bench.add_argument(
        "--dims", type=_dims_arg, default=(480, 640), help="synthetic stream dims"
    )
    p_bench.add_argument("--report", help="write the timing report here")
    p_bench.set_defaults(func=_cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
