"""Streaming orchestration: ring buffer, homography modes, instrumentation.

Two acquisition modes for the long-interval homography:

- INDEPENDENT: match the current frame directly against the frame k_long
  back (a second matching pass per frame).
- CASCADED: compose the buffered step homographies, so each frame costs
  exactly one matching pass.

The first k_long frames are warm-up: they fill the ring and emit empty
masks flagged as warm-up records. Estimation failures follow the
configured fallback ladder and flag the record.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

import numpy as np

from .attention import (
    FeatureMap,
    MgaWeights,
    apply_mga_pyramid,
    init_mga_weights,
    PYRAMID_STRIDES,
)
from .errors import (
    DegenerateConfiguration,
    EmptyInput,
    InsufficientInliers,
    SingularComposition,
    ValidationError,
)
from .features import FeatureParams, Keypoint, detect_and_describe, match_hamming_ratio
from .frame import Frame, to_gray
from .geometry import (
    Homography,
    RansacParams,
    cascade_homographies,
    estimate_homography_ransac,
    warp_with_coverage,
)
from .motion import (
    DiffMap,
    MotionMask,
    MotionParams,
    fuse_masks,
    long_term_mask,
    short_term_mask,
)

MODES = ("cascaded", "independent")
FALLBACKS = ("reuse_last_h", "identity_h", "emit_empty_mask")
EMIT_OPTIONS = ("masks", "composite", "report")
STAGES = (
    "decode",
    "features",
    "match",
    "ransac",
    "warp",
    "diff",
    "morphology",
    "fusion",
    "attention",
    "encode",
)

RGB_PAD_VALUE = 114
MOTION_PAD_VALUE = 0

_SYNTH_FEATURE_CHANNELS = 8
_SYNTH_FEATURE_SEED = 1234


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = "cascaded"
    motion: MotionParams = field(default_factory=MotionParams)
    features: FeatureParams = field(default_factory=FeatureParams)
    ransac: RansacParams = field(default_factory=RansacParams)
    target_dims: tuple[int, int] = (640, 640)
    fallback: str = "reuse_last_h"
    emit: tuple[str, ...] = ("masks", "report")
    keep_branch_masks: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}")
        if self.fallback not in FALLBACKS:
            raise ValidationError(f"fallback must be one of {FALLBACKS}")
        for item in self.emit:
            if item not in EMIT_OPTIONS:
                raise ValidationError(f"unknown emit option {item!r}")
        if self.target_dims[0] < 1 or self.target_dims[1] < 1:
            raise ValidationError("target_dims must be positive")
        object.__setattr__(self, "emit", tuple(self.emit))


@dataclass(frozen=True)
class StageTimings:
    """Per-frame wall-clock milliseconds by stage."""

    decode: float = 0.0
    features: float = 0.0
    match: float = 0.0
    ransac: float = 0.0
    warp: float = 0.0
    diff: float = 0.0
    morphology: float = 0.0
    fusion: float = 0.0
    attention: float = 0.0
    encode: float = 0.0
    end_to_end: float = 0.0

    def __post_init__(self):
        stage_values = [getattr(self, s) for s in STAGES]
        if any(v < 0 for v in stage_values) or self.end_to_end < 0:
            raise ValidationError("timings must be non-negative")
        if self.end_to_end < max(stage_values):
            raise ValidationError("end_to_end cannot undercut a stage")

    def as_dict(self) -> dict[str, float]:
        d = {s: getattr(self, s) for s in STAGES}
        d["end_to_end"] = self.end_to_end
        return d


@dataclass
class FrameRecord:
    """Everything the pipeline knows about one processed frame."""

    index: int
    warmup: bool
    fallback_used: bool
    mask: MotionMask
    h_short: Homography | None
    h_long: Homography | None
    match_passes: int
    timings: StageTimings
    mask_density: float
    short_mask: MotionMask | None = None
    long_mask: MotionMask | None = None
    attention_means: tuple[float, float, float] | None = None


@dataclass
class _Slot:
    index: int
    frame: Frame
    gray: np.ndarray
    kps: list[Keypoint]
    desc: np.ndarray
    step_h: Homography | None


class FrameRing:
    """Fixed-capacity history of the most recent frames (k_long + 1 slots)."""

    def __init__(self, capacity: int):
        if capacity < 2:
            raise ValidationError("ring capacity must be >= 2")
        self.capacity = capacity
        self._slots: list[_Slot] = []

    def __len__(self) -> int:
        return len(self._slots)

    def push(self, slot: _Slot) -> None:
        self._slots.append(slot)
        if len(self._slots) > self.capacity:
            self._slots.pop(0)

    def back(self, offset: int) -> _Slot:
        """offset 0 is the newest slot, offset k the frame k steps older."""
        if offset < 0 or offset >= len(self._slots):
            raise EmptyInput(f"ring holds {len(self._slots)} frames, asked for -{offset}")
        return self._slots[-1 - offset]

    def steps_window(self, k: int) -> list[Homography]:
        """[H_{t,t-1}, H_{t-1,t-2}, ..., H_{t-k+1,t-k}], newest first."""
        if k >= len(self._slots):
            raise EmptyInput(f"need {k + 1} buffered frames, have {len(self._slots)}")
        out = []
        for i in range(k):
            h = self._slots[-1 - i].step_h
            if h is None:
                raise EmptyInput("step homography missing inside cascade window")
            out.append(h)
        return out


class _StageClock:
    def __init__(self):
        self.ms = {s: 0.0 for s in STAGES}

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.ms[name] += (time.perf_counter() - start) * 1000.0


def make_synthetic_feature_maps(
    dims: tuple[int, int],
    seed: int = _SYNTH_FEATURE_SEED,
    channels: int = _SYNTH_FEATURE_CHANNELS,
) -> tuple[FeatureMap, FeatureMap, FeatureMap]:
    """Seeded stand-in feature pyramid with the correct per-stride dims."""
    rng = np.random.default_rng(seed)
    maps = []
    for stride in PYRAMID_STRIDES:
        shape = (channels, -(-dims[0] // stride), -(-dims[1] // stride))
        maps.append(FeatureMap(rng.normal(0.0, 1.0, size=shape), stride))
    return tuple(maps)


def _resolve_weights(
    weights: MgaWeights | tuple[MgaWeights, MgaWeights, MgaWeights] | None,
) -> tuple[MgaWeights, MgaWeights, MgaWeights]:
    if weights is None:
        return tuple(init_mga_weights(seed=s) for s in (0, 1, 2))
    if isinstance(weights, MgaWeights):
        return (weights, weights, weights)
    if len(weights) != 3:
        raise ValidationError("need one MgaWeights or a tuple of three")
    return tuple(weights)


def run_stream(
    cfg: PipelineConfig,
    frames: Iterable[Frame | np.ndarray],
    mga_weights: MgaWeights | tuple[MgaWeights, MgaWeights, MgaWeights] | None = None,
    feature_provider: Callable[[int, tuple[int, int]], tuple[FeatureMap, ...]] | None = None,
    sink: Callable[[FrameRecord], None] | None = None,
) -> Iterator[FrameRecord]:
    """Process a frame stream, yielding one FrameRecord per frame.

    `feature_provider(index, dims)` may supply real detector feature maps;
    without it a seeded synthetic pyramid exercises the attention path.
    `sink` is called with each record before it is yielded and its cost is
    booked under the encode stage.
    """
    motion = cfg.motion
    ring = FrameRing(motion.k_long + 1)
    w3, w4, w5 = _resolve_weights(mga_weights)
    static_maps: tuple[FeatureMap, ...] | None = None
    last_step_h: Homography | None = None
    last_long_h: Homography | None = None
    identity = Homography.identity()

    for t, item in enumerate(frames):
        total_start = time.perf_counter()
        clock = _StageClock()
        fallback_used = False
        emit_empty = False
        match_passes = 0

        with clock.stage("decode"):
            frame = item if isinstance(item, Frame) else Frame(np.asarray(item), index=t)
            gray = to_gray(frame)
        dims = gray.shape

        with clock.stage("features"):
            kps, desc = detect_and_describe(gray, cfg.features)

        h_step: Homography | None = None
        if t >= 1:
            prev = ring.back(0)
            with clock.stage("match"):
                matches = match_hamming_ratio(desc, prev.desc, kps, prev.kps, cfg.features)
            match_passes += 1
            with clock.stage("ransac"):
                try:
                    h_step, _ = estimate_homography_ransac(matches, cfg.ransac)
                    last_step_h = h_step
                except (InsufficientInliers, DegenerateConfiguration):
                    fallback_used = True
                    if cfg.fallback == "reuse_last_h":
                        h_step = last_step_h if last_step_h is not None else identity
                    elif cfg.fallback == "identity_h":
                        h_step = identity
                    else:
                        h_step = identity
                        emit_empty = True
        ring.push(_Slot(t, frame, gray, kps, desc, h_step))

        warmup = t < motion.k_long
        h_short: Homography | None = h_step
        h_long: Homography | None = None
        d_s = d_l = None
        attention_means = None
        mask = MotionMask(np.zeros(dims, dtype=np.uint8))

        if not warmup:
            if cfg.mode == "independent":
                ref_long = ring.back(motion.k_long)
                with clock.stage("match"):
                    matches_l = match_hamming_ratio(
                        desc, ref_long.desc, kps, ref_long.kps, cfg.features
                    )
                match_passes += 1
                with clock.stage("ransac"):
                    try:
                        h_long, _ = estimate_homography_ransac(matches_l, cfg.ransac)
                        last_long_h = h_long
                    except (InsufficientInliers, DegenerateConfiguration):
                        fallback_used = True
                        if cfg.fallback == "reuse_last_h":
                            h_long = last_long_h if last_long_h is not None else identity
                        elif cfg.fallback == "identity_h":
                            h_long = identity
                        else:
                            h_long = identity
                            emit_empty = True
            else:
                with clock.stage("ransac"):
                    try:
                        h_long = cascade_homographies(ring.steps_window(motion.k_long))
                        last_long_h = h_long
                    except SingularComposition:
                        fallback_used = True
                        if cfg.fallback == "reuse_last_h":
                            h_long = last_long_h if last_long_h is not None else identity
                        elif cfg.fallback == "identity_h":
                            h_long = identity
                        else:
                            h_long = identity
                            emit_empty = True

            if motion.k_short == 1:
                h_short = h_step
            else:
                h_short = cascade_homographies(ring.steps_window(motion.k_short))

            if not emit_empty:
                ref_s = ring.back(motion.k_short)
                ref_l = ring.back(motion.k_long)
                with clock.stage("warp"):
                    warped_s, region_s = warp_with_coverage(ref_s.gray, h_short, dims)
                    warped_l, region_l = warp_with_coverage(ref_l.gray, h_long, dims)
                with clock.stage("diff"):
                    delta_s = DiffMap(
                        np.abs(gray - warped_s) * region_s.data.astype(np.float32),
                        motion.k_short,
                    )
                    delta_l = DiffMap(
                        np.abs(gray - warped_l) * region_l.data.astype(np.float32),
                        motion.k_long,
                    )
                with clock.stage("morphology"):
                    d_s = short_term_mask(delta_s, motion)
                    d_l = long_term_mask(delta_l, motion)
                with clock.stage("fusion"):
                    mask = fuse_masks(d_s, d_l, motion)

            with clock.stage("attention"):
                if feature_provider is not None:
                    p3, p4, p5 = feature_provider(t, dims)
                else:
                    if static_maps is None:
                        static_maps = make_synthetic_feature_maps(dims)
                    p3, p4, p5 = static_maps
                m3, m4, m5 = apply_mga_pyramid(p3, p4, p5, mask, w3, w4, w5)
                attention_means = (
                    float(m3.data.mean()),
                    float(m4.data.mean()),
                    float(m5.data.mean()),
                )

        record = FrameRecord(
            index=t,
            warmup=warmup,
            fallback_used=fallback_used,
            mask=mask,
            h_short=h_short,
            h_long=h_long,
            match_passes=match_passes,
            timings=StageTimings(),  # placeholder, replaced below
            mask_density=mask.density,
            short_mask=d_s if cfg.keep_branch_masks else None,
            long_mask=d_l if cfg.keep_branch_masks else None,
            attention_means=attention_means,
        )
        if sink is not None:
            with clock.stage("encode"):
                sink(record)
        end_to_end = (time.perf_counter() - total_start) * 1000.0
        record.timings = StageTimings(**clock.ms, end_to_end=end_to_end)
        yield record


@dataclass(frozen=True)
class LetterboxPlacement:
    scale: float
    x_offset: int
    y_offset: int
    content_dims: tuple[int, int]


def _resize_bilinear_u8(channel: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    from .attention import _resize_bilinear_2d

    out = _resize_bilinear_2d(channel.astype(np.float64), dims)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def _resize_nearest(channel: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    sh, sw = channel.shape
    oh, ow = dims
    ys = np.minimum(((np.arange(oh) + 0.5) * (sh / oh)).astype(np.int64), sh - 1)
    xs = np.minimum(((np.arange(ow) + 0.5) * (sw / ow)).astype(np.int64), sw - 1)
    return channel[ys[:, None], xs[None, :]]


def letterbox_channel_aware(
    rgb: np.ndarray, motion: MotionMask, target_dims: tuple[int, int]
) -> tuple[np.ndarray, LetterboxPlacement]:
    """Uniform-scale letterbox producing an RGB+motion 4-channel raster.

    RGB is resampled bilinearly and padded with 114; the motion channel is
    resampled nearest-neighbour (stays binary) and padded with exactly 0,
    so padding can never read as motion.
    """
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.dtype != np.uint8:
        raise ValidationError("letterbox expects an (H, W, 3) uint8 raster")
    if rgb.shape[:2] != motion.data.shape:
        raise ValidationError("rgb and motion dims differ")
    h, w = rgb.shape[:2]
    th, tw = target_dims
    if th < 1 or tw < 1:
        raise ValidationError("target dims must be positive")
    scale = min(th / h, tw / w)
    ch = max(1, int(round(h * scale)))
    cw = max(1, int(round(w * scale)))
    y_off = (th - ch) // 2
    x_off = (tw - cw) // 2

    out = np.empty((th, tw, 4), dtype=np.uint8)
    out[:, :, :3] = RGB_PAD_VALUE
    out[:, :, 3] = MOTION_PAD_VALUE
    for c in range(3):
        out[y_off : y_off + ch, x_off : x_off + cw, c] = _resize_bilinear_u8(
            rgb[:, :, c], (ch, cw)
        )
    out[y_off : y_off + ch, x_off : x_off + cw, 3] = _resize_nearest(
        motion.data, (ch, cw)
    )
    return out, LetterboxPlacement(
        scale=scale, x_offset=x_off, y_offset=y_off, content_dims=(ch, cw)
    )


def run_report(records: list[FrameRecord]) -> dict:
    """Deterministic run summary: everything except wall-clock timings, so
    two runs over the same input produce byte-identical reports."""
    if not records:
        raise EmptyInput("no records to report")
    active = [r for r in records if not r.warmup]
    per_frame = []
    for r in records:
        per_frame.append(
            {
                "index": r.index,
                "warmup": r.warmup,
                "fallback_used": r.fallback_used,
                "match_passes": r.match_passes,
                "mask_density": r.mask_density,
                "h_short": r.h_short.m.reshape(-1).tolist() if r.h_short else None,
                "h_long": r.h_long.m.reshape(-1).tolist() if r.h_long else None,
                "attention_means": list(r.attention_means)
                if r.attention_means is not None
                else None,
            }
        )
    return {
        "frames": len(records),
        "warmup_frames": sum(1 for r in records if r.warmup),
        "fallback_frames": sum(1 for r in records if r.fallback_used),
        "mean_mask_density": float(np.mean([r.mask_density for r in active]))
        if active
        else 0.0,
        "per_frame": per_frame,
    }


def profile_report(records: list[FrameRecord]) -> dict:
    """Aggregate mean/p50/p95 per stage over the non-warmup records."""
    if not records:
        raise EmptyInput("no records to profile")
    active = [r for r in records if not r.warmup] or records
    report: dict = {
        "frames": len(records),
        "warmup_frames": sum(1 for r in records if r.warmup),
        "profiled_frames": len(active),
        "stages": {},
    }
    for stage in STAGES + ("end_to_end",):
        vals = np.array(
            [getattr(r.timings, stage) for r in active], dtype=np.float64
        )
        report["stages"][stage] = {
            "mean_ms": float(vals.mean()),
            "p50_ms": float(np.percentile(vals, 50)),
            "p95_ms": float(np.percentile(vals, 95)),
        }
    mean_e2e = report["stages"]["end_to_end"]["mean_ms"]
    report["fps"] = 1000.0 / mean_e2e if mean_e2e > 0 else float("inf")
    return report
