"""Acceptance gate: one test per shipped guarantee, run with pytest -v.

Each test states its threshold inline and fails loudly when the measured
number drifts. The throughput check warns instead of failing because wall
clock depends on the host machine.
"""

from __future__ import annotations

import subprocess
import sys
import time
import warnings

import numpy as np
import pytest

from uavmotion import kernels
from uavmotion.attention import FeatureMap, attention_map, init_mga_weights, modulate
from uavmotion.geometry import Homography, valid_region_mask
from uavmotion.motion import (
    MotionParams,
    extract_motion_mask,
    extract_motion_mask_detailed,
    morphology,
)
from uavmotion.pipeline import (
    PipelineConfig,
    letterbox_channel_aware,
    profile_report,
    run_stream,
)
from uavmotion.synth import (
    BackgroundSpec,
    EgoMotionSpec,
    SpriteSpec,
    SynthConfig,
    generate_sequence,
    gt_homography,
    gt_step_homography,
    sprite_gt_mask,
    sprite_rect,
)
from uavmotion.motion import MotionMask

import oracles

K_LONG = 5


def corners_of(dims):
    h, w = dims
    return np.array([[0, 0], [w - 1, 0], [0, h - 1], [w - 1, h - 1]], dtype=float)


def project(m, pts):
    p = np.hstack([pts, np.ones((len(pts), 1))]) @ m.T
    return p[:, :2] / p[:, 2:3]


def corner_deviation(h_a, h_b, pts):
    return np.linalg.norm(project(h_a.m, pts) - project(h_b.m, pts), axis=1).max()


@pytest.fixture(scope="module")
def recovery_setup():
    """200-frame pan+zoom+jitter sequence processed in both modes."""
    cfg = SynthConfig(
        dims=(240, 320),
        frames=200,
        background=BackgroundSpec(),
        ego_motion=EgoMotionSpec(pan=(2.0, 0.0), zoom=1.001, jitter=2.0),
        seed=17,
    )
    seq = generate_sequence(cfg)
    start = time.perf_counter()
    independent = list(run_stream(PipelineConfig(mode="independent"), seq.frames))
    elapsed = time.perf_counter() - start
    cascaded = list(run_stream(PipelineConfig(mode="cascaded"), seq.frames))
    return cfg, seq, independent, cascaded, elapsed


def test_01_homography_recovery_accuracy(recovery_setup):
    """Estimated per-frame homographies land within 0.5 px of ground truth
    on at least 95% of 200 frames, in under 60 s of processing."""
    cfg, _, independent, _, elapsed = recovery_setup
    pts = corners_of(cfg.dims)
    errors = np.array([
        corner_deviation(independent[t].h_short, gt_step_homography(cfg, t), pts)
        for t in range(1, cfg.frames)
    ])
    hit_rate = float((errors < 0.5).mean())
    assert hit_rate >= 0.95, f"only {hit_rate:.1%} of frames under 0.5 px"
    assert elapsed < 60.0, f"200-frame run took {elapsed:.1f} s"


def test_02_cascade_drift_stays_bounded(recovery_setup):
    """Cascaded 5-frame homographies deviate from independently matched
    ones by < 2 px median and < 5 px at the 95th percentile."""
    cfg, _, independent, cascaded, _ = recovery_setup
    pts = corners_of(cfg.dims)
    devs = np.array([
        corner_deviation(cascaded[t].h_long, independent[t].h_long, pts)
        for t in range(K_LONG, cfg.frames)
    ])
    med, p95 = float(np.median(devs)), float(np.percentile(devs, 95))
    assert med < 2.0, f"median drift {med:.3f} px"
    assert p95 < 5.0, f"p95 drift {p95:.3f} px"


def test_03_matching_pass_budget(recovery_setup):
    """Beyond warm-up, cascaded mode matches exactly once per frame and
    independent mode exactly twice."""
    _, _, independent, cascaded, _ = recovery_setup
    assert all(r.match_passes == 1 for r in cascaded[K_LONG:])
    assert all(r.match_passes == 2 for r in independent[K_LONG:])


def test_04_dual_interval_complementarity():
    """Fast (6 px/frame) and slow (1 px/frame) targets: the short branch
    alone under-covers the slow target (IoU < 0.3) in >= 50% of frames, the
    long branch alone under-covers the fast target's current position band
    (ghost trail drags IoU < 0.3) in >= 30% of frames, yet the fused mask
    overlaps both targets' ground-truth bands in >= 90% of frames."""
    cfg = SynthConfig(
        dims=(240, 320),
        frames=45,
        background=BackgroundSpec(lo=110.0, hi=146.0),
        ego_motion=EgoMotionSpec(pan=(1.0, 1.0)),
        sprites=(
            SpriteSpec(size=(8, 8), velocity=(6.0, 0.0), intensity=245.0,
                       start=(30.0, 20.0)),
            SpriteSpec(size=(14, 14), velocity=(1.0, 0.0), intensity=186.0,
                       start=(170.0, 40.0)),
        ),
        seed=3,
    )
    FAST, SLOW = 0, 1
    seq = generate_sequence(cfg)
    params = MotionParams()

    def current_band(sprite_idx, t):
        y0, x0, h, w = sprite_rect(cfg, sprite_idx, t)
        box = np.zeros(cfg.dims, dtype=np.uint8)
        box[y0:y0 + h, x0:x0 + w] = 1
        return kernels.dilate(box, 7).astype(bool)

    def iou(a, b):
        a, b = a.astype(bool), b.astype(bool)
        union = (a | b).sum()
        return (a & b).sum() / union if union else 1.0

    n = short_misses = long_misses = fused_hits = 0
    for t in range(K_LONG, cfg.frames):
        detail = extract_motion_mask_detailed(
            seq.frames[t].data, seq.frames[t - 1].data, seq.frames[t - K_LONG].data,
            gt_homography(cfg, t, 1), gt_homography(cfg, t, K_LONG), params,
        )
        n += 1
        band_slow = sprite_gt_mask(cfg, SLOW, t).data.astype(bool)
        band_fast = sprite_gt_mask(cfg, FAST, t).data.astype(bool)

        short_only = morphology(detail.short_mask, "close", params.close_kernel).data
        own = oracles.components_touching(short_only, band_slow)
        short_misses += iou(own, band_slow) < 0.3

        own = oracles.components_touching(detail.long_mask.data, band_fast)
        long_misses += iou(own, current_band(FAST, t)) < 0.3

        fused = detail.mask.data.astype(bool)
        fused_hits += (fused & band_fast).any() and (fused & band_slow).any()

    assert short_misses / n >= 0.5, f"short-only missed slow in {short_misses}/{n}"
    assert long_misses / n >= 0.3, f"long-only missed fast band in {long_misses}/{n}"
    assert fused_hits / n >= 0.9, f"fused found both in only {fused_hits}/{n}"


def test_05_ego_motion_suppression():
    """Target-free pan+jitter: aligned extraction stays under 0.5% mask
    density in every frame, while forcing identity homographies (alignment
    off) pushes every frame above 5%."""
    cfg = SynthConfig(
        dims=(240, 320),
        frames=40,
        background=BackgroundSpec(lo=0.0, hi=255.0),
        ego_motion=EgoMotionSpec(pan=(3.0, 0.0), jitter=0.75),
        seed=23,
    )
    seq = generate_sequence(cfg)
    params = MotionParams()
    identity = Homography(np.eye(3))
    for t in range(K_LONG, cfg.frames):
        frames = (seq.frames[t].data, seq.frames[t - 1].data, seq.frames[t - K_LONG].data)
        h_s, h_l = gt_homography(cfg, t, 1), gt_homography(cfg, t, K_LONG)
        aligned = extract_motion_mask(*frames, h_s, h_l, params)
        valid = (
            valid_region_mask(h_s, cfg.dims).data.astype(bool)
            & valid_region_mask(h_l, cfg.dims).data.astype(bool)
        )
        density = aligned.data[valid].mean()
        assert density < 0.005, f"frame {t}: aligned density {density:.2%}"

        unaligned = extract_motion_mask(*frames, identity, identity, params)
        off_density = unaligned.data.mean()
        assert off_density > 0.05, f"frame {t}: unaligned density {off_density:.2%}"


def test_06_extraction_matches_step_transcription():
    """Library extraction is bit-identical to an independent step-by-step
    transcription (scipy-based) on 20 randomized frames."""
    rng = np.random.default_rng(99)
    params = MotionParams()
    checked = 0
    for c in range(4):
        cfg = SynthConfig(
            dims=(96, 128),
            frames=11,
            background=BackgroundSpec(),
            ego_motion=EgoMotionSpec(pan=tuple(rng.uniform(-2.0, 2.0, 2)), jitter=0.5),
            sprites=(
                SpriteSpec(
                    size=(int(rng.integers(6, 13)),) * 2,
                    velocity=(float(rng.uniform(-3, 3)), 0.0),
                    intensity=float(rng.uniform(150, 250)),
                    start=(60.0, 40.0),
                ),
            ),
            seed=int(rng.integers(1000)),
        )
        seq = generate_sequence(cfg)
        for t in rng.choice(range(K_LONG, 11), size=5, replace=False):
            t = int(t)
            h_s, h_l = gt_homography(cfg, t, 1), gt_homography(cfg, t, K_LONG)
            args = (
                seq.frames[t].data, seq.frames[t - 1].data,
                seq.frames[t - K_LONG].data, h_s, h_l, params,
            )
            got = extract_motion_mask(*args)
            assert np.array_equal(got.data, oracles.algorithm_steps_mask(*args))
            checked += 1
    assert checked == 20


def test_07_attention_exactness():
    """Attention maps match a nested-loop convolution within 1e-6,
    modulation is exactly F*(1+A), and the amplification multiplier stays
    strictly inside (1, 2) across 1000 randomized instances."""
    rng = np.random.default_rng(77)
    for _ in range(12):
        h, w = int(rng.integers(5, 17)), int(rng.integers(5, 17))
        m = rng.uniform(0, 1, (1, h, w))
        weights = init_mga_weights(
            cmid=int(rng.integers(4, 10)), seed=int(rng.integers(10_000))
        )
        got = attention_map(m, weights).data[0]
        np.testing.assert_allclose(got, oracles.conv_stack_nested(m, weights), atol=1e-6)

    for _ in range(1000):
        h, w = int(rng.integers(3, 13)), int(rng.integers(3, 13))
        m = rng.uniform(0, 1, (1, h, w))
        weights = init_mga_weights(cmid=4, seed=int(rng.integers(100_000)))
        gate = attention_map(m, weights)
        multiplier = 1.0 + gate.data
        assert (multiplier > 1.0).all() and (multiplier < 2.0).all()
        features = FeatureMap(rng.normal(size=(3, h, w)), 8)
        out = modulate(features, gate)
        assert np.array_equal(out.data, features.data * multiplier)


def test_08_letterbox_pad_values_exact():
    """Across 10 random geometries every pad pixel is exactly
    (114, 114, 114) in RGB and exactly 0 in the motion channel."""
    rng = np.random.default_rng(55)
    for _ in range(10):
        h, w = int(rng.integers(40, 300)), int(rng.integers(40, 300))
        th, tw = int(rng.integers(64, 257)), int(rng.integers(64, 257))
        rgb = rng.integers(0, 256, (h, w, 3), dtype=np.uint8)
        mask = MotionMask((rng.random((h, w)) > 0.5).astype(np.uint8))
        out, place = letterbox_channel_aware(rgb, mask, (th, tw))
        ch, cw = place.content_dims
        pad = np.ones((th, tw), dtype=bool)
        pad[place.y_offset:place.y_offset + ch, place.x_offset:place.x_offset + cw] = False
        if pad.any():
            assert (out[pad][:, :3] == 114).all()
            assert (out[pad][:, 3] == 0).all()


def test_09_repeat_runs_byte_identical(tmp_path):
    """Two full CLI runs over the same input produce byte-identical mask
    files and reports."""
    seq_dir = tmp_path / "seq"
    synth_cfg = tmp_path / "synth.json"
    synth_cfg.write_text(
        '{"dims": [96, 128], "frames": 10, '
        '"ego_motion": {"pan": [2.0, 0.0], "jitter": 0.5}, "seed": 6}'
    )
    check = dict(capture_output=True, text=True)
    proc = subprocess.run(
        [sys.executable, "-m", "uavmotion", "synth",
         "--config", str(synth_cfg), "--out", str(seq_dir)], **check,
    )
    assert proc.returncode == 0, proc.stderr

    outs = []
    for name in ("first", "second"):
        out = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "uavmotion", "run",
             "--input", str(seq_dir / "manifest.json"), "--out", str(out)], **check,
        )
        assert proc.returncode == 0, proc.stderr
        outs.append(out)
    first, second = outs
    assert (first / "report.json").read_bytes() == (second / "report.json").read_bytes()
    mask_names = sorted(p.name for p in (first / "masks").iterdir())
    assert len(mask_names) == 10
    for name in mask_names:
        assert (first / "masks" / name).read_bytes() == (second / "masks" / name).read_bytes()


def test_10_throughput_and_stage_profile():
    """640x640 cascaded stream over 200 frames: >= 15 FPS single-threaded
    with features+warp as the two most expensive stages. Shortfalls warn
    rather than fail since wall clock is hardware-dependent."""
    cfg = SynthConfig(
        dims=(640, 640),
        frames=200,
        background=BackgroundSpec(),
        ego_motion=EgoMotionSpec(pan=(2.0, 0.0), jitter=1.0),
        seed=41,
    )
    seq = generate_sequence(cfg)
    records = list(run_stream(PipelineConfig(mode="cascaded"), seq.frames))
    assert len(records) == 200
    assert not any(r.fallback_used for r in records)

    profile = profile_report(records)
    fps = profile["fps"]
    if fps < 15.0:
        warnings.warn(f"throughput {fps:.1f} FPS below the 15 FPS target")
    means = {
        name: stats["mean_ms"]
        for name, stats in profile["stages"].items()
        if name != "end_to_end"
    }
    top2 = set(sorted(means, key=means.get, reverse=True)[:2])
    if top2 != {"features", "warp"}:
        warnings.warn(f"expected features+warp to dominate, got {sorted(top2)}")
