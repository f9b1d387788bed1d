"""Synthetic UAV sequences with exact ground truth.

A value-noise background lives on an oversized virtual canvas. Each frame
samples that canvas through a per-frame ego transform (pan, zoom, rotation
about the window center, plus seeded uniform jitter), so camera motion is
a true homography between frames and the step homographies have a closed
form. Sprites are composited after the resampling step in frame
coordinates, which makes them independently moving targets the ground
truth can locate exactly.

Sign convention: positive pan moves the camera window across the canvas,
so frame t content appears shifted by -pan relative to frame t-1, and the
ground-truth step homography H_{t,t-1} is the translation by +pan for a
pure pan (a point at x in frame t was at x + pan in frame t-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, IndexOutOfRange
from .frame import Frame
from .geometry import Homography
from .motion import MotionMask

_CANVAS_PAD = 8
_GT_DILATE_PX = 3
_DEFAULT_K_LONG = 5


@dataclass(frozen=True)
class BackgroundSpec:
    """Seeded value-noise octaves, min-max normalized into [lo, hi]."""

    octaves: int = 4
    base_cell: int = 12
    lo: float = 30.0
    hi: float = 225.0

    def __post_init__(self):
        if self.octaves < 1:
            raise ConfigError("background needs at least one octave")
        if self.base_cell < 2:
            raise ConfigError("base_cell must be >= 2")
        if not (0.0 <= self.lo < self.hi <= 255.0):
            raise ConfigError("background range must satisfy 0 <= lo < hi <= 255")


@dataclass(frozen=True)
class EgoMotionSpec:
    """Per-frame camera motion: pan px/frame, zoom rate, rotation rad/frame,
    and the amplitude of uniform per-frame jitter."""

    pan: tuple[float, float] = (0.0, 0.0)
    zoom: float = 1.0
    rotation: float = 0.0
    jitter: float = 0.0

    def __post_init__(self):
        if self.zoom <= 0.0:
            raise ConfigError("zoom rate must be positive")
        if self.jitter < 0.0:
            raise ConfigError("jitter amplitude must be non-negative")


@dataclass(frozen=True)
class SpriteSpec:
    """Independently moving rectangular target in frame coordinates.

    start is the (x, y) of the top-left corner at t=0; velocity is px/frame.
    intensity is the flat fill value; texture > 0 adds a rigid seeded noise
    pattern of that amplitude on top.
    """

    size: tuple[int, int] = (8, 8)
    velocity: tuple[float, float] = (0.0, 0.0)
    intensity: float = 200.0
    start: tuple[float, float] = (0.0, 0.0)
    texture: float = 0.0

    def __post_init__(self):
        if self.size[0] < 1 or self.size[1] < 1:
            raise ConfigError("sprite size must be positive")
        if not (0.0 <= self.intensity <= 255.0):
            raise ConfigError("sprite intensity must lie in [0, 255]")
        if self.texture < 0.0:
            raise ConfigError("sprite texture amplitude must be non-negative")


@dataclass(frozen=True)
class SynthConfig:
    dims: tuple[int, int] = (480, 640)
    frames: int = 30
    background: BackgroundSpec = field(default_factory=BackgroundSpec)
    ego_motion: EgoMotionSpec = field(default_factory=EgoMotionSpec)
    sprites: tuple[SpriteSpec, ...] = ()
    seed: int = 0

    def __post_init__(self):
        h, w = self.dims
        if h < 16 or w < 16:
            raise ConfigError("window dims must be at least 16x16")
        if self.frames < _DEFAULT_K_LONG + 1:
            raise ConfigError(
                f"need at least {_DEFAULT_K_LONG + 1} frames for the long interval"
            )
        object.__setattr__(self, "sprites", tuple(self.sprites))
        for i, sp in enumerate(self.sprites):
            for t in range(self.frames):
                y0, x0, sh, sw = _sprite_rect_raw(sp, t)
                if y0 < 0 or x0 < 0 or y0 + sh > h or x0 + sw > w:
                    raise ConfigError(
                        f"sprite {i} leaves the {h}x{w} window at frame {t}"
                    )


@dataclass(frozen=True)
class SyntheticSequence:
    """Frames plus exact ground truth for the default long interval."""

    config: SynthConfig
    frames: list[Frame]
    gt_homographies: list[Homography]  # [t] = H_{t,t-1}; [0] is identity
    gt_masks: list[MotionMask]


def _sprite_rect_raw(sp: SpriteSpec, t: int) -> tuple[int, int, int, int]:
    x = int(round(sp.start[0] + sp.velocity[0] * t))
    y = int(round(sp.start[1] + sp.velocity[1] * t))
    return y, x, sp.size[0], sp.size[1]


def sprite_rect(cfg: SynthConfig, sprite_idx: int, t: int) -> tuple[int, int, int, int]:
    """(y0, x0, h, w) of a sprite's footprint at frame t."""
    if not (0 <= t < cfg.frames):
        raise IndexOutOfRange(f"frame {t} outside [0, {cfg.frames})")
    if not (0 <= sprite_idx < len(cfg.sprites)):
        raise IndexOutOfRange(f"no sprite {sprite_idx}")
    return _sprite_rect_raw(cfg.sprites[sprite_idx], t)


def _rng_children(cfg: SynthConfig) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(cfg.seed).spawn(3)


def _jitter_table(cfg: SynthConfig) -> np.ndarray:
    """(frames, 2) uniform jitter in [-amp, amp]; a pure function of the config."""
    amp = cfg.ego_motion.jitter
    rng = np.random.default_rng(_rng_children(cfg)[1])
    table = rng.uniform(-amp, amp, size=(cfg.frames, 2))
    if amp == 0.0:
        table[:] = 0.0
    return table


def _ego_matrix(cfg: SynthConfig, t: int, jitter: np.ndarray) -> np.ndarray:
    """E_t maps frame-t pixel coordinates into the shared scene plane."""
    h, w = cfg.dims
    cx = (w - 1) / 2.0
    cy = (h - 1) / 2.0
    ego = cfg.ego_motion
    s = ego.zoom**t
    th = ego.rotation * t
    ca = math.cos(th) * s
    sa = math.sin(th) * s
    tx = ego.pan[0] * t + jitter[t, 0]
    ty = ego.pan[1] * t + jitter[t, 1]
    # rotation+scale about the window center, then translation
    return np.array(
        [
            [ca, -sa, cx - ca * cx + sa * cy + tx],
            [sa, ca, cy - sa * cx - ca * cy + ty],
            [0.0, 0.0, 1.0],
        ]
    )


def gt_homography(cfg: SynthConfig, t: int, k: int) -> Homography:
    """Closed-form H_{t,t-k} mapping frame-t pixels into frame t-k."""
    if not (0 <= t < cfg.frames):
        raise IndexOutOfRange(f"frame {t} outside [0, {cfg.frames})")
    if not (0 <= k <= t):
        raise IndexOutOfRange(f"interval {k} reaches before frame 0")
    jit = _jitter_table(cfg)
    e_now = _ego_matrix(cfg, t, jit)
    e_ref = _ego_matrix(cfg, t - k, jit)
    return Homography(np.linalg.solve(e_ref, e_now))


def gt_step_homography(cfg: SynthConfig, t: int) -> Homography:
    """Closed-form H_{t,t-1} for t >= 1."""
    if t < 1:
        raise IndexOutOfRange("step homography needs t >= 1")
    return gt_homography(cfg, t, 1)


def _value_noise(dims: tuple[int, int], spec: BackgroundSpec, rng) -> np.ndarray:
    h, w = dims
    acc = np.zeros((h, w), dtype=np.float64)
    amp = 1.0
    cell = float(spec.base_cell)
    ys = np.arange(h, dtype=np.float64)
    xs = np.arange(w, dtype=np.float64)
    for _ in range(spec.octaves):
        gh = int(math.ceil(h / cell)) + 2
        gw = int(math.ceil(w / cell)) + 2
        grid = rng.uniform(0.0, 1.0, size=(gh, gw))
        gy = ys / cell
        gx = xs / cell
        y0 = np.floor(gy).astype(np.int64)
        x0 = np.floor(gx).astype(np.int64)
        fy = (gy - y0)[:, None]
        fx = (gx - x0)[None, :]
        top = grid[y0[:, None], x0[None, :]] * (1 - fx) + grid[y0[:, None], x0[None, :] + 1] * fx
        bot = grid[y0[:, None] + 1, x0[None, :]] * (1 - fx) + grid[y0[:, None] + 1, x0[None, :] + 1] * fx
        acc += amp * (top * (1 - fy) + bot * fy)
        amp *= 0.5
        cell = max(2.0, cell / 2.0)
    lo, hi = float(acc.min()), float(acc.max())
    if hi - lo < 1e-12:
        return np.full((h, w), (spec.lo + spec.hi) / 2.0, dtype=np.float32)
    out = spec.lo + (acc - lo) * (spec.hi - spec.lo) / (hi - lo)
    return out.astype(np.float32)


def _canvas_geometry(cfg: SynthConfig) -> tuple[tuple[int, int], np.ndarray]:
    """Canvas dims and the offset matrix O placing all windows inside it."""
    h, w = cfg.dims
    jit = _jitter_table(cfg)
    corners = np.array(
        [[0.0, 0.0, 1.0], [w - 1.0, 0.0, 1.0], [0.0, h - 1.0, 1.0], [w - 1.0, h - 1.0, 1.0]]
    ).T
    mins = np.full(2, np.inf)
    maxs = np.full(2, -np.inf)
    for t in range(cfg.frames):
        p = _ego_matrix(cfg, t, jit) @ corners
        p = p[:2] / p[2]
        mins = np.minimum(mins, p.min(axis=1))
        maxs = np.maximum(maxs, p.max(axis=1))
    off = np.eye(3)
    off[0, 2] = _CANVAS_PAD - mins[0]
    off[1, 2] = _CANVAS_PAD - mins[1]
    cw = int(math.ceil(maxs[0] - mins[0])) + 2 * _CANVAS_PAD + 2
    ch = int(math.ceil(maxs[1] - mins[1])) + 2 * _CANVAS_PAD + 2
    return (ch, cw), off


def _sprite_patterns(cfg: SynthConfig) -> list[np.ndarray]:
    rng = np.random.default_rng(_rng_children(cfg)[2])
    patterns = []
    for sp in cfg.sprites:
        base = np.full(sp.size, sp.intensity, dtype=np.float64)
        if sp.texture > 0.0:
            base += rng.uniform(-sp.texture, sp.texture, size=sp.size)
        patterns.append(np.clip(base, 0.0, 255.0))
    return patterns


def _footprint_mask(cfg: SynthConfig, sprite_idx: int, t: int) -> np.ndarray:
    mask = np.zeros(cfg.dims, dtype=np.float32)
    y0, x0, sh, sw = _sprite_rect_raw(cfg.sprites[sprite_idx], t)
    mask[y0 : y0 + sh, x0 : x0 + sw] = 1.0
    return mask


def _ghosted_footprint(
    cfg: SynthConfig, sprite_idx: int, t: int, k_long: int
) -> np.ndarray:
    """Union of the sprite's footprints at t, t-1, t-k mapped into frame t."""
    union = _footprint_mask(cfg, sprite_idx, t) > 0.5
    for k in (1, k_long):
        if t - k < 0:
            continue
        fp = _footprint_mask(cfg, sprite_idx, t - k)
        h = gt_homography(cfg, t, k)
        warped, _ = kernels.warp_bilinear(fp, h.m, cfg.dims[0], cfg.dims[1])
        union |= warped > 0.25
    return union


def sprite_gt_mask(
    cfg: SynthConfig, sprite_idx: int, t: int, k_long: int = _DEFAULT_K_LONG
) -> MotionMask:
    """Ground-truth band for one sprite, dilated by 3 px (chebyshev)."""
    if not (0 <= t < cfg.frames):
        raise IndexOutOfRange(f"frame {t} outside [0, {cfg.frames})")
    if not (0 <= sprite_idx < len(cfg.sprites)):
        raise IndexOutOfRange(f"no sprite {sprite_idx}")
    union = _ghosted_footprint(cfg, sprite_idx, t, k_long)
    dilated = kernels.dilate(union.astype(np.uint8), 2 * _GT_DILATE_PX + 1)
    return MotionMask(dilated)


def gt_mask(cfg: SynthConfig, t: int, k_long: int = _DEFAULT_K_LONG) -> MotionMask:
    """Ground-truth motion band over all sprites at frame t.

    Union of each sprite's footprint at t, t-1, and t-k_long (the latter
    two mapped through the ego homographies into frame-t coordinates),
    dilated by 3 px.
    """
    if not (k_long <= t < cfg.frames):
        raise IndexOutOfRange(
            f"gt_mask defined for {k_long} <= t < {cfg.frames}, got {t}"
        )
    union = np.zeros(cfg.dims, dtype=bool)
    for i in range(len(cfg.sprites)):
        union |= _ghosted_footprint(cfg, i, t, k_long)
    dilated = kernels.dilate(union.astype(np.uint8), 2 * _GT_DILATE_PX + 1)
    return MotionMask(dilated)


def generate_sequence(cfg: SynthConfig) -> SyntheticSequence:
    """Render all frames plus ground-truth homographies and masks.

    Deterministic: the same config (including seed) always produces the
    same sequence byte for byte.
    """
    kids = _rng_children(cfg)
    jit = _jitter_table(cfg)
    (ch, cw), off = _canvas_geometry(cfg)
    canvas = _value_noise((ch, cw), cfg.background, np.random.default_rng(kids[0]))
    patterns = _sprite_patterns(cfg)
    h, w = cfg.dims

    frames: list[Frame] = []
    homs: list[Homography] = [Homography.identity()]
    masks: list[MotionMask] = []
    for t in range(cfg.frames):
        cam = off @ _ego_matrix(cfg, t, jit)
        rendered, cov = kernels.warp_bilinear(canvas, cam, h, w)
        if float(cov.min()) <= 0.999:
            raise ConfigError("ego motion drives the window off the canvas")
        img = rendered.astype(np.float64)
        for i, sp in enumerate(cfg.sprites):
            y0, x0, sh, sw = _sprite_rect_raw(sp, t)
            img[y0 : y0 + sh, x0 : x0 + sw] = patterns[i]
        frames.append(
            Frame(np.clip(np.rint(img), 0, 255).astype(np.uint8), index=t)
        )
        if t >= 1:
            homs.append(gt_step_homography(cfg, t))
        k_hist = min(t, _DEFAULT_K_LONG)
        if len(cfg.sprites) and t >= 1:
            union = np.zeros(cfg.dims, dtype=bool)
            for i in range(len(cfg.sprites)):
                union |= _ghosted_footprint(cfg, i, t, max(k_hist, 1))
            masks.append(
                MotionMask(kernels.dilate(union.astype(np.uint8), 2 * _GT_DILATE_PX + 1))
            )
        else:
            masks.append(MotionMask(np.zeros(cfg.dims, dtype=np.uint8)))
    return SyntheticSequence(config=cfg, frames=frames, gt_homographies=homs, gt_masks=masks)
