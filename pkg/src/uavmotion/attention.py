"""Motion-guided attention over detector feature pyramids.

The binary motion mask is resized to each pyramid level, pushed through
a tiny conv stack (3x3 -> ReLU -> 1x1 -> sigmoid), and the resulting
attention map modulates the level's features as F * (1 + A). Because A
is a sigmoid output the multiplier stays inside (1, 2): features are
amplified where motion is salient and never suppressed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch, StrideMismatch, ValidationError, WriteError
from .motion import MotionMask

PYRAMID_STRIDES = (8, 16, 32)

# Smallest/largest representable sigmoid outputs; attention_map clamps to
# these so saturated logits cannot round to exactly 0 or 1.
_SIG_LO = np.nextafter(0.0, 1.0)
_SIG_HI = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class FeatureMap:
    """Dense (C, H', W') activations at one pyramid stride."""

    data: np.ndarray
    stride: int

    def __post_init__(self):
        d = self.data
        if not isinstance(d, np.ndarray) or d.ndim != 3:
            raise ValidationError("feature map must be (C, H, W)")
        if d.shape[0] < 1:
            raise ValidationError("feature map needs at least one channel")
        if self.stride not in PYRAMID_STRIDES:
            raise ValidationError(f"stride must be one of {PYRAMID_STRIDES}")
        object.__setattr__(self, "data", np.asarray(d, dtype=np.float64))


@dataclass(frozen=True)
class AttentionMap:
    """Per-pixel amplification gate, values within [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.float64)
        if d.ndim != 3 or d.shape[0] != 1:
            raise ValidationError("attention map must be (1, H, W)")
        if d.size and (d.min() < 0.0 or d.max() > 1.0):
            raise ValidationError("attention values must lie in [0, 1]")
        object.__setattr__(self, "data", d)


@dataclass(frozen=True)
class MgaWeights:
    """Conv stack parameters: 3x3 over 1 channel -> cmid, then 1x1 -> 1."""

    conv3_kernel: np.ndarray
    conv3_bias: np.ndarray
    conv1_kernel: np.ndarray
    conv1_bias: np.ndarray
    cmid: int = 8

    def __post_init__(self):
        k3 = np.asarray(self.conv3_kernel, dtype=np.float64)
        b3 = np.asarray(self.conv3_bias, dtype=np.float64)
        k1 = np.asarray(self.conv1_kernel, dtype=np.float64)
        b1 = np.asarray(self.conv1_bias, dtype=np.float64)
        c = self.cmid
        if c < 1:
            raise ValidationError("cmid must be >= 1")
        if k3.shape != (c, 1, 3, 3):
            raise ValidationError(f"conv3_kernel must be ({c}, 1, 3, 3)")
        if b3.shape != (c,):
            raise ValidationError(f"conv3_bias must be ({c},)")
        if k1.shape != (1, c, 1, 1):
            raise ValidationError(f"conv1_kernel must be (1, {c}, 1, 1)")
        if b1.shape != (1,):
            raise ValidationError("conv1_bias must be (1,)")
        for arr in (k3, b3, k1, b1):
            if not np.all(np.isfinite(arr)):
                raise ValidationError("weights must be finite")
        object.__setattr__(self, "conv3_kernel", k3)
        object.__setattr__(self, "conv3_bias", b3)
        object.__setattr__(self, "conv1_kernel", k1)
        object.__setattr__(self, "conv1_bias", b1)


def init_mga_weights(cmid: int = 8, seed: int = 0) -> MgaWeights:
    """He-scaled Gaussian init, deterministic for a given seed."""
    rng = np.random.default_rng(seed)
    k3 = rng.normal(0.0, np.sqrt(2.0 / 9.0), size=(cmid, 1, 3, 3))
    k1 = rng.normal(0.0, np.sqrt(2.0 / cmid), size=(1, cmid, 1, 1))
    return MgaWeights(
        conv3_kernel=k3,
        conv3_bias=np.zeros(cmid),
        conv1_kernel=k1,
        conv1_bias=np.zeros(1),
        cmid=cmid,
    )


def save_mga_weights(weights: MgaWeights, path: str) -> None:
    payload = {
        "cmid": weights.cmid,
        "conv3_kernel": weights.conv3_kernel.tolist(),
        "conv3_bias": weights.conv3_bias.tolist(),
        "conv1_kernel": weights.conv1_kernel.tolist(),
        "conv1_bias": weights.conv1_bias.tolist(),
    }
    try:
        with open(path, "w") as f:
            json.dump(payload, f, sort_keys=True, indent=2)
            f.write("\n")
    except OSError as exc:
        raise WriteError(f"cannot write weights to {path}: {exc}") from exc


def load_mga_weights(path: str) -> MgaWeights:
    from .errors import ParseError

    try:
        with open(path) as f:
            payload = json.load(f)
    except OSError as exc:
        raise ParseError(f"cannot read weights from {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"weights file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ValidationError("weights file must hold a JSON object")
    required = {"cmid", "conv3_kernel", "conv3_bias", "conv1_kernel", "conv1_bias"}
    missing = required - payload.keys()
    if missing:
        raise ValidationError(f"weights file missing keys: {sorted(missing)}")
    extra = payload.keys() - required
    if extra:
        raise ValidationError(f"weights file has unknown keys: {sorted(extra)}")
    return MgaWeights(
        conv3_kernel=np.asarray(payload["conv3_kernel"], dtype=np.float64),
        conv3_bias=np.asarray(payload["conv3_bias"], dtype=np.float64),
        conv1_kernel=np.asarray(payload["conv1_kernel"], dtype=np.float64),
        conv1_bias=np.asarray(payload["conv1_bias"], dtype=np.float64),
        cmid=int(payload["cmid"]),
    )


def _resize_bilinear_2d(arr: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    """align_corners=False sampling: src = (dst + 0.5) * scale - 0.5, clamped."""
    sh, sw = arr.shape
    oh, ow = dims
    if oh < 1 or ow < 1:
        raise ValidationError("resize target must be positive")
    sy = (np.arange(oh, dtype=np.float64) + 0.5) * (sh / oh) - 0.5
    sx = (np.arange(ow, dtype=np.float64) + 0.5) * (sw / ow) - 0.5
    sy = np.clip(sy, 0.0, sh - 1.0)
    sx = np.clip(sx, 0.0, sw - 1.0)
    y0 = np.floor(sy).astype(np.int64)
    x0 = np.floor(sx).astype(np.int64)
    y1 = np.minimum(y0 + 1, sh - 1)
    x1 = np.minimum(x0 + 1, sw - 1)
    fy = (sy - y0)[:, None]
    fx = (sx - x0)[None, :]
    a = arr.astype(np.float64)
    top = a[y0[:, None], x0[None, :]] * (1.0 - fx) + a[y0[:, None], x1[None, :]] * fx
    bot = a[y1[:, None], x0[None, :]] * (1.0 - fx) + a[y1[:, None], x1[None, :]] * fx
    return top * (1.0 - fy) + bot * fy


def resize_bilinear(mask: MotionMask, dims: tuple[int, int]) -> np.ndarray:
    """Downsample the binary mask to a (1, H', W') float tensor in [0, 1]."""
    return _resize_bilinear_2d(mask.data.astype(np.float64), dims)[None, :, :]


def attention_map(m_down: np.ndarray, weights: MgaWeights) -> AttentionMap:
    """sigmoid(conv1x1(relu(conv3x3(m)))) with zero padding.

    Input is the (1, H', W') resized mask. A zero input with zero biases
    yields the neutral gate 0.5 everywhere.
    """
    m = np.asarray(m_down, dtype=np.float64)
    if m.ndim != 3 or m.shape[0] != 1:
        raise ShapeMismatch(f"expected (1, H, W) input, got {m.shape}")
    h, w = m.shape[1], m.shape[2]
    padded = np.zeros((h + 2, w + 2), dtype=np.float64)
    padded[1:-1, 1:-1] = m[0]
    k3 = weights.conv3_kernel
    mid = np.empty((weights.cmid, h, w), dtype=np.float64)
    for c in range(weights.cmid):
        acc = np.full((h, w), weights.conv3_bias[c], dtype=np.float64)
        for ky in range(3):
            for kx in range(3):
                acc += k3[c, 0, ky, kx] * padded[ky : ky + h, kx : kx + w]
        mid[c] = acc
    np.maximum(mid, 0.0, out=mid)
    logits = weights.conv1_bias[0] + np.tensordot(
        weights.conv1_kernel[0, :, 0, 0], mid, axes=1
    )
    gate = 1.0 / (1.0 + np.exp(-logits))
    np.clip(gate, _SIG_LO, _SIG_HI, out=gate)
    return AttentionMap(gate[None, :, :])


def modulate(features: FeatureMap, attention: AttentionMap) -> FeatureMap:
    """F * (1 + A): residual amplification, original features preserved."""
    if features.data.shape[1:] != attention.data.shape[1:]:
        raise ShapeMismatch(
            f"feature dims {features.data.shape[1:]} vs attention "
            f"{attention.data.shape[1:]}"
        )
    return FeatureMap(features.data * (1.0 + attention.data), features.stride)


def apply_mga_pyramid(
    p3: FeatureMap,
    p4: FeatureMap,
    p5: FeatureMap,
    mask: MotionMask,
    w3: MgaWeights,
    w4: MgaWeights,
    w5: MgaWeights,
) -> tuple[FeatureMap, FeatureMap, FeatureMap]:
    """Resize the mask to each level, gate it, and modulate all three levels.

    Levels are independent: each gets its own resize, weights, and map.
    Level dims must equal ceil(mask_dims / stride).
    """
    levels = ((p3, w3, 8), (p4, w4, 16), (p5, w5, 32))
    mh, mw = mask.data.shape
    out = []
    for fmap, weights, stride in levels:
        if fmap.stride != stride:
            raise StrideMismatch(f"expected stride {stride}, got {fmap.stride}")
        want = (-(-mh // stride), -(-mw // stride))
        have = fmap.data.shape[1:]
        if have != want:
            raise StrideMismatch(
                f"stride-{stride} level should be {want} for mask {mask.data.shape}, "
                f"got {have}"
            )
        gated = attention_map(resize_bilinear(mask, want), weights)
        out.append(modulate(fmap, gated))
    return tuple(out)
