"""Dual-interval compensated differencing and mask fusion.

The short branch (interval 1) is blurred then thresholded low to catch
fast movers; the long branch (default interval 5) is thresholded high
then opened to accumulate slow displacement without speckle. Fusion is
a logical AND followed by closing, so both cues must agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionMismatch, IntervalMismatch, ValidationError
from .geometry import Homography, warp_with_coverage


@dataclass(frozen=True)
class MotionParams:
    tau_s: float = 15.0
    tau_l: float = 30.0
    k_short: int = 1
    k_long: int = 5
    open_kernel: int = 3
    close_kernel: int = 7
    blur_sigma: float = 1.1

    def __post_init__(self):
        if not (self.tau_l > self.tau_s):
            raise ValidationError("tau_l must exceed tau_s")
        if self.tau_s < 0:
            raise ValidationError("thresholds must be non-negative")
        if not (self.k_long > self.k_short >= 1):
            raise ValidationError("intervals must satisfy k_long > k_short >= 1")
        for k in (self.open_kernel, self.close_kernel):
            if k < 1 or k % 2 == 0:
                raise ValidationError("morphology kernels must be odd and >= 1")
        if self.blur_sigma <= 0:
            raise ValidationError("blur_sigma must be positive")


@dataclass(frozen=True)
class DiffMap:
    """Non-negative compensated difference image plus the interval it spans."""

    data: np.ndarray
    interval: int

    def __post_init__(self):
        d = self.data
        if not isinstance(d, np.ndarray) or d.ndim != 2 or d.dtype != np.float32:
            raise ValidationError("diff map must be a 2D float32 ndarray")
        if self.interval < 1:
            raise ValidationError("diff interval must be >= 1")


@dataclass(frozen=True)
class MotionMask:
    """Binary motion raster with values in {0, 1}."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if not isinstance(d, np.ndarray) or d.ndim != 2 or d.dtype != np.uint8:
            raise ValidationError("motion mask must be a 2D uint8 ndarray")
        if d.size and d.max() > 1:
            raise ValidationError("motion mask values must be 0 or 1")

    @property
    def density(self) -> float:
        return float(self.data.mean()) if self.data.size else 0.0


def gauss5_taps(sigma: float) -> np.ndarray:
    """Normalized 5-tap Gaussian used by the short-branch blur."""
    offsets = np.arange(-2, 3, dtype=np.float64)
    w = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return w / w.sum()


def compensated_diff(
    cur: np.ndarray, ref: np.ndarray, h: Homography, interval: int = 1
) -> DiffMap:
    """|cur - warp(ref, h)| with pixels outside the valid region zeroed."""
    cur = np.asarray(cur)
    ref = np.asarray(ref)
    if cur.ndim != 2 or ref.ndim != 2:
        raise ValidationError("compensated_diff expects single-channel rasters")
    if cur.shape != ref.shape:
        raise DimensionMismatch(f"frame dims differ: {cur.shape} vs {ref.shape}")
    warped, region = warp_with_coverage(ref, h, cur.shape)
    diff = np.abs(cur.astype(np.float32) - warped) * region.data.astype(np.float32)
    return DiffMap(diff, interval)


def gaussian_blur(diff: DiffMap, sigma: float = 1.1) -> DiffMap:
    """Separable 5x5 Gaussian, reflected (edge-inclusive) borders."""
    taps = gauss5_taps(sigma)
    return DiffMap(kernels.separable5(diff.data, taps), diff.interval)


def threshold_binary(diff: DiffMap, tau: float) -> MotionMask:
    """mask(x) = 1 iff diff(x) > tau (strict)."""
    if tau < 0:
        raise ValidationError("threshold must be non-negative")
    return MotionMask((diff.data > tau).astype(np.uint8))


def morphology(mask: MotionMask, op: str, kernel_size: int) -> MotionMask:
    """Binary opening or closing with a square kernel; out-of-bounds pixels
    never count against the window (so opening a border-touching block is
    lossless and closing never erases border pixels)."""
    if op not in ("open", "close"):
        raise ValidationError(f"unknown morphology op {op!r}")
    if kernel_size < 1 or kernel_size % 2 == 0:
        raise ValidationError("kernel size must be odd and >= 1")
    if kernel_size == 1:
        return MotionMask(mask.data.copy())
    if op == "open":
        out = kernels.dilate(kernels.erode(mask.data, kernel_size), kernel_size)
    else:
        out = kernels.erode(kernels.dilate(mask.data, kernel_size), kernel_size)
    return MotionMask(out)


def short_term_mask(delta1: DiffMap, params: MotionParams) -> MotionMask:
    """Blur then threshold at tau_s; expects the interval-k_short diff."""
    if delta1.interval != params.k_short:
        raise IntervalMismatch(
            f"short branch needs interval {params.k_short}, got {delta1.interval}"
        )
    return threshold_binary(gaussian_blur(delta1, params.blur_sigma), params.tau_s)


def long_term_mask(delta_long: DiffMap, params: MotionParams) -> MotionMask:
    """Threshold at tau_l then open; expects the interval-k_long diff."""
    if delta_long.interval != params.k_long:
        raise IntervalMismatch(
            f"long branch needs interval {params.k_long}, got {delta_long.interval}"
        )
    return morphology(threshold_binary(delta_long, params.tau_l), "open", params.open_kernel)


def fuse_masks(d_s: MotionMask, d_l: MotionMask, params: MotionParams) -> MotionMask:
    """AND of the branches, closed to bridge small gaps."""
    if d_s.data.shape != d_l.data.shape:
        raise DimensionMismatch(
            f"mask dims differ: {d_s.data.shape} vs {d_l.data.shape}"
        )
    both = MotionMask((d_s.data & d_l.data).astype(np.uint8))
    return morphology(both, "close", params.close_kernel)


@dataclass(frozen=True)
class MotionExtraction:
    """Final mask plus the per-branch intermediates."""

    mask: MotionMask
    short_mask: MotionMask
    long_mask: MotionMask
    diff_short: DiffMap
    diff_long: DiffMap


def extract_motion_mask_detailed(
    cur: np.ndarray,
    ref_short: np.ndarray,
    ref_long: np.ndarray,
    h_short: Homography,
    h_long: Homography,
    params: MotionParams,
) -> MotionExtraction:
    delta_s = compensated_diff(cur, ref_short, h_short, params.k_short)
    delta_l = compensated_diff(cur, ref_long, h_long, params.k_long)
    d_s = short_term_mask(delta_s, params)
    d_l = long_term_mask(delta_l, params)
    fused = fuse_masks(d_s, d_l, params)
    return MotionExtraction(fused, d_s, d_l, delta_s, delta_l)


def extract_motion_mask(
    cur: np.ndarray,
    ref_short: np.ndarray,
    ref_long: np.ndarray,
    h_short: Homography,
    h_long: Homography,
    params: MotionParams,
) -> MotionMask:
    """Full dual-interval extraction for one frame.

    cur/ref_short/ref_long are grayscale rasters of equal dims; h_short
    maps current pixels into ref_short, h_long into ref_long.
    """
    return extract_motion_mask_detailed(
        cur, ref_short, ref_long, h_short, h_long, params
    ).mask
