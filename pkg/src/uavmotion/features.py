"""Sparse feature detection, description, and matching.

Single-scale pipeline: FAST-9 corners with non-max suppression and
grid-balanced retention, intensity-centroid orientation, and a steered
256-bit binary descriptor sampled from a frozen pair table. Matching is
Hamming distance with a ratio test and a mutual-best cross check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._brief_pairs import BRIEF_PAIRS
from .errors import ImageTooSmall, OutOfBounds, ValidationError
from .geometry import PointMatch

# Descriptor patch half-width (15) plus smoothing support; detection and
# sampling both stay this far from the raster edge.
SAMPLING_MARGIN = 19

MIN_IMAGE_DIM = 64

_BOX5 = np.full(5, 0.2, dtype=np.float64)


@dataclass(frozen=True)
class FeatureParams:
    fast_threshold: float = 20.0
    max_keypoints: int = 500
    ratio_test: float = 0.75
    grid_cells: tuple[int, int] = (4, 4)

    def __post_init__(self):
        if self.fast_threshold <= 0:
            raise ValidationError("fast_threshold must be positive")
        if self.max_keypoints < 4:
            raise ValidationError("max_keypoints must be >= 4")
        if not (0.0 < self.ratio_test < 1.0):
            raise ValidationError("ratio_test must lie in (0, 1)")
        if self.grid_cells[0] < 1 or self.grid_cells[1] < 1:
            raise ValidationError("grid_cells must be >= 1 per axis")


@dataclass(frozen=True)
class Keypoint:
    """Detected corner; x/y are pixel coordinates, angle in radians."""

    x: float
    y: float
    response: float
    angle: float = 0.0


def _as_gray32(image: np.ndarray) -> np.ndarray:
    img = np.asarray(image)
    if img.ndim != 2:
        raise ValidationError("expected a single-channel raster")
    return np.ascontiguousarray(img, dtype=np.float32)


def detect_fast(image: np.ndarray, params: FeatureParams) -> list[Keypoint]:
    """FAST-9 corners, non-max suppressed, grid-balanced to max_keypoints.

    Only pixels at least SAMPLING_MARGIN from the border are kept so every
    returned keypoint supports orientation and descriptor sampling. Grid
    retention walks the cells round-robin taking each cell's next-strongest
    corner, which keeps the budget spatially balanced.
    """
    img = _as_gray32(image)
    h, w = img.shape
    if min(h, w) < MIN_IMAGE_DIM:
        raise ImageTooSmall(f"need min dimension {MIN_IMAGE_DIM}, got {img.shape}")
    scores = kernels.fast_scores(img, float(params.fast_threshold))
    m = SAMPLING_MARGIN
    scores[:m, :] = 0.0
    scores[-m:, :] = 0.0
    scores[:, :m] = 0.0
    scores[:, -m:] = 0.0

    # 3x3 non-max suppression; raster-earlier neighbors win score ties.
    p = np.pad(scores, 1, mode="constant", constant_values=-1.0)
    keep = scores > 0.0
    for dy, dx in ((-1, -1), (-1, 0), (-1, 1), (0, -1)):
        keep &= scores > p[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
    for dy, dx in ((0, 1), (1, -1), (1, 0), (1, 1)):
        keep &= scores >= p[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]

    ys, xs = np.nonzero(keep)
    if len(ys) == 0:
        return []
    resp = scores[ys, xs]

    rows, cols = params.grid_cells
    cell_of = (ys.astype(np.int64) * rows // h) * cols + xs.astype(np.int64) * cols // w
    order = np.lexsort((xs, ys, -resp))
    buckets: list[list[int]] = [[] for _ in range(rows * cols)]
    for i in order:
        buckets[cell_of[i]].append(i)

    picked: list[int] = []
    rank = 0
    while len(picked) < params.max_keypoints:
        took = False
        for bucket in buckets:
            if rank < len(bucket):
                picked.append(bucket[rank])
                took = True
                if len(picked) == params.max_keypoints:
                    break
        if not took:
            break
        rank += 1

    idx = np.array(picked, dtype=np.int64)
    rx = _subpixel_peak(scores[ys[idx], xs[idx] - 1], resp[idx], scores[ys[idx], xs[idx] + 1])
    ry = _subpixel_peak(scores[ys[idx] - 1, xs[idx]], resp[idx], scores[ys[idx] + 1, xs[idx]])
    fx = np.clip(xs[idx] + rx, m, w - 1 - m)
    fy = np.clip(ys[idx] + ry, m, h - 1 - m)
    return [
        Keypoint(x=float(fx[j]), y=float(fy[j]), response=float(resp[i]))
        for j, i in enumerate(picked)
    ]


def _subpixel_peak(lo: np.ndarray, mid: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Parabola-vertex offset in [-0.5, 0.5] from three score samples."""
    denom = 2.0 * (lo + hi - 2.0 * mid)
    off = np.where(denom == 0.0, 0.0, np.divide(lo - hi, denom, where=denom != 0.0))
    return np.clip(off, -0.5, 0.5)


def _check_margin(image: np.ndarray, kp: Keypoint) -> tuple[int, int]:
    h, w = image.shape
    x = int(round(kp.x))
    y = int(round(kp.y))
    m = SAMPLING_MARGIN
    if x < m or y < m or x > w - 1 - m or y > h - 1 - m:
        raise OutOfBounds(
            f"keypoint ({kp.x}, {kp.y}) violates the {m} px sampling margin"
        )
    return x, y


def orientation_ic(image: np.ndarray, kp: Keypoint) -> float:
    """Intensity-centroid angle atan2(m01, m10) over the radius-15 disc."""
    img = _as_gray32(image)
    x, y = _check_margin(img, kp)
    xs = np.array([x], dtype=np.int64)
    ys = np.array([y], dtype=np.int64)
    return float(kernels.orientation_angles(img, xs, ys)[0])


def brief_descriptor(image: np.ndarray, kp: Keypoint) -> np.ndarray:
    """Steered 256-bit descriptor packed into 32 bytes.

    `image` should already be smoothed (see smooth_for_descriptors); the
    pair offsets are rotated by kp.angle before sampling.
    """
    img = _as_gray32(image)
    x, y = _check_margin(img, kp)
    xs = np.array([x], dtype=np.int64)
    ys = np.array([y], dtype=np.int64)
    angles = np.array([kp.angle], dtype=np.float64)
    return kernels.brief_descriptors(img, xs, ys, angles, BRIEF_PAIRS)[0]


def smooth_for_descriptors(image: np.ndarray) -> np.ndarray:
    """5x5 box pre-smoothing applied before descriptor sampling."""
    return kernels.separable5(_as_gray32(image), _BOX5)


def compute_orientations(image: np.ndarray, kps: list[Keypoint]) -> list[Keypoint]:
    """Batch orientation assignment; returns new Keypoint instances."""
    if not kps:
        return []
    img = _as_gray32(image)
    for kp in kps:
        _check_margin(img, kp)
    xs = np.array([int(round(k.x)) for k in kps], dtype=np.int64)
    ys = np.array([int(round(k.y)) for k in kps], dtype=np.int64)
    angles = kernels.orientation_angles(img, xs, ys)
    return [
        Keypoint(x=k.x, y=k.y, response=k.response, angle=float(a))
        for k, a in zip(kps, angles)
    ]


def compute_descriptors(image: np.ndarray, kps: list[Keypoint]) -> np.ndarray:
    """Batch descriptor extraction from a pre-smoothed raster, (N, 32) uint8."""
    if not kps:
        return np.zeros((0, 32), dtype=np.uint8)
    img = _as_gray32(image)
    for kp in kps:
        _check_margin(img, kp)
    xs = np.array([int(round(k.x)) for k in kps], dtype=np.int64)
    ys = np.array([int(round(k.y)) for k in kps], dtype=np.int64)
    angles = np.array([k.angle for k in kps], dtype=np.float64)
    return kernels.brief_descriptors(img, xs, ys, angles, BRIEF_PAIRS)


def detect_and_describe(
    image: np.ndarray, params: FeatureParams
) -> tuple[list[Keypoint], np.ndarray]:
    """Detection, orientation, and description in one call.

    Corners and orientations come from the raw raster; descriptors sample
    the box-smoothed copy.
    """
    img = _as_gray32(image)
    kps = detect_fast(img, params)
    kps = compute_orientations(img, kps)
    desc = compute_descriptors(smooth_for_descriptors(img), kps)
    return kps, desc


def match_hamming_ratio(
    desc_cur: np.ndarray,
    desc_ref: np.ndarray,
    kps_cur: list[Keypoint],
    kps_ref: list[Keypoint],
    params: FeatureParams,
) -> list[PointMatch]:
    """Nearest-neighbour Hamming matching with ratio test and cross check.

    A match survives when its best distance is strictly below ratio_test
    times the second best and the reference keypoint's own best match
    points back at it. With a single reference descriptor the ratio test
    passes vacuously.
    """
    if desc_cur.shape[0] != len(kps_cur) or desc_ref.shape[0] != len(kps_ref):
        raise ValidationError("descriptor and keypoint counts differ")
    if desc_cur.shape[0] == 0 or desc_ref.shape[0] == 0:
        return []
    a = np.ascontiguousarray(desc_cur, dtype=np.uint8)
    b = np.ascontiguousarray(desc_ref, dtype=np.uint8)
    dm = kernels.hamming_matrix(a, b)

    j_best = dm.argmin(axis=1)
    d_best = dm[np.arange(dm.shape[0]), j_best].astype(np.float64)
    if dm.shape[1] >= 2:
        spoiled = dm.copy()
        spoiled[np.arange(dm.shape[0]), j_best] = np.iinfo(np.int32).max
        d_second = spoiled.min(axis=1).astype(np.float64)
    else:
        d_second = np.full(dm.shape[0], np.inf)
    back = dm.argmin(axis=0)

    out: list[PointMatch] = []
    for i in range(dm.shape[0]):
        j = int(j_best[i])
        if d_best[i] < params.ratio_test * d_second[i] and int(back[j]) == i:
            out.append(
                PointMatch(
                    p_cur=(kps_cur[i].x, kps_cur[i].y),
                    p_ref=(kps_ref[j].x, kps_ref[j].y),
                    score=float(d_best[i]),
                )
            )
    return out
